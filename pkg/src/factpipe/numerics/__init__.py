"""Minimal dense-tensor library with reverse-mode autodiff and layer primitives."""

from .tensor import (
    Tensor,
    ShapeError,
    backward,
    checked_mode,
    concat,
    stack_rows,
    topo_order,
)
from .layers import (
    bilstm_encode,
    cosine,
    cross_entropy,
    dropout,
    linear,
    lstm_cell,
    lstm_encode,
    pool_avg_max,
)
from .params import ParamSet, MAGIC
from .optim import SGD, Adam, make_optimizer, sgd_step
from .gradcheck import gradcheck

__all__ = [
    "Tensor",
    "ShapeError",
    "backward",
    "checked_mode",
    "concat",
    "stack_rows",
    "topo_order",
    "bilstm_encode",
    "cosine",
    "cross_entropy",
    "dropout",
    "linear",
    "lstm_cell",
    "lstm_encode",
    "pool_avg_max",
    "ParamSet",
    "MAGIC",
    "SGD",
    "Adam",
    "make_optimizer",
    "sgd_step",
    "gradcheck",
]
