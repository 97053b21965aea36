"""Layer primitives built on the autodiff tensor: linear, LSTM, pooling."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, ShapeError, concat, stack_rows


def linear(x, weight, bias=None):
    """x @ weight (+ bias).  x: (t, d) or (d,); weight: (d, k)."""
    out = x @ weight
    if bias is not None:
        out = out + bias
    return out


def lstm_cell(x_t, h_prev, c_prev, weight, bias):
    """One LSTM step with fused gates.

    ``weight`` is ((d + h), 4h) and ``bias`` (4h,), gate order i, f, g, o.
    Returns (h_next, c_next).
    """
    h = h_prev.shape[-1]
    z = concat([x_t, h_prev], axis=-1) @ weight + bias
    i = z[..., 0:h].sigmoid()
    f = z[..., h:2 * h].sigmoid()
    g = z[..., 2 * h:3 * h].tanh()
    o = z[..., 3 * h:4 * h].sigmoid()
    c_next = f * c_prev + i * g
    h_next = o * c_next.tanh()
    return h_next, c_next


def lstm_encode(seq, weight, bias, reverse=False):
    """Run an LSTM over seq (T, d); returns hidden states (T, h).

    With ``reverse=True`` the recurrence runs right-to-left but the output
    rows stay aligned with the input rows.
    """
    t_len = seq.shape[0]
    if t_len < 1:
        raise ShapeError("lstm_encode: empty sequence")
    hidden = weight.shape[1] // 4
    h = Tensor(np.zeros(hidden))
    c = Tensor(np.zeros(hidden))
    steps = range(t_len - 1, -1, -1) if reverse else range(t_len)
    outputs = [None] * t_len
    for t in steps:
        h, c = lstm_cell(seq[t], h, c, weight, bias)
        outputs[t] = h
    return stack_rows(outputs)


def bilstm_encode(seq, fwd_weight, fwd_bias, bwd_weight, bwd_bias):
    """Bidirectional LSTM over seq (T, d) -> (T, 2h).

    Per-token concatenation of the forward pass and the (separately
    parameterized) backward pass.
    """
    fwd = lstm_encode(seq, fwd_weight, fwd_bias, reverse=False)
    bwd = lstm_encode(seq, bwd_weight, bwd_bias, reverse=True)
    return concat([fwd, bwd], axis=1)


def pool_avg_max(seq):
    """Column-wise mean and max of seq (T, k), concatenated -> (2k,)."""
    if seq.shape[0] < 1:
        raise ShapeError("pool_avg_max: empty sequence")
    return concat([seq.mean(axis=0), seq.max(axis=0)], axis=0)


def dropout(x, p, rng):
    """Inverted dropout; identity when p == 0."""
    if p <= 0.0:
        return x
    keep = (rng.random(x.shape) >= p).astype(np.float64) / (1.0 - p)
    return x * Tensor(keep)


def cross_entropy(logits, target_index):
    """Negative log-likelihood of ``target_index`` under softmax(logits)."""
    logp = logits.log_softmax_rows()
    return -logp[target_index]


def cosine(u, v):
    """Cosine similarity of two vectors; 0 when either norm is 0."""
    nu = float(np.linalg.norm(u.data))
    nv = float(np.linalg.norm(v.data))
    if nu == 0.0 or nv == 0.0:
        return Tensor(0.0)
    dot = (u * v).sum()
    return dot / ((u * u).sum().sqrt() * (v * v).sum().sqrt())
