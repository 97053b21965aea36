"""Parameter-update rules: plain SGD and Adam."""

from __future__ import annotations

import numpy as np

from .tensor import ShapeError


def sgd_step(params, gradients, lr):
    """In-place p <- p - lr * g for every named gradient."""
    if lr <= 0:
        raise ValueError("lr must be positive")
    for name, grad in gradients.items():
        p = params[name]
        grad = np.asarray(grad, dtype=np.float64)
        if grad.shape != p.shape:
            raise ShapeError(f"gradient for {name!r} has shape {grad.shape}, want {p.shape}")
        p.data -= lr * grad


class SGD:
    def __init__(self, lr=0.1):
        self.lr = lr

    def step(self, params, gradients):
        sgd_step(params, gradients, self.lr)


class Adam:
    """Adam with the usual bias correction (lr 1e-3, betas 0.9/0.999, eps 1e-8)."""

    def __init__(self, lr=1e-3, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.t = 0
        self._m = {}
        self._v = {}

    def step(self, params, gradients):
        self.t += 1
        b1, b2 = self.beta1, self.beta2
        for name, grad in gradients.items():
            p = params[name]
            grad = np.asarray(grad, dtype=np.float64)
            if grad.shape != p.shape:
                raise ShapeError(f"gradient for {name!r} has shape {grad.shape}, want {p.shape}")
            m = self._m.get(name)
            v = self._v.get(name)
            if m is None:
                m = np.zeros_like(grad)
                v = np.zeros_like(grad)
            m = b1 * m + (1 - b1) * grad
            v = b2 * v + (1 - b2) * grad * grad
            self._m[name] = m
            self._v[name] = v
            m_hat = m / (1 - b1 ** self.t)
            v_hat = v / (1 - b2 ** self.t)
            p.data -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)


def make_optimizer(kind, lr=None):
    """Build an optimizer by name; Adam is the default training choice."""
    kind = kind.lower()
    if kind == "adam":
        return Adam(lr=lr if lr is not None else 1e-3)
    if kind == "sgd":
        return SGD(lr=lr if lr is not None else 0.1)
    raise ValueError(f"unknown optimizer {kind!r}")
