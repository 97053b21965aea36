"""Central-finite-difference verification of analytic gradients."""

from __future__ import annotations

import numpy as np

from .tensor import backward


def gradcheck(fn, wrt, eps=1e-5, sample=None, rng=None, floor=1e-8):
    """Compare analytic gradients of ``fn()`` against central differences.

    ``fn`` rebuilds and returns the scalar loss tensor on every call (it
    must read the current values of the ``wrt`` tensors).  Checks every
    coordinate of every tensor in ``wrt``, or ``sample`` seeded-random
    coordinates per tensor when the full sweep is too expensive.

    Returns the max over checked coordinates of
    |analytic - numeric| / max(floor, |analytic| + |numeric|).

    ``floor`` guards the denominator.  Central differences on a loss of
    magnitude m cannot resolve gradients below roughly ulp(m) / eps, so
    for deep graphs whose smallest true gradients sit near that noise
    level a floor around 1e-6 keeps the ratio meaningful; a genuinely
    wrong backward still fails by orders of magnitude.
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    if floor <= 0:
        raise ValueError("floor must be positive")
    for t in wrt:
        t.grad = None
    loss = fn()
    backward(loss)
    analytic = [np.zeros(t.shape) if t.grad is None else t.grad.copy() for t in wrt]

    worst = 0.0
    for t, a in zip(wrt, analytic):
        flat = t.data.reshape(-1)
        n = flat.size
        if sample is not None and sample < n:
            if rng is None:
                rng = np.random.default_rng(0)
            coords = rng.choice(n, size=sample, replace=False)
        else:
            coords = range(n)
        a_flat = a.reshape(-1)
        for i in coords:
            saved = flat[i]
            flat[i] = saved + eps
            up = fn().item()
            flat[i] = saved - eps
            down = fn().item()
            flat[i] = saved
            numeric = (up - down) / (2.0 * eps)
            err = abs(a_flat[i] - numeric) / max(floor, abs(a_flat[i]) + abs(numeric))
            if err > worst:
                worst = err
    return worst
