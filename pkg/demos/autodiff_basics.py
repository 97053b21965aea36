"""A tour of the tape-based tensor underneath every model in this package.

Builds a few expressions, checks their gradients against finite
differences, then fits a two-layer perceptron on a toy regression with
the same ParamSet/optimizer machinery the real models use.
"""

import numpy as np

from factpipe.numerics import (Adam, ParamSet, Tensor, backward, gradcheck,
                               lstm_encode)


def expressions():
    print("== scalars flow through numpy ops ==")
    x = Tensor([[1.0, -2.0], [0.5, 3.0]])
    w = Tensor([[0.1], [-0.4]], requires_grad=True)
    h = (x @ w).tanh()
    y = (h * h).sum()
    backward(y)
    print("loss     ", float(y.data))
    print("dloss/dw ", w.grad.ravel())

    # the same derivative, numerically
    eps = 1e-6
    numeric = np.zeros(2)
    for i in range(2):
        w.data[i, 0] += eps
        up = float(np.sum(np.tanh(x.data @ w.data) ** 2))
        w.data[i, 0] -= 2 * eps
        down = float(np.sum(np.tanh(x.data @ w.data) ** 2))
        w.data[i, 0] += eps
        numeric[i] = (up - down) / (2 * eps)
    print("numeric  ", numeric)


def check_the_recurrence():
    print("\n== gradcheck covers the LSTM too ==")
    in_dim, hidden = 3, 2
    ps = ParamSet(0)
    ps.add("w", (in_dim + hidden, 4 * hidden), fan=in_dim + hidden)
    ps.add("b", (4 * hidden,), init="zeros")
    xs = Tensor(np.random.default_rng(1).normal(size=(4, 3)))

    def loss():
        states = lstm_encode(xs, ps["w"], ps["b"])
        return (states * states).sum()

    err = gradcheck(loss, ps.tensors(), eps=1e-5)
    print(f"max relative error vs finite differences: {err:.2e}")


def fit_a_curve():
    print("\n== the training loop every model reuses ==")
    rng = np.random.default_rng(2)
    inputs = rng.uniform(-1, 1, size=(64, 1))
    targets = np.sin(3 * inputs)

    ps = ParamSet(0)
    ps.add("w1", (1, 16), fan=1)
    ps.add("b1", (16,), init="zeros")
    ps.add("w2", (16, 1), fan=16)
    ps.add("b2", (1,), init="zeros")
    opt = Adam(lr=0.02)

    x, t = Tensor(inputs), Tensor(targets)
    for step in range(400):
        ps.zero_grad()
        pred = (x @ ps["w1"] + ps["b1"]).tanh() @ ps["w2"] + ps["b2"]
        err = pred - t
        loss = (err * err).sum() * (1.0 / len(inputs))
        backward(loss)
        opt.step(ps, ps.gradients())
        if step % 100 == 0 or step == 399:
            print(f"step {step:3d}  mse {float(loss.data):.5f}")


if __name__ == "__main__":
    expressions()
    check_the_recurrence()
    fit_a_curve()
