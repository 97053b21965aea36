"""Dense float64 tensors with reverse-mode automatic differentiation.

Every operation records its inputs and a backward closure on the output
tensor, so any scalar result can be differentiated with ``backward()``.
The recorded links form an implicit acyclic graph; ``topo_order()``
exposes it as a topologically sorted node list.
"""

from __future__ import annotations

import numpy as np

# When True, tensor construction rejects NaN/Inf values.  Off by default;
# tests enable it via checked_mode().
CHECK_FINITE = False


class checked_mode:
    """Context manager turning on finite-value checks at construction."""

    def __init__(self, enabled=True):
        self.enabled = enabled

    def __enter__(self):
        global CHECK_FINITE
        self._saved = CHECK_FINITE
        CHECK_FINITE = self.enabled
        return self

    def __exit__(self, *exc):
        global CHECK_FINITE
        CHECK_FINITE = self._saved
        return False


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible for an operation."""


def _as_array(data):
    arr = np.asarray(data, dtype=np.float64)
    if CHECK_FINITE and not np.all(np.isfinite(arr)):
        raise ValueError("non-finite value in tensor construction")
    return arr


class Tensor:
    """A numpy array plus the bookkeeping needed for backprop.

    ``data`` is always float64.  ``grad`` is populated by ``backward()``
    for tensors created with ``requires_grad=True`` and for intermediates
    on the path to the loss.
    """

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "name")

    def __init__(self, data, requires_grad=False, name=None, _parents=(), _backward=None):
        self.data = _as_array(data)
        self.grad = None
        self.requires_grad = requires_grad
        self.name = name
        self._parents = _parents
        self._backward = _backward

    # ---- basic introspection -------------------------------------------------

    @property
    def shape(self):
        return self.data.shape

    @property
    def ndim(self):
        return self.data.ndim

    @property
    def size(self):
        return self.data.size

    def item(self):
        if self.data.size != 1:
            raise ShapeError(f"item() on tensor of shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self):
        tag = f" name={self.name!r}" if self.name else ""
        return f"Tensor(shape={self.shape}{tag})"

    def detach(self):
        """A new leaf tensor sharing this tensor's values."""
        return Tensor(self.data.copy())

    # ---- graph plumbing --------------------------------------------------------

    def _child(self, data, parents, backward):
        needs = any(p.requires_grad or p._parents for p in parents)
        if not needs:
            return Tensor(data)
        return Tensor(data, _parents=tuple(parents), _backward=backward)

    def _accumulate(self, grad):
        if self.grad is None:
            self.grad = np.array(grad, dtype=np.float64, copy=True)
        else:
            self.grad += grad

    # ---- arithmetic ------------------------------------------------------------

    def __add__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out_data = self.data + other.data

        def backward(out):
            if self.requires_grad or self._parents:
                self._accumulate(_unbroadcast(out.grad, self.shape))
            if other.requires_grad or other._parents:
                other._accumulate(_unbroadcast(out.grad, other.shape))

        return self._child(out_data, (self, other), backward)

    __radd__ = __add__

    def __neg__(self):
        def backward(out):
            if self.requires_grad or self._parents:
                self._accumulate(-out.grad)

        return self._child(-self.data, (self,), backward)

    def __sub__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        return self + (-other)

    def __rsub__(self, other):
        return Tensor(other) + (-self)

    def __mul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out_data = self.data * other.data

        def backward(out):
            if self.requires_grad or self._parents:
                self._accumulate(_unbroadcast(out.grad * other.data, self.shape))
            if other.requires_grad or other._parents:
                other._accumulate(_unbroadcast(out.grad * self.data, other.shape))

        return self._child(out_data, (self, other), backward)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        out_data = self.data / other.data

        def backward(out):
            if self.requires_grad or self._parents:
                self._accumulate(_unbroadcast(out.grad / other.data, self.shape))
            if other.requires_grad or other._parents:
                g = -out.grad * self.data / (other.data * other.data)
                other._accumulate(_unbroadcast(g, other.shape))

        return self._child(out_data, (self, other), backward)

    def __matmul__(self, other):
        other = other if isinstance(other, Tensor) else Tensor(other)
        try:
            out_data = self.data @ other.data
        except ValueError as exc:
            raise ShapeError(f"matmul {self.shape} @ {other.shape}: {exc}") from None

        a, b = self.data, other.data

        def backward(out):
            g = out.grad
            if self.requires_grad or self._parents:
                if a.ndim == 1 and b.ndim == 1:
                    ga = g * b
                elif a.ndim == 1:          # (d,) @ (d,k) -> (k,)
                    ga = b @ g
                elif b.ndim == 1:          # (t,d) @ (d,) -> (t,)
                    ga = np.outer(g, b)
                else:
                    ga = g @ b.T
                self._accumulate(ga)
            if other.requires_grad or other._parents:
                if a.ndim == 1 and b.ndim == 1:
                    gb = g * a
                elif a.ndim == 1:
                    gb = np.outer(a, g)
                elif b.ndim == 1:
                    gb = a.T @ g
                else:
                    gb = a.T @ g
                other._accumulate(gb)

        return self._child(out_data, (self, other), backward)

    # ---- elementwise nonlinearities ---------------------------------------------

    def tanh(self):
        out_data = np.tanh(self.data)

        def backward(out):
            self._accumulate(out.grad * (1.0 - out.data * out.data))

        return self._child(out_data, (self,), backward)

    def sigmoid(self):
        # numerically stable logistic
        x = self.data
        out_data = np.where(x >= 0, 1.0 / (1.0 + np.exp(-np.abs(x))),
                            np.exp(-np.abs(x)) / (1.0 + np.exp(-np.abs(x))))

        def backward(out):
            self._accumulate(out.grad * out.data * (1.0 - out.data))

        return self._child(out_data, (self,), backward)

    def relu(self):
        out_data = np.maximum(self.data, 0.0)

        def backward(out):
            self._accumulate(out.grad * (self.data > 0))

        return self._child(out_data, (self,), backward)

    def exp(self):
        out_data = np.exp(self.data)

        def backward(out):
            self._accumulate(out.grad * out.data)

        return self._child(out_data, (self,), backward)

    def log(self):
        out_data = np.log(self.data)

        def backward(out):
            self._accumulate(out.grad / self.data)

        return self._child(out_data, (self,), backward)

    def sqrt(self):
        out_data = np.sqrt(self.data)

        def backward(out):
            self._accumulate(out.grad * 0.5 / out.data)

        return self._child(out_data, (self,), backward)

    # ---- reductions ---------------------------------------------------------------

    def sum(self, axis=None):
        out_data = self.data.sum(axis=axis)

        def backward(out):
            g = out.grad
            if axis is None:
                self._accumulate(np.full(self.shape, g, dtype=np.float64))
            else:
                self._accumulate(np.broadcast_to(np.expand_dims(g, axis), self.shape).copy())

        return self._child(out_data, (self,), backward)

    def mean(self, axis=None):
        n = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis) * (1.0 / n)

    def max(self, axis=None):
        out_data = self.data.max(axis=axis)

        def backward(out):
            if axis is None:
                mask = (self.data == out.data)
                # split the gradient across ties so the sum is conserved
                self._accumulate(out.grad * mask / mask.sum())
            else:
                expanded = np.expand_dims(out.data, axis)
                mask = (self.data == expanded)
                counts = mask.sum(axis=axis, keepdims=True)
                self._accumulate(np.expand_dims(out.grad, axis) * mask / counts)

        return self._child(out_data, (self,), backward)

    # ---- shape ops -------------------------------------------------------------------

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        out_data = self.data.reshape(shape)

        def backward(out):
            self._accumulate(out.grad.reshape(self.shape))

        return self._child(out_data, (self,), backward)

    @property
    def T(self):
        out_data = self.data.T

        def backward(out):
            self._accumulate(out.grad.T)

        return self._child(out_data, (self,), backward)

    def __getitem__(self, key):
        out_data = self.data[key]

        def backward(out):
            g = np.zeros(self.shape, dtype=np.float64)
            g[key] = out.grad
            self._accumulate(g)

        return self._child(out_data, (self,), backward)

    # ---- row-softmax primitives ---------------------------------------------------------

    def softmax_rows(self):
        """Softmax along the last axis; rows sum to 1 and are strictly positive."""
        shifted = self.data - self.data.max(axis=-1, keepdims=True)
        e = np.exp(shifted)
        out_data = e / e.sum(axis=-1, keepdims=True)

        def backward(out):
            y, g = out.data, out.grad
            dot = (g * y).sum(axis=-1, keepdims=True)
            self._accumulate((g - dot) * y)

        return self._child(out_data, (self,), backward)

    def log_softmax_rows(self):
        shifted = self.data - self.data.max(axis=-1, keepdims=True)
        out_data = shifted - np.log(np.exp(shifted).sum(axis=-1, keepdims=True))

        def backward(out):
            g = out.grad
            y = np.exp(out.data)
            self._accumulate(g - y * g.sum(axis=-1, keepdims=True))

        return self._child(out_data, (self,), backward)


# ---- free functions ------------------------------------------------------------------


def _unbroadcast(grad, shape):
    """Sum grad down to ``shape``, undoing numpy broadcasting."""
    if grad.shape == shape:
        return grad
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for i, dim in enumerate(shape):
        if dim == 1 and grad.shape[i] != 1:
            grad = grad.sum(axis=i, keepdims=True)
    return grad


def concat(tensors, axis=0):
    """Concatenate tensors along ``axis`` (differentiable)."""
    tensors = [t if isinstance(t, Tensor) else Tensor(t) for t in tensors]
    out_data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.data.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(out):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad or t._parents:
                idx = [slice(None)] * out.grad.ndim
                idx[axis] = slice(lo, hi)
                t._accumulate(out.grad[tuple(idx)])

    proto = tensors[0]
    return proto._child(out_data, tuple(tensors), backward)


def stack_rows(vectors):
    """Stack 1-D tensors into a matrix, one per row (differentiable)."""
    vectors = [v if isinstance(v, Tensor) else Tensor(v) for v in vectors]
    out_data = np.stack([v.data for v in vectors], axis=0)

    def backward(out):
        for i, v in enumerate(vectors):
            if v.requires_grad or v._parents:
                v._accumulate(out.grad[i])

    return vectors[0]._child(out_data, tuple(vectors), backward)


def topo_order(loss):
    """All graph nodes reachable from ``loss``, parents before children."""
    order, visited = [], set()
    stack = [(loss, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for p in node._parents:
            if id(p) not in visited:
                stack.append((p, False))
    return order


def backward(loss):
    """Reverse-mode sweep from a scalar loss; populates ``.grad`` fields."""
    if loss.data.size != 1:
        raise ShapeError(f"backward() needs a scalar loss, got shape {loss.shape}")
    order = topo_order(loss)
    loss.grad = np.ones_like(loss.data)
    for node in reversed(order):
        if node._backward is not None:
            node._backward(node)
    return loss
