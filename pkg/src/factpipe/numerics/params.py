"""Named parameter collections with seeded init and a versioned checkpoint format."""

from __future__ import annotations

import struct

import numpy as np

from .tensor import Tensor, ShapeError

MAGIC = b"FACTPIPE-PARAMS-1"


class ParamSet:
    """Named trainable tensors plus the seed that initialized them.

    Names are unique and shapes are fixed at creation.  Weight entries are
    drawn uniform in [-1/sqrt(fan), 1/sqrt(fan)] from a generator seeded
    once per set, so two sets built the same way from the same seed are
    identical.
    """

    def __init__(self, seed=0):
        self.seed = int(seed)
        self.rng = np.random.default_rng(self.seed)
        self._params = {}

    def add(self, name, shape, init="uniform", fan=None, value=None):
        """Create and register a parameter tensor.

        init: "uniform" (scaled by 1/sqrt(fan), default fan = shape[0]),
        "zeros", or "value" (use ``value`` as given).
        """
        if name in self._params:
            raise ValueError(f"duplicate parameter name {name!r}")
        shape = tuple(int(s) for s in shape)
        if init == "zeros":
            data = np.zeros(shape)
        elif init == "value":
            data = np.array(value, dtype=np.float64)
            if data.shape != shape:
                raise ShapeError(f"value shape {data.shape} != declared {shape}")
        elif init == "uniform":
            bound = 1.0 / np.sqrt(fan if fan else (shape[0] if shape else 1))
            data = self.rng.uniform(-bound, bound, size=shape)
        else:
            raise ValueError(f"unknown init {init!r}")
        t = Tensor(data, requires_grad=True, name=name)
        self._params[name] = t
        return t

    def __getitem__(self, name):
        return self._params[name]

    def __contains__(self, name):
        return name in self._params

    def __len__(self):
        return len(self._params)

    def names(self):
        return list(self._params)

    def items(self):
        return self._params.items()

    def tensors(self):
        return list(self._params.values())

    def zero_grad(self):
        for t in self._params.values():
            t.grad = None

    def gradients(self):
        """Current gradients keyed by name (missing grads become zeros)."""
        return {
            name: (t.grad if t.grad is not None else np.zeros(t.shape))
            for name, t in self._params.items()
        }

    def checksum(self):
        """Order-sensitive fingerprint of all parameter values."""
        import hashlib

        h = hashlib.sha256()
        for name, t in self._params.items():
            h.update(name.encode())
            h.update(np.ascontiguousarray(t.data).tobytes())
        return h.hexdigest()

    # ---- checkpoint I/O -----------------------------------------------------

    def save(self, path):
        """Write a FACTPIPE-PARAMS-1 checkpoint (binary, timestamp-free)."""
        with open(path, "wb") as fh:
            fh.write(MAGIC + b"\n")
            fh.write(f"seed {self.seed}\n".encode())
            fh.write(f"count {len(self._params)}\n".encode())
            for name, t in self._params.items():
                shape = " ".join(str(s) for s in t.shape)
                fh.write(f"param {name} {t.data.ndim} {shape}\n".encode())
                raw = np.ascontiguousarray(t.data, dtype="<f8").tobytes()
                fh.write(struct.pack("<Q", len(raw)))
                fh.write(raw)

    @classmethod
    def load(cls, path):
        with open(path, "rb") as fh:
            magic = fh.readline().rstrip(b"\n")
            if magic != MAGIC:
                raise ValueError(f"{path}: not a {MAGIC.decode()} checkpoint")
            seed = int(fh.readline().split()[1])
            count = int(fh.readline().split()[1])
            ps = cls(seed)
            for _ in range(count):
                header = fh.readline().decode().split()
                name, ndim = header[1], int(header[2])
                shape = tuple(int(x) for x in header[3:3 + ndim])
                (nbytes,) = struct.unpack("<Q", fh.read(8))
                data = np.frombuffer(fh.read(nbytes), dtype="<f8").reshape(shape)
                ps.add(name, shape, init="value", value=data)
            return ps
