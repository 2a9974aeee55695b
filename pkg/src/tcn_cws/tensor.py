"""Dense float64 array helpers.

Tensors are plain ``numpy.ndarray`` objects in float64, row-major. The
functions here add the shape checks and the overflow-safe log-sum-exp that
the rest of the package relies on.
"""

import numpy as np

from .errors import DimensionError, DomainError

DTYPE = np.float64


def as_tensor(x):
    return np.ascontiguousarray(x, dtype=DTYPE)


def matmul(a, b):
    a = np.asarray(a, dtype=DTYPE)
    b = np.asarray(b, dtype=DTYPE)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError(f"cannot multiply shapes {a.shape} and {b.shape}")
    return a @ b


def logsumexp(v, axis=None):
    """log(sum(exp(v))) computed as max + log(sum(exp(v - max))).

    With ``axis=None`` the input must be one-dimensional and a Python float
    is returned; otherwise the reduction runs along ``axis``.
    """
    v = np.asarray(v, dtype=DTYPE)
    if axis is None:
        if v.ndim != 1:
            raise DimensionError(f"logsumexp expects a vector, got shape {v.shape}")
        if v.size == 0:
            raise DomainError("logsumexp of an empty vector")
        top = v.max()
        if v.size == 1:
            return float(top)
        return float(top + np.log(np.exp(v - top).sum()))
    if v.shape[axis] == 0:
        raise DomainError("logsumexp over an empty axis")
    top = v.max(axis=axis, keepdims=True)
    out = top + np.log(np.exp(v - top).sum(axis=axis, keepdims=True))
    return np.squeeze(out, axis=axis)


def softmax(v, axis=-1):
    v = np.asarray(v, dtype=DTYPE)
    z = np.exp(v - v.max(axis=axis, keepdims=True))
    return z / z.sum(axis=axis, keepdims=True)


def _same_shape(op, a, b):
    if a.shape != b.shape:
        raise DimensionError(f"{op}: shape mismatch {a.shape} vs {b.shape}")


def elementwise(op, *args):
    """Apply ``op`` pointwise.

    Binary ops (add, sub, mul) need identical shapes; ``scale`` takes a
    tensor and a scalar; relu, exp and log are unary.
    """
    if op in ("add", "sub", "mul"):
        if len(args) != 2:
            raise TypeError(f"{op} takes two tensors")
        a, b = (np.asarray(x, dtype=DTYPE) for x in args)
        _same_shape(op, a, b)
        return {"add": np.add, "sub": np.subtract, "mul": np.multiply}[op](a, b)
    if op == "scale":
        a, c = args
        return np.asarray(a, dtype=DTYPE) * float(c)
    if op in ("relu", "exp", "log"):
        (a,) = args
        a = np.asarray(a, dtype=DTYPE)
        if op == "relu":
            return np.maximum(a, 0.0)
        if op == "exp":
            return np.exp(a)
        if np.any(a <= 0):
            raise DomainError("log of a non-positive entry")
        return np.log(a)
    raise ValueError(f"unknown elementwise op {op!r}")


def relu(x):
    return np.maximum(x, 0.0)
