import numpy as np

from ..errors import ArgumentError

ACTIVATIONS = ("linear", "relu", "sigmoid", "tanh")


def sigmoid(z):
    # split by sign so exp never overflows
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def activate(z, name):
    if name == "linear":
        return z
    if name == "relu":
        return np.maximum(z, 0.0)
    if name == "sigmoid":
        return sigmoid(np.asarray(z, dtype=np.float64))
    if name == "tanh":
        return np.tanh(z)
    raise ArgumentError(f"unknown activation {name!r}")


def activate_backward(dy, z, y, name):
    """Gradient wrt the pre-activation ``z`` given upstream ``dy`` and output ``y``."""
    if name == "linear":
        return dy
    if name == "relu":
        return dy * (z > 0)
    if name == "sigmoid":
        return dy * y * (1.0 - y)
    if name == "tanh":
        return dy * (1.0 - y * y)
    raise ArgumentError(f"unknown activation {name!r}")
