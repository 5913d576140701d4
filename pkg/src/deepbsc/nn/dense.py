"""Fully connected layers and batch normalisation."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from .activations import activate, activate_backward


@dataclass
class DenseParams:
    weights: np.ndarray  # (out, in)
    bias: np.ndarray  # (out,)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 2 or self.bias.shape != (self.weights.shape[0],):
            raise DimensionError(
                f"dense weights {self.weights.shape} and bias {self.bias.shape} disagree"
            )

    @classmethod
    def init(cls, n_in, n_out, rng, limit=None):
        """Uniform init in [-limit, limit], default limit 1/sqrt(fan_in)."""
        if limit is None:
            limit = 1.0 / np.sqrt(n_in)
        return cls(
            rng.uniform(-limit, limit, size=(n_out, n_in)),
            rng.uniform(-limit, limit, size=n_out),
        )

    @property
    def n_in(self):
        return self.weights.shape[1]

    @property
    def n_out(self):
        return self.weights.shape[0]

    def tensors(self):
        return {"weights": self.weights, "bias": self.bias}


def dense_apply(params: DenseParams, x, activation="linear"):
    """y = activation(W x + b) for a vector or a batch of row vectors.

    Returns ``(y, cache)``; pass the cache to :func:`dense_backward`.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.n_in:
        raise DimensionError(f"dense layer expects {params.n_in} inputs, got {x.shape[-1]}")
    z = x @ params.weights.T + params.bias
    y = activate(z, activation)
    return y, (x, z, y, activation)


def dense_backward(params: DenseParams, cache, dy):
    x, z, y, activation = cache
    dz = activate_backward(np.asarray(dy, dtype=np.float64), z, y, activation)
    if x.ndim == 1:
        dw = np.outer(dz, x)
        db = dz.copy()
    else:
        x2 = x.reshape(-1, x.shape[-1])
        dz2 = dz.reshape(-1, dz.shape[-1])
        dw = dz2.T @ x2
        db = dz2.sum(axis=0)
    dx = dz @ params.weights
    return dx, {"weights": dw, "bias": db}


@dataclass
class BatchNormParams:
    """Per-feature batch normalisation.

    ``gamma``/``beta`` are trainable; the running statistics are buffers
    updated as ``running = momentum * running + (1 - momentum) * batch``.
    """

    gamma: np.ndarray
    beta: np.ndarray
    running_mean: np.ndarray
    running_var: np.ndarray
    momentum: float = 0.99
    eps: float = 1e-5

    @classmethod
    def init(cls, n, momentum=0.99, eps=1e-5):
        return cls(np.ones(n), np.zeros(n), np.zeros(n), np.ones(n), momentum, eps)

    def tensors(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def buffers(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}


def batchnorm_apply(params: BatchNormParams, x, training):
    """Normalise a batch ``(n, features)``.

    In training mode batch statistics are used and the running buffers are
    updated in place; otherwise the running statistics are used.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.gamma.shape[0]:
        raise DimensionError(f"batch norm over {params.gamma.shape[0]} features, got {x.shape[-1]}")
    if training:
        if x.ndim != 2:
            raise DimensionError("training-mode batch norm needs a 2-D batch")
        mean = x.mean(axis=0)
        var = x.var(axis=0)
        n = x.shape[0]
        unbiased = var * n / (n - 1) if n > 1 else var
        m = params.momentum
        params.running_mean *= m
        params.running_mean += (1.0 - m) * mean
        params.running_var *= m
        params.running_var += (1.0 - m) * unbiased
    else:
        mean = params.running_mean
        var = params.running_var
    inv_std = 1.0 / np.sqrt(var + params.eps)
    xhat = (x - mean) * inv_std
    y = params.gamma * xhat + params.beta
    return y, (xhat, inv_std, training)


def batchnorm_backward(params: BatchNormParams, cache, dy):
    xhat, inv_std, training = cache
    dy = np.asarray(dy, dtype=np.float64)
    if dy.ndim == 1:
        dgamma = dy * xhat
        dbeta = dy.copy()
    else:
        dgamma = (dy * xhat).sum(axis=0)
        dbeta = dy.sum(axis=0)
    dxhat = dy * params.gamma
    if training:
        n = dy.shape[0]
        dx = inv_std / n * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    else:
        dx = dxhat * inv_std
    return dx, {"gamma": dgamma, "beta": dbeta}
