"""Additive attention pooling over a sequence of hidden states."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError, DimensionError


@dataclass
class AttentionParams:
    score: np.ndarray  # (H,)
    projection: np.ndarray | None = None  # (H, H)

    @classmethod
    def init(cls, n_hidden, rng, projection=False):
        limit = 1.0 / np.sqrt(n_hidden)
        proj = rng.uniform(-limit, limit, size=(n_hidden, n_hidden)) if projection else None
        return cls(rng.uniform(-limit, limit, size=n_hidden), proj)

    def tensors(self):
        out = {"score": self.score}
        if self.projection is not None:
            out["projection"] = self.projection
        return out


def softmax(e, axis=-1):
    z = e - e.max(axis=axis, keepdims=True)
    w = np.exp(z)
    return w / w.sum(axis=axis, keepdims=True)


def attention_pool(params: AttentionParams, hiddens):
    """Score ``e_k = v . tanh(P h_k)`` (``P`` = identity when absent), softmax, weighted sum.

    ``hiddens`` is ``(..., K, H)``. Returns ``(pooled (..., H), weights (..., K), cache)``.
    """
    hiddens = np.asarray(hiddens, dtype=np.float64)
    if hiddens.ndim < 2 or hiddens.shape[-2] < 1:
        raise ArgumentError("attention needs a non-empty sequence")
    if hiddens.shape[-1] != params.score.shape[0]:
        raise DimensionError("attention score vector does not match hidden size")
    pre = hiddens if params.projection is None else hiddens @ params.projection.T
    u = np.tanh(pre)
    e = u @ params.score
    w = softmax(e)
    pooled = np.einsum("...k,...kh->...h", w, hiddens)
    return pooled, w, (hiddens, u, w)


def attention_backward(params: AttentionParams, cache, dpooled):
    hiddens, u, w = cache
    dpooled = np.asarray(dpooled, dtype=np.float64)
    dh = w[..., :, None] * dpooled[..., None, :]
    dw = np.einsum("...kh,...h->...k", hiddens, dpooled)
    de = w * (dw - (w * dw).sum(axis=-1, keepdims=True))
    u2 = u.reshape(-1, u.shape[-1])
    de2 = de.reshape(-1)
    grads = {"score": de2 @ u2}
    dpre = de[..., None] * params.score * (1.0 - u * u)
    if params.projection is None:
        dh = dh + dpre
    else:
        grads["projection"] = dpre.reshape(-1, u.shape[-1]).T @ hiddens.reshape(-1, u.shape[-1])
        dh = dh + dpre @ params.projection
    return dh, grads
