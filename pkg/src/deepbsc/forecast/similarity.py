"""Cosine similarity between grids' recent traffic histories."""
from __future__ import annotations

import numpy as np

from ..errors import ArgumentError


def build_similarity_graph(window, flat=False):
    """``A[i, j]`` = cosine similarity of grid ``i`` and ``j`` over the window.

    ``window`` is ``(..., K, X, Y)``, or ``(..., K, N)`` with ``flat=True``;
    leading axes batch independent windows. All-zero histories get
    similarity 0 everywhere, their own diagonal entry included.
    """
    w = np.asarray(window, dtype=np.float64)
    if not flat:
        if w.ndim < 3:
            raise ArgumentError("expected (..., K, X, Y) frames")
        w = w.reshape(w.shape[:-2] + (-1,))
    if w.ndim < 2 or w.shape[-2] < 1:
        raise ArgumentError("similarity needs at least one frame")
    return _cosine(w)


def _cosine(h):
    """``h`` is ``(..., K, N)``; returns ``(..., N, N)``."""
    norm = np.sqrt(np.einsum("...kn,...kn->...n", h, h))
    gram = np.einsum("...kn,...km->...nm", h, h)
    safe = np.where(norm > 0, norm, 1.0)
    a = gram / (safe[..., :, None] * safe[..., None, :])
    zero = norm == 0
    a = np.where(zero[..., :, None] | zero[..., None, :], 0.0, a)
    # the diagonal of a nonzero history is exactly one
    n = a.shape[-1]
    diag = np.where(zero, 0.0, 1.0)
    a[..., np.arange(n), np.arange(n)] = diag
    return np.clip((a + np.swapaxes(a, -1, -2)) / 2.0, -1.0, 1.0)
