"""Fused semantic-branch convolution.

For every window ``n``, slot ``k`` and grid ``i`` the row ``r_j = A[n, i, j] * d[n, k, j]``
is convolved (same padding, cross-correlation) with each 1-D filter, passed
through a ReLU and averaged over filters and positions. Materialising the
``(batch, K, F, N, N)`` intermediate is what makes the plain array version
slow, so these loops never store it and the backward pass recomputes it.
"""
from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True, fastmath=True)
def _fill_row(row, A, d, n, k, i, half):
    N = d.shape[2]
    for j in range(N):
        row[j + half] = A[n, i, j] * d[n, k, j]


@numba.njit(cache=True, fastmath=True)
def _preact(z, row, w, b, f):
    N = z.shape[0]
    for j in range(N):
        z[j] = b[f]
    for t in range(w.shape[1]):
        wt = w[f, t]
        for j in range(N):
            z[j] += wt * row[j + t]


@numba.njit(cache=True, fastmath=True)
def _relu_sum3(row, w0, w1, w2, bf, N):
    # the common 1x3 filter, fused and unrolled so the loop vectorises
    acc = 0.0
    for j in range(N):
        acc += max(bf + w0 * row[j] + w1 * row[j + 1] + w2 * row[j + 2], 0.0)
    return acc


@numba.njit(cache=True, fastmath=True)
def _relu_grad3(row, w, b, f, N, g, dw, db):
    w0, w1, w2, bf = w[f, 0], w[f, 1], w[f, 2], b[f]
    c = 0.0
    s0 = 0.0
    s1 = 0.0
    s2 = 0.0
    for j in range(N):
        m = 1.0 if bf + w0 * row[j] + w1 * row[j + 1] + w2 * row[j + 2] > 0.0 else 0.0
        c += m
        s0 += m * row[j]
        s1 += m * row[j + 1]
        s2 += m * row[j + 2]
    db[f] += g * c
    dw[f, 0] += g * s0
    dw[f, 1] += g * s1
    dw[f, 2] += g * s2


@numba.njit(cache=True, fastmath=True)
def semantic_forward(A, d, w, b):
    """``A (B, N, N)``, ``d (B, K, N)``, ``w (F, L)``, ``b (F,)`` -> features ``(B, K, N)``."""
    nb, K, N = d.shape
    F, L = w.shape
    half = L // 2
    out = np.zeros((nb, K, N))
    row = np.zeros(N + 2 * half)
    z = np.zeros(N)
    scale = 1.0 / (F * N)
    for n in range(nb):
        for k in range(K):
            for i in range(N):
                _fill_row(row, A, d, n, k, i, half)
                acc = 0.0
                for f in range(F):
                    if L == 3:
                        acc += _relu_sum3(row, w[f, 0], w[f, 1], w[f, 2], b[f], N)
                        continue
                    _preact(z, row, w, b, f)
                    for j in range(N):
                        acc += max(z[j], 0.0)
                out[n, k, i] = acc * scale
    return out


@numba.njit(cache=True, fastmath=True)
def semantic_backward(A, d, w, b, dout):
    """Gradients of the features wrt the filters and biases given ``dout (B, K, N)``."""
    nb, K, N = d.shape
    F, L = w.shape
    half = L // 2
    dw = np.zeros((F, L))
    db = np.zeros(F)
    row = np.zeros(N + 2 * half)
    z = np.zeros(N)
    scale = 1.0 / (F * N)
    for n in range(nb):
        for k in range(K):
            for i in range(N):
                g = dout[n, k, i] * scale
                if g == 0.0:
                    continue
                _fill_row(row, A, d, n, k, i, half)
                for f in range(F):
                    if L == 3:
                        _relu_grad3(row, w, b, f, N, g, dw, db)
                        continue
                    _preact(z, row, w, b, f)
                    count = 0.0
                    for j in range(N):
                        z[j] = 1.0 if z[j] > 0.0 else 0.0
                        count += z[j]
                    db[f] += g * count
                    for t in range(L):
                        s = 0.0
                        for j in range(N):
                            s += z[j] * row[j + t]
                        dw[f, t] += g * s
    return dw, db


def semantic_reference(A, d, w, b):
    """Plain array version of :func:`semantic_forward`, used to cross-check it."""
    rows = A[:, None, :, :] * d[:, :, None, :]  # (B, K, N, N)
    L = w.shape[1]
    half = L // 2
    padded = np.pad(rows, [(0, 0)] * 3 + [(half, half)])
    N = rows.shape[-1]
    z = sum(w[None, None, :, None, None, t] * padded[:, :, None, :, t : t + N] for t in range(L))
    z = z + b[None, None, :, None, None]
    return np.maximum(z, 0.0).mean(axis=(2, 4))
