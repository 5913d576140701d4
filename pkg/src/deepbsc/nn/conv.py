"""Same-padded 2-D and 1-D convolutions (cross-correlation, as in DL frameworks)."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from .activations import activate, activate_backward


@dataclass
class ConvParams:
    filters: np.ndarray  # (n_filters, k_h, k_w)
    bias: np.ndarray  # (n_filters,)
    kind: str = "2d"

    def __post_init__(self):
        self.filters = np.asarray(self.filters, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.kind not in ("2d", "1d"):
            raise DimensionError(f"unknown convolution kind {self.kind!r}")
        if self.filters.ndim != 3 or self.filters.shape[0] < 1:
            raise DimensionError(f"filters must be (n_filters, k_h, k_w), got {self.filters.shape}")
        if self.bias.shape != (self.filters.shape[0],):
            raise DimensionError("one bias per filter required")
        if self.kind == "1d" and self.filters.shape[1] != 1:
            raise DimensionError("1-D filters must have k_h = 1")

    @classmethod
    def init(cls, n_filters, kernel, rng, kind="2d"):
        kh, kw = kernel
        limit = 1.0 / np.sqrt(kh * kw)
        return cls(
            rng.uniform(-limit, limit, size=(n_filters, kh, kw)),
            rng.uniform(-limit, limit, size=n_filters),
            kind,
        )

    @property
    def n_filters(self):
        return self.filters.shape[0]

    def tensors(self):
        return {"filters": self.filters, "bias": self.bias}


def _check_kernel(params, height, width):
    f, kh, kw = params.filters.shape
    if kh % 2 == 0 or kw % 2 == 0:
        raise DimensionError(f"same padding needs odd kernel sizes, got {kh}x{kw}")
    # padded extent is height + kh - 1, so this is the only way the kernel overhangs
    if height < 1 or width < 1:
        raise DimensionError(f"kernel {kh}x{kw} larger than padded input {height}x{width}")


def _patches(x, kh, kw):
    """Stack of shifted views of the zero-padded input: (..., kh*kw, H, W)."""
    h, w = x.shape[-2:]
    ph, pw = kh // 2, kw // 2
    pad = [(0, 0)] * (x.ndim - 2) + [(ph, ph), (pw, pw)]
    xp = np.pad(x, pad)
    return np.stack(
        [xp[..., a : a + h, b : b + w] for a in range(kh) for b in range(kw)], axis=-3
    )


def _conv_forward(params, x, activation):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise DimensionError("convolution input needs at least two dimensions")
    f, kh, kw = params.filters.shape
    _check_kernel(params, *x.shape[-2:])
    patches = _patches(x, kh, kw)
    z = np.einsum("fp,...pxy->...fxy", params.filters.reshape(f, -1), patches, optimize=True)
    z += params.bias[:, None, None]
    y = activate(z, activation)
    return y, (x.shape, patches, z, y, activation)


def _conv_backward(params, cache, dy):
    x_shape, patches, z, y, activation = cache
    f, kh, kw = params.filters.shape
    dz = activate_backward(np.asarray(dy, dtype=np.float64), z, y, activation)
    lead = tuple(range(dz.ndim - 3))
    dfilters = np.einsum("...fxy,...pxy->fp", dz, patches, optimize=True).reshape(f, kh, kw)
    dbias = dz.sum(axis=lead + (dz.ndim - 2, dz.ndim - 1))
    dpatches = np.einsum("fp,...fxy->...pxy", params.filters.reshape(f, -1), dz, optimize=True)
    h, w = x_shape[-2:]
    ph, pw = kh // 2, kw // 2
    dxp = np.zeros(x_shape[:-2] + (h + 2 * ph, w + 2 * pw))
    p = 0
    for a in range(kh):
        for b in range(kw):
            dxp[..., a : a + h, b : b + w] += dpatches[..., p, :, :]
            p += 1
    dx = dxp[..., ph : ph + h, pw : pw + w]
    return dx, {"filters": dfilters, "bias": dbias}


def conv2d_apply(params: ConvParams, grid, activation="relu"):
    """Convolve ``grid`` ``(..., X, Y)`` into ``(..., n_filters, X, Y)``.

    Zero padding keeps the spatial size. Returns ``(output, cache)``.
    """
    if params.kind != "2d":
        raise DimensionError("conv2d_apply needs 2-D filters")
    return _conv_forward(params, grid, activation)


def conv2d_backward(params: ConvParams, cache, dout):
    return _conv_backward(params, cache, dout)


def conv1d_apply(params: ConvParams, rows, activation="relu"):
    """Convolve every row of ``rows`` ``(..., N, L)`` along its last axis."""
    if params.kind != "1d":
        raise DimensionError("conv1d_apply needs 1-D filters")
    return _conv_forward(params, rows, activation)


def conv1d_backward(params: ConvParams, cache, dout):
    return _conv_backward(params, cache, dout)
