"""GS-STN: geographic and semantic branches, each an LSTM with attention, fused by a sigmoid head."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, DimensionError
from ..nn import (
    AttentionParams,
    ConvParams,
    DenseParams,
    LstmParams,
    attention_backward,
    attention_pool,
    conv2d_apply,
    conv2d_backward,
    dense_apply,
    dense_backward,
    lstm_sequence,
    lstm_sequence_backward,
)
from .kernels import semantic_backward, semantic_forward
from .similarity import build_similarity_graph


@dataclass
class GsStnModel:
    geo: ConvParams
    sem: ConvParams
    lstm_geo: LstmParams
    lstm_sem: LstmParams
    att_geo: AttentionParams
    att_sem: AttentionParams
    head: DenseParams
    grid_shape: tuple
    K: int = 12
    semantic: bool = True  # False zeroes the semantic branch (geo-only ablation)
    graph_mode: str = "window"  # or "fixed": one similarity graph for every window
    graph: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        self.grid_shape = tuple(int(v) for v in self.grid_shape)
        if self.K < 1:
            raise ArgumentError("window length K must be at least 1")
        if self.graph_mode not in ("window", "fixed"):
            raise ArgumentError(f"unknown graph mode {self.graph_mode!r}")
        if self.head.n_out != self.n_grids:
            raise DimensionError("head output must equal the number of grids")

    @classmethod
    def init(cls, grid_shape, rng, K=12, hidden=48, n_filters=10, semantic=True, graph_mode="window"):
        n = int(np.prod(grid_shape))
        return cls(
            geo=ConvParams.init(n_filters, (3, 3), rng, "2d"),
            sem=ConvParams.init(n_filters, (1, 3), rng, "1d"),
            lstm_geo=LstmParams.init(n, hidden, rng),
            lstm_sem=LstmParams.init(n, hidden, rng),
            att_geo=AttentionParams.init(hidden, rng),
            att_sem=AttentionParams.init(hidden, rng),
            head=DenseParams.init(2 * hidden, n, rng),
            grid_shape=grid_shape,
            K=K,
            semantic=semantic,
            graph_mode=graph_mode,
        )

    @property
    def n_grids(self):
        return self.grid_shape[0] * self.grid_shape[1]

    def params(self):
        """Trainable tensors by dotted name; arrays are the model's own."""
        out = {}
        for prefix in ("geo", "sem", "lstm_geo", "lstm_sem", "att_geo", "att_sem", "head"):
            for name, t in getattr(self, prefix).tensors().items():
                out[f"{prefix}.{name}"] = t
        return out

    def fit_graph(self, values):
        """Fix the similarity graph from a normalised ``(T, X, Y)`` history."""
        self.graph = build_similarity_graph(np.asarray(values, dtype=np.float64))
        self.graph_mode = "fixed"
        return self.graph

    def _graphs(self, windows):
        if self.graph_mode == "fixed":
            if self.graph is None:
                raise ArgumentError("fixed graph mode needs fit_graph first")
            return np.broadcast_to(self.graph, (len(windows),) + self.graph.shape)
        return build_similarity_graph(windows)


def forward(model: GsStnModel, windows):
    """``windows (S, K, X, Y)`` normalised -> predictions ``(S, N)`` in (0, 1) and a cache."""
    w = np.asarray(windows, dtype=np.float64)
    single = w.ndim == 3
    if single:
        w = w[None]
    if w.ndim != 4 or w.shape[1] != model.K or w.shape[2:] != model.grid_shape:
        raise DimensionError(f"expected windows (S, {model.K}, {model.grid_shape[0]}, {model.grid_shape[1]}), got {np.shape(windows)}")
    S, K = w.shape[:2]
    N = model.n_grids
    F = model.geo.n_filters

    maps, geo_cache = conv2d_apply(model.geo, w, "relu")  # (S, K, F, X, Y)
    geo_seq = maps.mean(axis=2).reshape(S, K, N)
    hs_geo, lstm_geo_cache = lstm_sequence(model.lstm_geo, geo_seq)
    h_geo, att_w_geo, att_geo_cache = attention_pool(model.att_geo, hs_geo)

    sem_cache = None
    if model.semantic:
        A = np.ascontiguousarray(model._graphs(w))
        d = np.ascontiguousarray(w.reshape(S, K, N))
        sem_seq = semantic_forward(A, d, model.sem.filters[:, 0, :], model.sem.bias)
        hs_sem, lstm_sem_cache = lstm_sequence(model.lstm_sem, sem_seq)
        h_sem, att_w_sem, att_sem_cache = attention_pool(model.att_sem, hs_sem)
        sem_cache = (A, d, lstm_sem_cache, att_sem_cache)
    else:
        h_sem = np.zeros_like(h_geo)

    fused = np.concatenate([h_geo, h_sem], axis=1)
    pred, head_cache = dense_apply(model.head, fused, "sigmoid")
    cache = (single, F, geo_cache, lstm_geo_cache, att_geo_cache, sem_cache, head_cache, w.shape)
    return (pred[0] if single else pred), cache


def backward(model: GsStnModel, cache, dpred):
    """Parameter gradients given ``dpred`` with the shape of the predictions."""
    single, F, geo_cache, lstm_geo_cache, att_geo_cache, sem_cache, head_cache, shape = cache
    dpred = np.asarray(dpred, dtype=np.float64)
    if single:
        dpred = dpred[None]
    S, K, X, Y = shape
    H = model.lstm_geo.hidden_size
    grads = {}
    dfused, g = dense_backward(model.head, head_cache, dpred)
    _put(grads, "head", g)

    dhs_geo, g = attention_backward(model.att_geo, att_geo_cache, dfused[:, :H])
    _put(grads, "att_geo", g)
    dgeo_seq, g = lstm_sequence_backward(model.lstm_geo, lstm_geo_cache, dhs_geo)
    _put(grads, "lstm_geo", g)
    dmaps = np.broadcast_to((dgeo_seq.reshape(S, K, X, Y) / F)[:, :, None], (S, K, F, X, Y))
    _, g = conv2d_backward(model.geo, geo_cache, dmaps)
    _put(grads, "geo", g)

    if sem_cache is None:
        for name, t in model.params().items():
            grads.setdefault(name, np.zeros_like(t))
        return grads
    A, d, lstm_sem_cache, att_sem_cache = sem_cache
    dhs_sem, g = attention_backward(model.att_sem, att_sem_cache, dfused[:, H:])
    _put(grads, "att_sem", g)
    dsem_seq, g = lstm_sequence_backward(model.lstm_sem, lstm_sem_cache, dhs_sem)
    _put(grads, "lstm_sem", g)
    dw, db = semantic_backward(A, d, model.sem.filters[:, 0, :], model.sem.bias, np.ascontiguousarray(dsem_seq))
    grads["sem.filters"] = dw[:, None, :]
    grads["sem.bias"] = db
    return grads


def _put(grads, prefix, g):
    for name, t in g.items():
        grads[f"{prefix}.{name}"] = t
