"""LSTM cell with explicit backpropagation through time."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError
from .activations import sigmoid

GATES = ("input", "forget", "output", "candidate")


@dataclass
class LstmParams:
    """Gate blocks stacked as ``weights[g]`` of shape ``(H, H + I)``.

    Each block multiplies the concatenation ``[hidden, input]``; gate order
    follows :data:`GATES`.
    """

    weights: np.ndarray  # (4, H, H + I)
    bias: np.ndarray  # (4, H)

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.weights.ndim != 3 or self.weights.shape[0] != 4:
            raise DimensionError(f"LSTM weights must be (4, H, H+I), got {self.weights.shape}")
        h = self.weights.shape[1]
        if self.weights.shape[2] <= h or self.bias.shape != (4, h):
            raise DimensionError("LSTM gate blocks disagree on hidden/input sizes")

    @classmethod
    def init(cls, n_input, n_hidden, rng, forget_bias=1.0):
        limit = 1.0 / np.sqrt(n_hidden + n_input)
        w = rng.uniform(-limit, limit, size=(4, n_hidden, n_hidden + n_input))
        b = np.zeros((4, n_hidden))
        b[1] = forget_bias
        return cls(w, b)

    @property
    def hidden_size(self):
        return self.weights.shape[1]

    @property
    def input_size(self):
        return self.weights.shape[2] - self.weights.shape[1]

    def gate(self, name):
        return self.weights[GATES.index(name)], self.bias[GATES.index(name)]

    def tensors(self):
        return {"weights": self.weights, "bias": self.bias}


@dataclass
class LstmState:
    hidden: np.ndarray
    cell: np.ndarray

    @classmethod
    def zeros(cls, n_hidden, batch=None):
        shape = (n_hidden,) if batch is None else (batch, n_hidden)
        return cls(np.zeros(shape), np.zeros(shape))


def lstm_step(params: LstmParams, state: LstmState, x):
    """One recurrence step. Returns ``(new_state, hidden, cache)``."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[-1] != params.input_size:
        raise DimensionError(f"LSTM expects input size {params.input_size}, got {x.shape[-1]}")
    if state.hidden.shape[-1] != params.hidden_size:
        raise DimensionError("LSTM state does not match hidden size")
    H = params.hidden_size
    hx = np.concatenate([state.hidden, x], axis=-1)
    z = hx @ params.weights.reshape(4 * H, -1).T + params.bias.reshape(-1)
    z = z.reshape(z.shape[:-1] + (4, H))
    ifo = sigmoid(z[..., :3, :])
    g = np.tanh(z[..., 3, :])
    i, f, o = ifo[..., 0, :], ifo[..., 1, :], ifo[..., 2, :]
    cell = f * state.cell + i * g
    tc = np.tanh(cell)
    hidden = o * tc
    cache = (hx, state.cell, i, f, o, g, tc)
    return LstmState(hidden, cell), hidden, cache


def lstm_step_backward(params: LstmParams, cache, dhidden, dcell):
    """Backward through one step given gradients wrt the step's outputs.

    Returns ``(dx, dhidden_prev, dcell_prev, grads)``.
    """
    hx, cell_prev, i, f, o, g, tc = cache
    H = params.hidden_size
    do = dhidden * tc
    dc = dcell + dhidden * o * (1.0 - tc * tc)
    dz = np.stack(
        [
            dc * g * i * (1.0 - i),
            dc * cell_prev * f * (1.0 - f),
            do * o * (1.0 - o),
            dc * i * (1.0 - g * g),
        ],
        axis=-2,
    )
    dz2 = dz.reshape(-1, 4 * H)
    hx2 = hx.reshape(-1, hx.shape[-1])
    dw = (dz2.T @ hx2).reshape(params.weights.shape)
    db = dz2.sum(axis=0).reshape(4, H)
    dhx = dz.reshape(dz.shape[:-2] + (4 * H,)) @ params.weights.reshape(4 * H, -1)
    return dhx[..., H:], dhx[..., :H], dc * f, {"weights": dw, "bias": db}


def lstm_sequence(params: LstmParams, xs, state=None):
    """Run the cell over ``xs`` of shape ``(..., K, I)`` from a zero state.

    Returns ``(hiddens (..., K, H), caches)``.
    """
    xs = np.asarray(xs, dtype=np.float64)
    lead = xs.shape[:-2]
    if state is None:
        state = LstmState(np.zeros(lead + (params.hidden_size,)), np.zeros(lead + (params.hidden_size,)))
    hiddens, caches = [], []
    for k in range(xs.shape[-2]):
        state, h, cache = lstm_step(params, state, xs[..., k, :])
        hiddens.append(h)
        caches.append(cache)
    return np.stack(hiddens, axis=-2), caches


def lstm_sequence_backward(params: LstmParams, caches, dhiddens):
    """BPTT for :func:`lstm_sequence`; ``dhiddens`` has shape ``(..., K, H)``."""
    dhiddens = np.asarray(dhiddens, dtype=np.float64)
    grads = {"weights": np.zeros_like(params.weights), "bias": np.zeros_like(params.bias)}
    dh_next = np.zeros(dhiddens.shape[:-2] + (params.hidden_size,))
    dc_next = np.zeros_like(dh_next)
    dxs = [None] * len(caches)
    for k in reversed(range(len(caches))):
        dx, dh_next, dc_next, g = lstm_step_backward(
            params, caches[k], dhiddens[..., k, :] + dh_next, dc_next
        )
        dxs[k] = dx
        grads["weights"] += g["weights"]
        grads["bias"] += g["bias"]
    return np.stack(dxs, axis=-2), grads
