"""Benchmark-cost estimation: roll a baseline policy, then regress its cost on the state."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..cellsim import CostParams, EnergyParams, step
from ..errors import ArgumentError, DimensionError, TrainingError
from ..nn import AdamState, Mlp, adam_step, load_checkpoint, save_checkpoint
from ..nn.checkpoint import restore


@dataclass(frozen=True)
class BenchmarkData:
    slots: np.ndarray  # (T,)
    states: np.ndarray  # (T, N + B): predicted frame then previous action
    costs: np.ndarray  # (T,)
    actions: np.ndarray  # (T, B)

    def __len__(self):
        return len(self.costs)

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["slot"] + [f"s_{i}" for i in range(self.states.shape[1])] + ["cost"])
            for slot, s, c in zip(self.slots, self.states, self.costs):
                out.writerow([int(slot)] + [repr(float(v)) for v in s] + [repr(float(c))])
        return path

    @staticmethod
    def concat(parts):
        return BenchmarkData(*(np.concatenate([getattr(p, f) for p in parts])
                               for f in ("slots", "states", "costs", "actions")))


def collect_benchmark_pairs(policy, topology, actual, predicted=None, params=CostParams(), energy=EnergyParams(),
                            prev_action=None, start_slot=0):
    """Run ``policy(frame, prev_action)`` over the series and record ``(state, realised cost)`` per slot.

    Decisions see ``predicted`` frames (the actual ones when omitted); costs are
    charged on ``actual``. The first slot follows an all-active configuration.
    """
    actual = np.asarray(actual, dtype=np.float64).reshape(len(actual), -1)
    predicted = actual if predicted is None else np.asarray(predicted, dtype=np.float64).reshape(actual.shape)
    if len(actual) < 1:
        raise ArgumentError("need at least one slot")
    prev = np.ones(topology.n_bs, dtype=np.int8) if prev_action is None else np.asarray(prev_action, dtype=np.int8)
    states, costs, actions = [], [], []
    for t in range(len(actual)):
        states.append(np.concatenate([predicted[t], prev]))
        action = np.asarray(policy(predicted[t], prev), dtype=np.int8)
        cost, _ = step(prev, action, actual[t], topology, params, energy)
        costs.append(cost.total)
        actions.append(action)
        prev = action
    return BenchmarkData(start_slot + np.arange(len(actual)), np.array(states), np.array(costs), np.array(actions))


class BaseDnn:
    """State -> expected baseline cost: standardised inputs, two relu layers, linear output."""

    def __init__(self, n_in, rng, hidden=(256, 128)):
        self.net = Mlp(n_in, [(h, "relu", False) for h in hidden] + [(1, "linear", False)], rng)
        self.x_mean = np.zeros(n_in)
        self.x_std = np.ones(n_in)
        self.y_mean = np.zeros(1)
        self.y_std = np.ones(1)
        self.train_mae = np.full(1, np.nan)

    @property
    def n_in(self):
        return self.net.n_in

    def fit_scaling(self, states, costs):
        self.x_mean = states.mean(axis=0)
        std = states.std(axis=0)
        self.x_std = np.where(std > 1e-12, std, 1.0)
        self.y_mean = np.array([costs.mean()])
        self.y_std = np.array([max(costs.std(), 1e-12 * max(1.0, abs(costs.mean())), 1e-12)])

    def _inputs(self, states):
        states = np.asarray(states, dtype=np.float64)
        if states.shape[-1] != self.n_in:
            raise DimensionError(f"state has {states.shape[-1]} entries, model expects {self.n_in}")
        return (states - self.x_mean) / self.x_std

    def predict(self, states):
        return self.net(self._inputs(states))[..., 0] * self.y_std[0] + self.y_mean[0]

    def tensors(self):
        out = {f"net.{k}": v for k, v in self.net.params().items()}
        out.update({"x_mean": self.x_mean, "x_std": self.x_std, "y_mean": self.y_mean, "y_std": self.y_std,
                    "train_mae": self.train_mae})
        return out

    def save(self, path):
        return save_checkpoint(path, {**self.tensors(), "meta.hidden": np.array([d.n_out for d in self.net.dense[:-1]], float)})

    @classmethod
    def load(cls, path):
        tensors = load_checkpoint(path)
        hidden = tuple(int(h) for h in tensors["meta.hidden"])
        model = cls(len(tensors["x_mean"]), np.random.default_rng(0), hidden)
        restore(model.tensors(), tensors)
        return model


def train_base_dnn(data, epochs=200, lr=1e-3, batch_size=64, seed=0, hidden=(256, 128)):
    """Fit a :class:`BaseDnn` by MSE on standardised costs; deterministic for a seed."""
    states = np.asarray(data.states, dtype=np.float64)
    costs = np.asarray(data.costs, dtype=np.float64)
    if len(costs) == 0:
        raise ArgumentError("empty benchmark dataset")
    rng = np.random.default_rng(seed)
    model = BaseDnn(states.shape[1], rng, hidden)
    model.fit_scaling(states, costs)
    x = model._inputs(states)
    y = ((costs - model.y_mean[0]) / model.y_std[0])[:, None]
    params = model.net.params()
    adam = AdamState.for_params(params)
    for _ in range(epochs):
        order = rng.permutation(len(y))
        for start in range(0, len(y), batch_size):
            idx = order[start : start + batch_size]
            out, caches = model.net.forward(x[idx], training=True)
            err = out - y[idx]
            if not np.all(np.isfinite(err)):
                raise TrainingError("benchmark regression diverged")
            _, grads = model.net.backward(caches, 2.0 * err / len(idx))
            adam_step(params, grads, adam, lr)
    model.train_mae[0] = float(np.abs(model.predict(states) - costs).mean())
    return model


def predict_benchmark(model, state):
    """Benchmark cost of one state (scalar) or a batch of states."""
    out = model.predict(state)
    return float(out) if np.ndim(out) == 0 else out
