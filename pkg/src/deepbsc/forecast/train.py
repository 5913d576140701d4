"""Training, inference, evaluation reports and checkpoints for the forecaster."""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, TrainingError
from ..nn import AdamState, adam_step, load_checkpoint, save_checkpoint
from ..nn.checkpoint import restore
from ..traffic import Scaler, TrafficFrame, TrafficSeries, make_windows, nmae, nrmse
from .model import GsStnModel, backward, forward


def train(model: GsStnModel, inputs, targets, epochs, batch_size=32, lr=1e-3, seed=0, val=None, log=None):
    """Minimise the mean squared error on normalised targets with Adam.

    Returns one loss per epoch: the mean over samples of each sample's MSE,
    measured on the batch pass that visited it (so it does not depend on
    the shuffle order). With ``val = (inputs, targets)`` the parameters of
    the epoch with the lowest validation MSE are restored at the end.
    """
    inputs = np.asarray(inputs, dtype=np.float64)
    targets = np.asarray(targets, dtype=np.float64)
    S = len(inputs)
    if S == 0 or len(targets) != S:
        raise ArgumentError("training needs matching, non-empty inputs and targets")
    targets = targets.reshape(S, -1)
    rng = np.random.default_rng(seed)
    params = model.params()
    state = AdamState.for_params(params)
    trace = []
    best, best_params = np.inf, None
    for epoch in range(epochs):
        order = rng.permutation(S)
        per_sample = np.zeros(S)
        for start in range(0, S, batch_size):
            idx = order[start : start + batch_size]
            pred, cache = forward(model, inputs[idx])
            err = pred - targets[idx]
            per_sample[idx] = (err * err).mean(axis=1)
            dpred = 2.0 * err / err.size
            adam_step(params, backward(model, cache, dpred), state, lr)
        loss = float(per_sample.mean())
        if not np.isfinite(loss):
            raise TrainingError(f"loss diverged at epoch {epoch}")
        trace.append(loss)
        val_loss = None
        if val is not None:
            val_pred = predict(model, val[0])
            val_loss = float(((val_pred - np.reshape(val[1], val_pred.shape)) ** 2).mean())
            if val_loss < best:
                best, best_params = val_loss, {k: v.copy() for k, v in params.items()}
        if log is not None:
            log(epoch, loss, val_loss)
    if best_params is not None:
        for k, v in params.items():
            v[...] = best_params[k]
    return trace


def predict(model, windows, batch_size=256):
    """Batched forward pass without caches kept around; ``(S, N)``."""
    windows = np.asarray(windows, dtype=np.float64)
    return np.concatenate([forward(model, windows[s : s + batch_size])[0] for s in range(0, len(windows), batch_size)])


def predict_next(model, scaler, history):
    """Forecast the frame after a raw ``(T, X, Y)`` history with ``T >= K``."""
    values = history.values if isinstance(history, TrafficSeries) else np.asarray(history, dtype=np.float64)
    if values.ndim != 3 or len(values) < model.K:
        raise ArgumentError(f"need at least K={model.K} frames of history")
    pred, _ = forward(model, scaler.transform(values[-model.K :]))
    return TrafficFrame(scaler.inverse(pred).reshape(model.grid_shape), slot=len(values))


@dataclass(frozen=True)
class ForecastReport:
    """Predictions against the truth for consecutive target slots.

    Per-slot errors share the evaluation-set mean as their normaliser, so the
    aggregate NMAE is the mean of per-slot NMAE and the aggregate NRMSE is the
    root-mean-square of per-slot NRMSE.
    """

    slots: np.ndarray  # (S,)
    pred: np.ndarray  # (S, X, Y)
    truth: np.ndarray  # (S, X, Y)

    @property
    def d_bar(self):
        return float(np.mean(self.truth))

    @property
    def per_slot_nmae(self):
        return np.array([nmae(p, t, self.d_bar) for p, t in zip(self.pred, self.truth)])

    @property
    def per_slot_nrmse(self):
        return np.array([nrmse(p, t, self.d_bar) for p, t in zip(self.pred, self.truth)])

    @property
    def nmae(self):
        return nmae(self.pred, self.truth)

    @property
    def nrmse(self):
        return nrmse(self.pred, self.truth)

    def summary(self):
        return {"nmae": self.nmae, "nrmse": self.nrmse, "slots": int(len(self.slots))}

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["slot", "gx", "gy", "pred", "truth"])
            for s, p, t in zip(self.slots, self.pred, self.truth):
                for (gx, gy), v in np.ndenumerate(p):
                    out.writerow([int(s), gx, gy, repr(float(v)), repr(float(t[gx, gy]))])
        return path

    def to_json(self, path):
        path = Path(path)
        path.write_text(json.dumps(self.summary(), indent=2, sort_keys=True))
        return path

    @classmethod
    def from_csv(cls, path, grid_shape):
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        slots = np.unique(rows[:, 0]).astype(int)
        pred = np.zeros((len(slots),) + tuple(grid_shape))
        truth = np.zeros_like(pred)
        pos = np.searchsorted(slots, rows[:, 0].astype(int))
        gx, gy = rows[:, 1].astype(int), rows[:, 2].astype(int)
        pred[pos, gx, gy] = rows[:, 3]
        truth[pos, gx, gy] = rows[:, 4]
        return cls(slots, pred, truth)


def evaluate(model, scaler, windows, targets, slots):
    """Denormalised forecast report over normalised ``windows`` and raw ``targets``."""
    pred = scaler.inverse(predict(model, windows)).reshape(np.shape(targets))
    return ForecastReport(np.asarray(slots), pred, np.asarray(targets, dtype=np.float64))


def save_model(model, path):
    tensors = dict(model.params())
    tensors["meta.shape"] = np.array([*model.grid_shape, model.K, model.lstm_geo.hidden_size,
                                      model.geo.n_filters, float(model.semantic)])
    if model.graph is not None:
        tensors["meta.graph"] = model.graph
    return save_checkpoint(path, tensors)


def load_model(path):
    tensors = load_checkpoint(path)
    X, Y, K, H, F, semantic = (int(v) for v in tensors["meta.shape"])
    model = GsStnModel.init((X, Y), np.random.default_rng(0), K=K, hidden=H, n_filters=F, semantic=bool(semantic))
    restore(model.params(), tensors)
    if "meta.graph" in tensors:
        model.graph = tensors["meta.graph"]
        model.graph_mode = "fixed"
    return model


@dataclass(frozen=True)
class ForecastData:
    scaler: object
    train_inputs: np.ndarray  # normalised (S, K, X, Y)
    train_targets: np.ndarray  # normalised (S, X, Y)
    test_inputs: np.ndarray
    test_targets: np.ndarray  # raw (S, X, Y)
    test_slots: np.ndarray


def prepare(series, K, train_slots):
    """Fit the scaler on the first ``train_slots`` frames and window both parts.

    Test windows may reach back into the training period for their inputs;
    only their targets lie after it.
    """
    values = series.values if isinstance(series, TrafficSeries) else np.asarray(series, dtype=np.float64)
    start = series.start_slot if isinstance(series, TrafficSeries) else 0
    if not K < train_slots < len(values):
        raise ArgumentError("training part must exceed K and leave test frames")
    scaler = Scaler.fit(values[:train_slots])
    norm = scaler.transform(values)
    w = make_windows(norm, K)
    is_train = w.target_index < train_slots
    return ForecastData(
        scaler,
        w.inputs[is_train],
        w.targets[is_train],
        w.inputs[~is_train],
        values[w.target_index[~is_train]],
        start + w.target_index[~is_train],
    )
