"""Grid traffic frames and series, scaling and windowing."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from ..errors import ArgumentError, DimensionError, ScalerError


def _frozen(a):
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class TrafficFrame:
    values: np.ndarray  # (X, Y)
    slot: int = 0

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 2:
            raise DimensionError(f"a frame is a 2-D grid, got shape {v.shape}")
        if not np.all(np.isfinite(v)) or (v < 0).any():
            raise ArgumentError("traffic values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    @property
    def shape(self):
        return self.values.shape


@dataclass(frozen=True)
class TrafficSeries:
    """Consecutive frames ``values[t, gx, gy]`` starting at ``start_slot``."""

    values: np.ndarray  # (T, X, Y)
    start_slot: int = 0
    slot_minutes: int = 30

    def __post_init__(self):
        v = _frozen(self.values)
        if v.ndim != 3:
            raise DimensionError(f"a series is (T, X, Y), got shape {v.shape}")
        if not np.all(np.isfinite(v)) or (v < 0).any():
            raise ArgumentError("traffic values must be finite and non-negative")
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.shape[0]

    @property
    def grid_shape(self):
        return self.values.shape[1:]

    @property
    def slots(self):
        return np.arange(self.start_slot, self.start_slot + len(self))

    def frame(self, i):
        return TrafficFrame(self.values[i], self.start_slot + i)

    def flat(self):
        return self.values.reshape(len(self), -1)

    def slice(self, start, stop=None):
        stop = len(self) if stop is None else stop
        return TrafficSeries(self.values[start:stop], self.start_slot + start, self.slot_minutes)

    @property
    def slots_per_day(self):
        return (24 * 60) // self.slot_minutes

    def to_csv(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["slot", "gx", "gy", "value"])
            for t, slot in enumerate(self.slots):
                for gx in range(self.values.shape[1]):
                    for gy in range(self.values.shape[2]):
                        w.writerow([slot, gx, gy, repr(float(self.values[t, gx, gy]))])
        return path

    @classmethod
    def from_csv(cls, path, slot_minutes=30):
        rows = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        slots = rows[:, 0].astype(int)
        gx = rows[:, 1].astype(int)
        gy = rows[:, 2].astype(int)
        start = slots.min()
        out = np.zeros((slots.max() - start + 1, gx.max() + 1, gy.max() + 1))
        out[slots - start, gx, gy] = rows[:, 3]
        return cls(out, int(start), slot_minutes)


@dataclass(frozen=True)
class Scaler:
    """Divide-by-max scaling fitted on training data."""

    max: float
    method: str = "max"

    def __post_init__(self):
        if not (self.max > 0 and np.isfinite(self.max)):
            raise ScalerError(f"scaler max must be positive, got {self.max}")

    @classmethod
    def fit(cls, values):
        m = float(np.max(values)) if np.size(values) else 0.0
        if m <= 0:
            raise ScalerError("cannot fit a scaler to an all-zero series")
        return cls(m)

    def transform(self, values):
        return np.asarray(values, dtype=np.float64) / self.max

    def inverse(self, values):
        return np.asarray(values, dtype=np.float64) * self.max


def normalize(series, scaler=None):
    """Scale a series (or array) into [0, 1] by the training max.

    Values above 1 are kept as-is when a pre-fitted scaler meets larger test
    traffic. Returns ``(normalized, scaler)``.
    """
    values = series.values if isinstance(series, TrafficSeries) else np.asarray(series, dtype=np.float64)
    if values.size == 0:
        raise ArgumentError("cannot normalise an empty series")
    if scaler is None:
        scaler = Scaler.fit(values)
    out = scaler.transform(values)
    if isinstance(series, TrafficSeries):
        out = TrafficSeries(out, series.start_slot, series.slot_minutes)
    return out, scaler


def denormalize(values, scaler):
    if isinstance(values, TrafficSeries):
        return TrafficSeries(scaler.inverse(values.values), values.start_slot, values.slot_minutes)
    return scaler.inverse(values)


class Windows(NamedTuple):
    inputs: np.ndarray  # (S, K, X, Y)
    targets: np.ndarray  # (S, X, Y)
    target_index: np.ndarray  # (S,) position of each target within the series


def make_windows(series, K):
    """All stride-1 windows of ``K`` frames with the following frame as target."""
    values = series.values if isinstance(series, TrafficSeries) else np.asarray(series, dtype=np.float64)
    T = values.shape[0]
    if K < 1 or T <= K:
        raise ArgumentError(f"series of length {T} too short for window {K}")
    view = np.lib.stride_tricks.sliding_window_view(values[:-1], K, axis=0)
    inputs = np.moveaxis(view, -1, 1).copy()
    return Windows(inputs, values[K:].copy(), np.arange(K, T))
