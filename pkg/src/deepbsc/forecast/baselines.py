"""Reference forecasts: same-slot historical mean and last-value persistence."""
from __future__ import annotations

import numpy as np

from ..errors import ArgumentError
from ..traffic import TrafficFrame, TrafficSeries


def statistical_mean_forecast(train, slot_of_day, slots_per_day=48):
    """Per-grid mean of the training frames at ``slot_of_day``.

    ``train`` is a :class:`TrafficSeries` (its start slot fixes the phase) or
    a ``(T, X, Y)`` array starting at slot 0 of a day.
    """
    if isinstance(train, TrafficSeries):
        values, start, slots_per_day = train.values, train.start_slot, train.slots_per_day
    else:
        values, start = np.asarray(train, dtype=np.float64), 0
    if values.ndim != 3 or len(values) == 0:
        raise ArgumentError("statistical mean needs a non-empty (T, X, Y) training series")
    if len(values) < slots_per_day:
        raise ArgumentError("statistical mean needs at least one full day of training data")
    phase = (start + np.arange(len(values))) % slots_per_day
    picked = values[phase == slot_of_day % slots_per_day]
    return TrafficFrame(picked.mean(axis=0), slot=int(slot_of_day))


def persistence_forecast(history):
    values = history.values if isinstance(history, TrafficSeries) else np.asarray(history, dtype=np.float64)
    if values.ndim != 3 or len(values) == 0:
        raise ArgumentError("persistence needs a non-empty history")
    return TrafficFrame(values[-1], slot=len(values))
