"""Seeded synthetic grid traffic with diurnal cycles, hotspots and distant look-alike grids."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError
from .series import TrafficSeries


@dataclass(frozen=True)
class Hotspot:
    x: float
    y: float
    intensity: float
    width: float = 1.0


@dataclass(frozen=True)
class SemanticPair:
    """Two grids, usually far apart, that share one extra periodic pattern."""

    a: tuple
    b: tuple
    amplitude: float
    period: float = 16.0
    phase: float = 0.0


@dataclass(frozen=True)
class SyntheticConfig:
    grid_shape: tuple = (10, 10)
    days: int = 30
    slots_per_day: int = 48
    base: float = 50.0
    amplitude: float = 30.0
    phase_spread: float = 0.5
    hotspots: tuple = ()
    semantic_pairs: tuple = ()
    noise_std: float = 3.0
    noise_clip: float = 3.0  # truncation in units of noise_std
    day_scale_std: float = 0.0
    seed: int = 0

    def validate(self):
        if self.amplitude >= self.base and self.amplitude > 0:
            raise ArgumentError("diurnal amplitude must stay below the base level")
        if self.base < 0 or self.noise_std < 0 or self.day_scale_std < 0:
            raise ArgumentError("base, noise and day-scale spreads must be non-negative")
        if self.days < 1 or self.slots_per_day < 1:
            raise ArgumentError("need at least one day of at least one slot")
        X, Y = self.grid_shape
        for p in self.semantic_pairs:
            for gx, gy in (p.a, p.b):
                if not (0 <= gx < X and 0 <= gy < Y):
                    raise ArgumentError(f"semantic pair grid {(gx, gy)} outside {self.grid_shape}")
        return self


def _grid_phases(config, rng):
    n = config.grid_shape[0] * config.grid_shape[1]
    return rng.uniform(-config.phase_spread, config.phase_spread, size=n).reshape(config.grid_shape)


def synthetic_mean(config, rng=None):
    """Noise-free expected traffic ``(T, X, Y)``; draws the same seeded grid phases as the generator."""
    config.validate()
    if rng is None:
        rng = np.random.default_rng(config.seed)
    X, Y = config.grid_shape
    T = config.days * config.slots_per_day
    t = np.arange(T, dtype=np.float64)[:, None, None]
    phases = _grid_phases(config, rng)
    diurnal = np.sin(2 * np.pi * t / config.slots_per_day + phases)
    mean = config.base + config.amplitude * diurnal
    gx, gy = np.meshgrid(np.arange(X), np.arange(Y), indexing="ij")
    for h in config.hotspots:
        bump = h.intensity * np.exp(-((gx - h.x) ** 2 + (gy - h.y) ** 2) / (2 * h.width**2))
        # busy areas peak with the daily cycle
        mean = mean + bump * (0.5 + 0.5 * diurnal)
    for p in config.semantic_pairs:
        pattern = p.amplitude * (0.5 + 0.5 * np.sin(2 * np.pi * t[:, 0, 0] / p.period + p.phase))
        for g in (p.a, p.b):
            mean[:, g[0], g[1]] += pattern
    scale = np.ones(config.days)
    if config.day_scale_std > 0:
        scale = np.clip(1.0 + config.day_scale_std * rng.standard_normal(config.days), 0.1, None)
    return mean * np.repeat(scale, config.slots_per_day)[:, None, None]


def _truncated_normal(rng, shape, clip):
    z = rng.standard_normal(shape)
    bad = np.abs(z) > clip
    while bad.any():
        z[bad] = rng.standard_normal(int(bad.sum()))
        bad = np.abs(z) > clip
    return z


def gen_synthetic(config: SyntheticConfig) -> TrafficSeries:
    """Draw a traffic series; the config (seed included) fully determines it."""
    rng = np.random.default_rng(config.seed)
    mean = synthetic_mean(config, rng)
    if config.noise_std > 0:
        mean = mean + config.noise_std * _truncated_normal(rng, mean.shape, config.noise_clip)
    return TrafficSeries(np.clip(mean, 0.0, None), 0, (24 * 60) // config.slots_per_day)


def semantic_pair_config(seed=0, grid_shape=(10, 10), days=30, n_pairs=6, **overrides):
    """The forecasting benchmark: two hotspots plus look-alike pairs on opposite sides of the grid."""
    rng = np.random.default_rng([seed, 7919])
    X, Y = grid_shape
    pairs = []
    for k in range(n_pairs):
        a = (int(rng.integers(0, max(1, X // 3))), int(rng.integers(0, Y)))
        b = (int(rng.integers(X - max(1, X // 3), X)), int(rng.integers(0, Y)))
        pairs.append(
            SemanticPair(a, b, amplitude=float(rng.uniform(20, 40)), period=float(rng.choice([12.0, 16.0, 24.0])),
                         phase=float(rng.uniform(0, 2 * np.pi)))
        )
    hotspots = (
        Hotspot(X * 0.45, Y * 0.5, 60.0, max(1.0, X / 6)),
        Hotspot(X * 0.7, Y * 0.25, 35.0, max(0.8, X / 8)),
    )
    params = dict(
        grid_shape=tuple(grid_shape),
        days=days,
        base=40.0,
        amplitude=30.0,
        hotspots=hotspots,
        semantic_pairs=tuple(pairs),
        noise_std=4.0,
        day_scale_std=0.1,
        seed=seed,
    )
    params.update(overrides)
    return SyntheticConfig(**params).validate()
