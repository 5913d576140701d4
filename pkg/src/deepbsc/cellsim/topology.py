"""Base-station placement, coverage and capacities on a grid."""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import ArgumentError, TopologyError

COVER_TOL = 1e-9


def grid_centers(grid_shape):
    nx, ny = grid_shape
    gx, gy = np.meshgrid(np.arange(nx), np.arange(ny), indexing="ij")
    return np.stack([gx.ravel() + 0.5, gy.ravel() + 0.5], axis=1)


@dataclass
class NetworkTopology:
    """``B`` base stations over an ``nx x ny`` grid.

    Grid ``(gx, gy)`` is flattened to ``gx * ny + gy`` and has its centre at
    ``(gx + 0.5, gy + 0.5)``; BS positions use the same coordinates.
    """

    positions: np.ndarray  # (B, 2)
    radius: np.ndarray  # (B,)
    capacity: np.ndarray  # (B,)
    grid_shape: tuple
    dist: np.ndarray = field(init=False)  # (N, B)
    cover: np.ndarray = field(init=False)  # (N, B) bool

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=np.float64).reshape(-1, 2)
        B = len(self.positions)
        self.radius = np.broadcast_to(np.asarray(self.radius, dtype=np.float64), (B,)).copy()
        self.capacity = np.broadcast_to(np.asarray(self.capacity, dtype=np.float64), (B,)).copy()
        self.grid_shape = tuple(int(v) for v in self.grid_shape)
        if (self.capacity <= 0).any():
            raise TopologyError("base-station capacities must be positive")
        centers = grid_centers(self.grid_shape)
        self.dist = np.linalg.norm(centers[:, None, :] - self.positions[None, :, :], axis=2)
        self.cover = self.dist <= self.radius[None, :] + COVER_TOL
        uncovered = np.flatnonzero(~self.cover.any(axis=1))
        if uncovered.size:
            ny = self.grid_shape[1]
            cells = [(int(g // ny), int(g % ny)) for g in uncovered]
            raise TopologyError(f"grids not covered by any base station: {cells}", cells)

    @property
    def n_bs(self):
        return len(self.positions)

    @property
    def n_grids(self):
        return self.grid_shape[0] * self.grid_shape[1]

    @property
    def coverage(self):
        return [np.flatnonzero(self.cover[:, i]) for i in range(self.n_bs)]

    def to_json(self):
        nx, ny = self.grid_shape
        return {
            "bs": [
                {"id": i, "x": float(p[0]), "y": float(p[1]), "radius": float(r), "capacity": float(c)}
                for i, (p, r, c) in enumerate(zip(self.positions, self.radius, self.capacity))
            ],
            "grid": {"nx": nx, "ny": ny},
        }

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_json(), indent=2, sort_keys=True))

    @classmethod
    def from_json(cls, data):
        bs = sorted(data["bs"], key=lambda b: b["id"])
        return cls(
            [(b["x"], b["y"]) for b in bs],
            [b["radius"] for b in bs],
            [b["capacity"] for b in bs],
            (data["grid"]["nx"], data["grid"]["ny"]),
        )

    @classmethod
    def load(cls, path):
        return cls.from_json(json.loads(Path(path).read_text()))


def attributed_demand(cover, demand):
    """Per-BS demand when every grid's traffic is split equally among its covering BSs.

    ``demand`` is ``(..., N)``; returns ``(..., B)``.
    """
    share = cover / cover.sum(axis=1, keepdims=True)
    return np.asarray(demand, dtype=np.float64) @ share


def build_topology(
    positions,
    radius,
    grid_shape,
    capacity=None,
    capacity_rule="uniform",
    demand=None,
    headroom=1.5,
    floor=1.0,
):
    """Place BSs and derive coverage (grids within ``radius``) and capacities.

    ``capacity`` given explicitly wins. Otherwise ``capacity_rule="peak"``
    sets ``C_i = max(headroom * peak attributed demand, floor)`` using the
    ``(T, X, Y)`` ``demand`` history, and ``"uniform"`` needs ``capacity``.
    """
    B = len(np.asarray(positions).reshape(-1, 2))
    if capacity is not None:
        return NetworkTopology(positions, radius, capacity, grid_shape)
    if capacity_rule != "peak":
        raise ArgumentError("uniform capacity rule needs an explicit capacity")
    if demand is None:
        raise ArgumentError("peak capacity rule needs a demand history")
    probe = NetworkTopology(positions, radius, np.ones(B), grid_shape)
    flat = np.asarray(demand, dtype=np.float64).reshape(-1, probe.n_grids)
    peak = attributed_demand(probe.cover, flat).max(axis=0)
    return NetworkTopology(positions, radius, np.maximum(headroom * peak, floor), grid_shape)


def lattice_positions(grid_shape, bs_shape):
    """Evenly spaced BSs spanning the grid-centre extent."""
    axes = []
    for n, b in zip(grid_shape, bs_shape):
        axes.append(np.full(1, n / 2.0) if b == 1 else 0.5 + np.arange(b) * (n - 1) / (b - 1))
    xs, ys = np.meshgrid(*axes, indexing="ij")
    return np.stack([xs.ravel(), ys.ravel()], axis=1)
