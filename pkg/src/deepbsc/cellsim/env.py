"""The per-slot transition: dispatch on actual traffic, then charge every cost term."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DimensionError
from .costs import CostBreakdown, CostParams, EnergyParams, energy_cost, service_delay_cost, switching_cost
from .dispatch import DispatchResult, dispatch_traffic


@dataclass(frozen=True)
class SystemState:
    predicted: np.ndarray  # (N,) predicted traffic of the coming slot
    prev_action: np.ndarray  # (B,)

    def vector(self):
        return np.concatenate([np.asarray(self.predicted, dtype=np.float64).ravel(),
                               np.asarray(self.prev_action, dtype=np.float64)])

    def __len__(self):
        return np.size(self.predicted) + np.size(self.prev_action)


def step(prev_action, action, frame, topology, params=CostParams(), energy=EnergyParams()):
    """Cost of running ``action`` on the realised ``frame`` after ``prev_action``."""
    action = np.asarray(action)
    prev_action = np.asarray(prev_action)
    if action.shape != (topology.n_bs,) or prev_action.shape != (topology.n_bs,):
        raise DimensionError(f"actions must have length {topology.n_bs}")
    dispatch = dispatch_traffic(frame, action, topology, params)
    _, power = energy_cost(dispatch.loads, action, topology.capacity, energy)
    c_ser = service_delay_cost(dispatch.loads, topology.capacity, action)
    switching = switching_cost(prev_action, action, params.switching_vector(topology.n_bs))
    breakdown = CostBreakdown.assemble(
        energy=power,
        c_tran=dispatch.c_tran,
        c_ser=c_ser,
        overflow=params.beta_d * dispatch.overflow_cost,
        switching=switching,
        beta_d=params.beta_d,
        active_count=int(action.sum()),
        toggles=int((action > prev_action).sum()),
        unserved=dispatch.unserved,
    )
    breakdown.check(params.beta_d)
    return breakdown, dispatch


TRACE_HEADER = ["slot", "total", "energy", "tran", "ser", "switch", "active_count", "unserved"]


class CellEnv:
    """Replays a realised traffic series through :func:`step`, keeping a trace."""

    def __init__(self, topology, traffic, params=CostParams(), energy=EnergyParams(), start_slot=0):
        self.topology = topology
        self.traffic = np.asarray(traffic, dtype=np.float64).reshape(len(traffic), -1)
        if self.traffic.shape[1] != topology.n_grids:
            raise DimensionError("traffic frames do not match the grid")
        self.params = params
        self.energy = energy
        self.start_slot = start_slot
        self.reset()

    def reset(self, prev_action=None):
        self.t = 0
        self.prev_action = np.ones(self.topology.n_bs, dtype=np.int8) if prev_action is None else np.asarray(prev_action, dtype=np.int8)
        self.trace = []

    @property
    def done(self):
        return self.t >= len(self.traffic)

    def step(self, action):
        action = np.asarray(action, dtype=np.int8)
        cost, dispatch = step(self.prev_action, action, self.traffic[self.t], self.topology, self.params, self.energy)
        self.trace.append((self.start_slot + self.t, cost))
        self.prev_action = action
        self.t += 1
        return cost, dispatch

    def write_trace(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(TRACE_HEADER)
            for slot, c in self.trace:
                out.writerow([slot, repr(c.total), repr(c.energy), repr(c.c_tran), repr(c.c_ser),
                              repr(c.switching), c.active_count, repr(c.unserved)])
        return path
