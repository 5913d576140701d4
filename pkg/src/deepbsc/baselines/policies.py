"""Classical sleep-control policies: random sleeping, greedy turn-off and two-threshold hysteresis."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..cellsim import CostParams, EnergyParams, attributed_demand, dispatch_traffic, energy_cost, service_delay_cost
from ..errors import ArgumentError


def to_policy(p_sleep, B, rng):
    """Traffic-oblivious: every BS sleeps independently with probability ``p_sleep``."""
    if not 0.0 <= p_sleep <= 1.0:
        raise ArgumentError(f"sleep probability must lie in [0, 1], got {p_sleep}")
    return (rng.random(B) >= p_sleep).astype(np.int8)


def slot_cost(frame, action, topology, params=CostParams(), energy=EnergyParams()):
    """Energy plus QoS cost of one slot, without switching (the greedy's myopic objective)."""
    dispatch = dispatch_traffic(frame, action, topology, params)
    _, power = energy_cost(dispatch.loads, action, topology.capacity, energy)
    c_ser = service_delay_cost(dispatch.loads, topology.capacity, action)
    return power + params.beta_d * (dispatch.c_tran + c_ser + dispatch.overflow_cost)


def goff_policy(frame, prev_action, topology, params=CostParams(), energy=EnergyParams()):
    """Greedy turn-off from all-active.

    Each round tries switching off every active BS, ranks them by cost change
    per watt of fixed power saved (lowest first, ties to the lowest id) and
    commits the best one while that strictly lowers the slot cost.
    ``prev_action`` is unused: the greedy ignores switching.
    """
    action = np.ones(topology.n_bs, dtype=np.int8)
    current = slot_cost(frame, action, topology, params, energy)
    fixed = max(energy.fixed - energy.sleep, 1e-12)
    while action.any():
        best_ratio, best_bs, best_cost = np.inf, -1, current
        for b in np.flatnonzero(action):
            action[b] = 0
            cost = slot_cost(frame, action, topology, params, energy)
            action[b] = 1
            ratio = (cost - current) / fixed
            if ratio < best_ratio:
                best_ratio, best_bs, best_cost = ratio, b, cost
        if not best_cost < current:
            break
        action[best_bs] = 0
        current = best_cost
    return action


@dataclass(frozen=True)
class TtpThresholds:
    sleep: float = 0.2
    active: float = 0.5

    def __post_init__(self):
        if not 0.0 < self.sleep < self.active < 1.0:
            raise ArgumentError("thresholds must satisfy 0 < sleep < active < 1")


def proxy_utilization(frame, topology):
    """Covered demand per BS, shared grids split equally, over capacity."""
    return attributed_demand(topology.cover, np.ravel(frame)) / topology.capacity


def ttp_policy(frame, prev_action, topology, thresholds=TtpThresholds()):
    """Sleep below the sleep threshold, wake above the active threshold, otherwise keep the mode."""
    u = proxy_utilization(frame, topology)
    prev = np.asarray(prev_action, dtype=np.int8)
    return np.where(u < thresholds.sleep, 0, np.where(u > thresholds.active, 1, prev)).astype(np.int8)
