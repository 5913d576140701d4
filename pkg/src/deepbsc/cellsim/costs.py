"""Per-slot cost terms: energy, service delay, switching, and their breakdown."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from ..errors import DimensionError, InvariantViolation


@dataclass(frozen=True)
class EnergyParams:
    fixed: float = 160.0  # W, per active BS
    load: float = 216.0  # W at full utilisation
    sleep: float = 0.0  # W, per sleeping BS


@dataclass(frozen=True)
class CostParams:
    beta_d: float = 50.0  # QoS penalty, cost units per second of delay
    beta_s: float | tuple = 100.0  # per sleep->active toggle, scalar or per BS
    delay_coeff: float = 0.01  # s per unit traffic per grid width
    overflow_penalty: float | None = None  # s per unserved unit; None -> 10x largest routing cost
    util_cap: float = 0.95

    def __post_init__(self):
        if not 0.0 < self.util_cap < 1.0:
            raise ValueError("utilisation cap must lie in (0, 1)")
        if self.beta_d <= 0 or self.delay_coeff <= 0 or np.any(np.asarray(self.beta_s) < 0):
            raise ValueError("cost coefficients must be positive")

    def switching_vector(self, n_bs):
        return np.broadcast_to(np.asarray(self.beta_s, dtype=np.float64), (n_bs,))

    def penalty(self, topology):
        if self.overflow_penalty is not None:
            return float(self.overflow_penalty)
        routable = topology.dist[topology.cover]
        return 10.0 * self.delay_coeff * float(routable.max(initial=1.0))

    def scaled_switching(self, ratio):
        beta = np.asarray(self.beta_s, dtype=np.float64) * ratio
        return CostParams(self.beta_d, float(beta) if beta.ndim == 0 else tuple(beta.tolist()),
                          self.delay_coeff, self.overflow_penalty, self.util_cap)


def _binary(a, name):
    a = np.asarray(a)
    if not np.isin(a, (0, 1)).all():
        raise DimensionError(f"{name} must be a binary vector")
    return a.astype(np.int8)


def energy_cost(loads, action, capacity, energy=EnergyParams()):
    """Per-BS power ``P_f + P_l * rho / C`` when active, sleep power otherwise."""
    action = _binary(action, "action")
    loads = np.asarray(loads, dtype=np.float64)
    capacity = np.asarray(capacity, dtype=np.float64)
    if not (loads.shape == action.shape == capacity.shape):
        raise DimensionError("loads, action and capacities must have equal length")
    per_bs = np.where(action == 1, energy.fixed + energy.load * loads / capacity, energy.sleep)
    return per_bs, float(per_bs.sum())


def service_delay_cost(loads, capacity, action):
    """Sum of ``1 / (C_i - rho_i)`` over active base stations."""
    action = _binary(action, "action")
    loads = np.asarray(loads, dtype=np.float64)
    capacity = np.asarray(capacity, dtype=np.float64)
    active = action == 1
    if (loads[active] >= capacity[active]).any():
        raise InvariantViolation("base-station load reached its capacity")
    if (loads[~active] > 0).any():
        raise InvariantViolation("a sleeping base station carries traffic")
    return float((1.0 / (capacity[active] - loads[active])).sum())


def switching_cost(prev_action, action, beta_s):
    """Charge ``beta_s[i]`` for every BS going from sleep to active."""
    prev_action = _binary(prev_action, "previous action")
    action = _binary(action, "action")
    if prev_action.shape != action.shape:
        raise DimensionError("actions differ in length")
    beta = np.broadcast_to(np.asarray(beta_s, dtype=np.float64), action.shape)
    return float((beta * (action > prev_action)).sum())


@dataclass(frozen=True)
class CostBreakdown:
    energy: float
    c_tran: float  # s
    c_ser: float  # s
    overflow: float  # cost units charged for unserved traffic
    qos: float
    switching: float
    total: float
    active_count: int
    toggles: int
    unserved: float

    @classmethod
    def assemble(cls, energy, c_tran, c_ser, overflow, switching, beta_d, active_count, toggles, unserved):
        qos = beta_d * (c_tran + c_ser) + overflow
        return cls(energy, c_tran, c_ser, overflow, qos, switching, energy + qos + switching,
                   int(active_count), int(toggles), unserved)

    def check(self, beta_d, tol=1e-9):
        expected = self.energy + beta_d * (self.c_tran + self.c_ser) + self.overflow + self.switching
        if abs(expected - self.total) > tol * max(1.0, abs(self.total)):
            raise InvariantViolation("cost breakdown does not add up")
        return True

    def as_dict(self):
        return asdict(self)
