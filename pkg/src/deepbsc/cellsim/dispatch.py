"""Min-cost-flow routing of grid traffic to active covering base stations."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DimensionError, InvariantViolation
from .mcf import MinCostFlow


@dataclass(frozen=True)
class DispatchResult:
    flow: np.ndarray  # (N, B) traffic routed from grid to BS
    loads: np.ndarray  # (B,)
    overflow: np.ndarray  # (N,) unserved traffic per grid
    c_tran: float  # s, routing delay of served traffic
    unserved: float
    penalty: float  # s per unserved unit

    @property
    def overflow_cost(self):
        return self.penalty * self.unserved

    @property
    def objective(self):
        return self.c_tran + self.overflow_cost


def _nearest_assignment(demand, grids, active, topology, params, penalty, flow, overflow):
    """Send each grid to its nearest active covering BS when that is feasible.

    If no BS capacity binds, every unit already pays its smallest possible
    cost, so this is the min-cost solution. Returns False otherwise.
    """
    if active.size == 0:
        overflow[grids] = demand[grids]
        return True
    dist = np.where(topology.cover[np.ix_(grids, active)], topology.dist[np.ix_(grids, active)], np.inf)
    pick = np.argmin(dist, axis=1)  # ties go to the lowest BS id
    best = dist[np.arange(grids.size), pick]
    routed = np.isfinite(best)
    if (params.delay_coeff * best[routed] > penalty).any():
        return False
    loads = np.bincount(pick[routed], weights=demand[grids[routed]], minlength=active.size)
    if (loads > params.util_cap * topology.capacity[active]).any():
        return False
    flow[grids[routed], active[pick[routed]]] = demand[grids[routed]]
    overflow[grids[~routed]] = demand[grids[~routed]]
    return True


def dispatch_traffic(frame, action, topology, params) -> DispatchResult:
    """Route traffic at minimum delay cost.

    Arcs: source -> grid (its demand), grid -> active covering BS (cost
    ``delay_coeff * dist``), BS -> sink (``util_cap * C_i``) and grid -> sink
    overflow at the overflow penalty, so the problem is always feasible.
    """
    demand = np.asarray(frame, dtype=np.float64).reshape(-1)
    action = np.asarray(action)
    N, B = topology.n_grids, topology.n_bs
    if demand.shape != (N,) or action.shape != (B,):
        raise DimensionError(f"dispatch expects {N} grid demands and {B} actions")
    if (demand < 0).any():
        raise DimensionError("negative traffic demand")
    penalty = params.penalty(topology)
    flow = np.zeros((N, B))
    overflow = np.zeros(N)
    grids = np.flatnonzero(demand > 0)
    active = np.flatnonzero(action == 1)
    if grids.size and not _nearest_assignment(demand, grids, active, topology, params, penalty, flow, overflow):
        # nodes: 0 source, 1 sink, grids, then active BSs
        g_node = {g: 2 + k for k, g in enumerate(grids)}
        b_node = {b: 2 + grids.size + k for k, b in enumerate(active)}
        net = MinCostFlow(2 + grids.size + active.size)
        arcs = []
        spill = {}
        for g in grids:
            net.add_edge(0, g_node[g], demand[g], 0.0)
            for b in active:
                if topology.cover[g, b]:
                    e = net.add_edge(g_node[g], b_node[b], math.inf, params.delay_coeff * topology.dist[g, b])
                    arcs.append((g, b, e))
            spill[g] = net.add_edge(g_node[g], 1, math.inf, penalty)
        for b in active:
            net.add_edge(b_node[b], 1, params.util_cap * topology.capacity[b], 0.0)
        sent, _ = net.solve(0, 1, float(demand.sum()))
        for g, b, e in arcs:
            flow[g, b] = net.flow_on(e)
        solver_spill = np.array([net.flow_on(spill[g]) for g in grids])
        overflow[grids] = demand[grids] - flow[grids].sum(axis=1)
        scale = max(1.0, float(demand.max()))
        if abs(sent - demand.sum()) > 1e-9 * scale * N or np.abs(solver_spill - overflow[grids]).max() > 1e-9 * scale:
            raise InvariantViolation("dispatch did not conserve traffic")
    loads = flow.sum(axis=0)
    c_tran = float((flow * topology.dist).sum() * params.delay_coeff)
    return DispatchResult(flow, loads, overflow, c_tran, float(overflow.sum()), penalty)
