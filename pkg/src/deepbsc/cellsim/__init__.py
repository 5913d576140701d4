from .costs import CostBreakdown, CostParams, EnergyParams, energy_cost, service_delay_cost, switching_cost
from .dispatch import DispatchResult, dispatch_traffic
from .env import CellEnv, SystemState, step
from .mcf import MinCostFlow
from .topology import NetworkTopology, attributed_demand, build_topology, grid_centers, lattice_positions

__all__ = [
    "CellEnv",
    "CostBreakdown",
    "CostParams",
    "DispatchResult",
    "EnergyParams",
    "MinCostFlow",
    "NetworkTopology",
    "SystemState",
    "attributed_demand",
    "build_topology",
    "dispatch_traffic",
    "energy_cost",
    "grid_centers",
    "lattice_positions",
    "service_delay_cost",
    "step",
    "switching_cost",
]
