from .ddpg import DdpgAgent, make_actor, make_critic, policy_q_gradient, td_targets
from .explore import OuNoise, binarize, explore_binarize, merge_explorer, spawn_explorer
from .hyper import AgentHyperparams
from .loop import Evaluation, SleepTask, TrainResult, agent_policy, all_active, evaluate, rollout, select_and_merge, train_agent
from .replay import Batch, ReplayBuffer


def benchmark_gap(cost, c_base):
    """Cost relative to the benchmark: ``g = c - c_base``."""
    return cost - c_base


__all__ = [
    "AgentHyperparams",
    "Batch",
    "DdpgAgent",
    "Evaluation",
    "OuNoise",
    "ReplayBuffer",
    "SleepTask",
    "TrainResult",
    "agent_policy",
    "all_active",
    "benchmark_gap",
    "binarize",
    "evaluate",
    "explore_binarize",
    "make_actor",
    "make_critic",
    "merge_explorer",
    "policy_q_gradient",
    "rollout",
    "select_and_merge",
    "spawn_explorer",
    "td_targets",
    "train_agent",
]
