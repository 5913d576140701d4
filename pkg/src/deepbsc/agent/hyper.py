"""Agent hyperparameters."""
from __future__ import annotations

from dataclasses import asdict, dataclass

from ..errors import ArgumentError


@dataclass(frozen=True)
class AgentHyperparams:
    gamma: float = 0.9
    tau: float = 1e-3
    lr_actor: float = 1e-4
    lr_critic: float = 1e-4
    batch_size: int = 64
    replay_capacity: int = 100_000
    actor_hidden: tuple = (800, 600)
    critic_hidden: tuple = (800, 600)
    final_init: float = 3e-3  # output-layer init range
    bn_momentum: float = 0.99
    explorer: bool = True
    explorer_alpha: float = 0.05  # relative weight perturbation
    sigma0: float = 0.1  # merge factor, decays per episode
    sigma_decay: float = 0.995
    merge_mode: str = "delta"  # "delta": W += sigma * dW, "literal": W += sigma * (W + dW)
    ou_theta: float = 0.15
    ou_mu: float = 0.0
    ou_sigma: float = 0.2
    ou_sigma_final: float = 0.02
    benchmark: bool = True  # learn on gaps to the benchmark cost instead of raw costs
    cost_scale: float | None = None  # divide costs by this; None -> B * fixed power
    updates_per_step: int = 1

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ArgumentError("gamma must lie in [0, 1]")
        if not 0.0 < self.tau <= 1.0:
            raise ArgumentError("tau must lie in (0, 1]")
        if not 1 <= self.batch_size <= self.replay_capacity:
            raise ArgumentError("batch size must be between 1 and the replay capacity")
        if self.explorer_alpha < 0 or self.sigma0 < 0:
            raise ArgumentError("explorer coefficient and merge factor must be non-negative")
        if self.merge_mode not in ("delta", "literal"):
            raise ArgumentError(f"unknown merge mode {self.merge_mode!r}")
        if self.lr_actor < 0 or self.lr_critic < 0:
            raise ArgumentError("learning rates must be non-negative")

    def sigma(self, episode):
        return self.sigma0 * self.sigma_decay**episode

    def ou_sigma_at(self, episode, episodes):
        if episodes <= 1:
            return self.ou_sigma
        frac = min(episode / (episodes - 1), 1.0)
        return self.ou_sigma + frac * (self.ou_sigma_final - self.ou_sigma)

    def as_dict(self):
        d = asdict(self)
        d["actor_hidden"] = list(self.actor_hidden)
        d["critic_hidden"] = list(self.critic_hidden)
        return d
