"""The sleep-control task, policy evaluation and the agent training loop."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..cellsim import CostParams, EnergyParams, step
from ..errors import ArgumentError, DimensionError, TrainingError
from .ddpg import DdpgAgent
from .explore import OuNoise, binarize, explore_binarize, merge_explorer, spawn_explorer
from .hyper import AgentHyperparams
from .replay import ReplayBuffer


@dataclass
class SleepTask:
    """Realised traffic, the forecasts decisions are based on, and the network they run on.

    ``actual`` and ``predicted`` are raw ``(T, N)`` series aligned by slot;
    ``traffic_scale`` normalises predicted traffic inside agent states.
    """

    topology: object
    actual: np.ndarray
    predicted: np.ndarray
    params: CostParams = field(default_factory=CostParams)
    energy: EnergyParams = field(default_factory=EnergyParams)
    traffic_scale: float = 1.0
    slots_per_day: int = 48

    def __post_init__(self):
        self.actual = np.asarray(self.actual, dtype=np.float64).reshape(len(self.actual), -1)
        self.predicted = np.asarray(self.predicted, dtype=np.float64).reshape(self.actual.shape)
        if self.actual.shape[1] != self.topology.n_grids:
            raise DimensionError("traffic does not match the topology's grid")
        if not self.traffic_scale > 0:
            raise ArgumentError("traffic scale must be positive")

    @property
    def n_bs(self):
        return self.topology.n_bs

    @property
    def state_dim(self):
        return self.topology.n_grids + self.topology.n_bs

    def raw_state(self, t, prev):
        return np.concatenate([self.predicted[t], prev])

    def state(self, t, prev):
        return np.concatenate([self.predicted[t] / self.traffic_scale, prev])

    def day_slots(self, day):
        return np.arange(day * self.slots_per_day, (day + 1) * self.slots_per_day)


@dataclass(frozen=True)
class Evaluation:
    costs: list  # CostBreakdown per slot
    actions: np.ndarray  # (T, B)
    baseline_total: float  # all-active cost on the same slots

    @property
    def total(self):
        return float(sum(c.total for c in self.costs))

    @property
    def mean_cost(self):
        return self.total / len(self.costs)

    @property
    def normalized(self):
        return self.total / self.baseline_total

    @property
    def toggles_per_slot(self):
        return float(np.mean([c.toggles for c in self.costs]))

    @property
    def active_counts(self):
        return np.array([c.active_count for c in self.costs])

    def summary(self):
        keys = ("energy", "c_tran", "c_ser", "overflow", "qos", "switching", "total", "unserved")
        out = {k: float(sum(getattr(c, k) for c in self.costs)) for k in keys}
        out.update(mean_cost=self.mean_cost, normalized_cost=self.normalized, toggles_per_slot=self.toggles_per_slot,
                   mean_active=float(self.active_counts.mean()), slots=len(self.costs))
        return out


def rollout(task, policy, slots, prev_action=None):
    """Run ``policy(predicted_frame, prev_action)`` over ``slots``, charging realised traffic."""
    slots = np.asarray(slots)
    if slots.size == 0:
        raise ArgumentError("evaluation needs at least one slot")
    prev = np.ones(task.n_bs, dtype=np.int8) if prev_action is None else np.asarray(prev_action, dtype=np.int8)
    costs, actions = [], []
    for t in slots:
        action = np.asarray(policy(task.predicted[t], prev), dtype=np.int8)
        cost, _ = step(prev, action, task.actual[t], task.topology, task.params, task.energy)
        costs.append(cost)
        actions.append(action)
        prev = action
    return costs, np.array(actions)


def all_active(frame, prev):
    return np.ones(len(prev), dtype=np.int8)


def evaluate(task, policy, slots, prev_action=None):
    """Deterministic rollout, normalised by the all-active policy on the same slots."""
    costs, actions = rollout(task, policy, slots, prev_action)
    base, _ = rollout(task, all_active, slots, prev_action)
    return Evaluation(costs, actions, float(sum(c.total for c in base)))


def agent_policy(agent, task):
    """Greedy policy of the actor: inference-mode output thresholded at 0.5."""

    def policy(frame, prev):
        state = np.concatenate([np.asarray(frame) / task.traffic_scale, prev])
        return binarize(agent.act(state))

    return policy


def select_and_merge(agent, explorer, deltas, state, action, sigma, mode="delta"):
    """Keep the action with the lower critic value; a winning explorer pulls the actor toward it.

    Returns ``(chosen action, explorer_won)``.
    """
    alt = binarize(agent.act(state, explorer))
    if np.array_equal(alt, action) or not agent.q_value(state, alt) < agent.q_value(state, action):
        return action, False
    merge_explorer(agent.actor, explorer, deltas, sigma, mode)
    return alt, True


@dataclass
class TrainResult:
    agent: DdpgAgent
    eval_costs: list  # normalised evaluation cost after every episode
    trace: list  # (episode, slot, cost, gap, active_count, explorer_chosen)
    explorer_wins: int = 0

    def write_trace(self, path):
        path = Path(path)
        with path.open("w", newline="") as fh:
            out = csv.writer(fh)
            out.writerow(["episode", "slot", "cost", "gap", "active_count", "explorer_chosen"])
            for row in self.trace:
                e, s, c, g, n, x = row
                out.writerow([e, s, repr(c), repr(g), n, int(x)])
        return path


def train_agent(task, hyper: AgentHyperparams, episodes, train_days, eval_slots=None, base_dnn=None, seed=0,
                agent=None, log=None):
    """Learn a sleep policy, one training day per episode (cycling through ``train_days``).

    Every slot: form the state from the forecast, act with OU noise (and the
    explorer when enabled), pay the realised cost, store the (benchmark)
    gap, then update critic, actor and both targets from a replay sample.
    Each episode starts from an all-active network.
    """
    if hyper.benchmark and base_dnn is None:
        raise ArgumentError("benchmark transformation needs a benchmark-cost model")
    rng = np.random.default_rng(seed)
    if agent is None:
        agent = DdpgAgent(task.state_dim, task.n_bs, hyper, rng)
    scale = hyper.cost_scale or task.n_bs * task.energy.fixed
    buffer = ReplayBuffer(hyper.replay_capacity, task.state_dim, task.n_bs)
    result = TrainResult(agent, [], [])
    T = len(task.actual)
    for episode in range(episodes):
        day = train_days[episode % len(train_days)]
        slots = task.day_slots(day)
        ou = OuNoise.zeros(task.n_bs, hyper.ou_theta, hyper.ou_mu, hyper.ou_sigma_at(episode, episodes))
        sigma = hyper.sigma(episode)
        prev = np.ones(task.n_bs, dtype=np.int8)
        for t in slots:
            state = task.state(t, prev)
            action, ou = explore_binarize(agent.act(state), ou, rng)
            chosen = False
            if hyper.explorer:
                explorer, deltas = spawn_explorer(agent.actor, hyper.explorer_alpha, rng)
                action, chosen = select_and_merge(agent, explorer, deltas, state, action, sigma, hyper.merge_mode)
                result.explorer_wins += chosen
            cost, _ = step(prev, action, task.actual[t], task.topology, task.params, task.energy)
            c_base = float(base_dnn.predict(task.raw_state(t, prev))) if hyper.benchmark else 0.0
            gap = cost.total - c_base
            nxt = t + 1 if t + 1 < T else slots[0]
            next_state = task.state(nxt, action)
            buffer.store(state, action, gap / scale, next_state)
            if len(buffer) >= hyper.batch_size:
                for _ in range(hyper.updates_per_step):
                    batch = buffer.sample(hyper.batch_size, rng)
                    try:
                        agent.critic_update(batch)
                        agent.actor_update(batch)
                    except TrainingError as exc:
                        raise TrainingError(f"episode {episode}, slot {int(t)}: {exc}") from exc
                    agent.update_targets()
            result.trace.append((episode, int(t), cost.total, gap, cost.active_count, chosen))
            prev = action
        if eval_slots is not None:
            result.eval_costs.append(evaluate(task, agent_policy(agent, task), eval_slots).normalized)
        if log is not None:
            log(episode, result)
    return result
