"""Actor-critic networks with target copies and their DDPG updates (costs are minimised)."""
from __future__ import annotations

import numpy as np

from ..errors import TrainingError
from ..nn import AdamState, Mlp, adam_step, soft_update
from ..nn.checkpoint import load_checkpoint, restore, save_checkpoint
from .hyper import AgentHyperparams


def make_actor(state_dim, n_bs, hyper, rng):
    layers = [(h, "relu", True) for h in hyper.actor_hidden] + [(n_bs, "sigmoid", False)]
    return Mlp(state_dim, layers, rng, final_limit=hyper.final_init, bn_momentum=hyper.bn_momentum)


def make_critic(state_dim, n_bs, hyper, rng):
    layers = [(h, "relu", True) for h in hyper.critic_hidden] + [(1, "linear", False)]
    return Mlp(state_dim + n_bs, layers, rng, final_limit=hyper.final_init, bn_momentum=hyper.bn_momentum)


def td_targets(gaps, next_q, gamma):
    """``y = g + gamma * Q_target(s', pi_target(s'))``."""
    return np.asarray(gaps, dtype=np.float64) + gamma * np.asarray(next_q, dtype=np.float64)


def policy_q_gradient(actor, critic, states):
    """Mean ``Q(s, pi(s))`` over the batch and its gradient wrt the actor parameters.

    The actor runs in training mode. The critic is only evaluated here, so it
    uses its running statistics: batch statistics would subtract any action
    shift shared by the whole batch and hide it from the gradient.
    """
    a, actor_caches = actor.forward(states, training=True)
    q, critic_caches = critic.forward(np.concatenate([states, a], axis=1), training=False)
    n = len(states)
    dinput, _ = critic.backward(critic_caches, np.full_like(q, 1.0 / n))
    _, grads = actor.backward(actor_caches, dinput[:, states.shape[1]:])
    return float(q.mean()), grads


class DdpgAgent:
    def __init__(self, state_dim, n_bs, hyper: AgentHyperparams, rng):
        self.state_dim = state_dim
        self.n_bs = n_bs
        self.hyper = hyper
        self.actor = make_actor(state_dim, n_bs, hyper, rng)
        self.critic = make_critic(state_dim, n_bs, hyper, rng)
        self.actor_target = self.actor.copy()
        self.critic_target = self.critic.copy()
        self.actor_opt = AdamState.for_params(self.actor.params())
        self.critic_opt = AdamState.for_params(self.critic.params())

    def act(self, state, actor=None):
        """Continuous action in (0, 1)^B, inference-mode forward pass."""
        net = self.actor if actor is None else actor
        return net(np.asarray(state, dtype=np.float64)[None])[0]

    def q_value(self, state, action):
        x = np.concatenate([np.asarray(state, dtype=np.float64), np.asarray(action, dtype=np.float64)])
        return float(self.critic(x[None])[0, 0])

    def critic_update(self, batch):
        """One Adam step on the squared TD error; returns the loss before the step."""
        h = self.hyper
        # target networks are evaluated, never trained: inference-mode normalisation
        next_a = self.actor_target(batch.next_states)
        next_q = self.critic_target(np.concatenate([batch.next_states, next_a], axis=1))
        y = td_targets(batch.gaps, next_q[:, 0], h.gamma)
        q, caches = self.critic.forward(np.concatenate([batch.states, batch.actions], axis=1), training=True)
        err = q[:, 0] - y
        loss = float((err * err).mean())
        if not np.isfinite(loss):
            raise TrainingError("critic loss is not finite")
        _, grads = self.critic.backward(caches, (2.0 * err / len(err))[:, None])
        adam_step(self.critic.params(), grads, self.critic_opt, h.lr_critic)
        return loss

    def actor_update(self, batch):
        """One Adam step moving the policy toward lower critic values; returns mean Q."""
        q, grads = policy_q_gradient(self.actor, self.critic, batch.states)
        if not np.isfinite(q):
            raise TrainingError("actor objective is not finite")
        adam_step(self.actor.params(), grads, self.actor_opt, self.hyper.lr_actor)
        return q

    def update_targets(self):
        soft_update(self.actor_target.params(), self.actor.params(), self.hyper.tau)
        soft_update(self.critic_target.params(), self.critic.params(), self.hyper.tau)

    def tensors(self):
        out = {}
        for prefix, net in (("actor", self.actor), ("critic", self.critic),
                            ("actor_target", self.actor_target), ("critic_target", self.critic_target)):
            out.update({f"{prefix}.{k}": v for k, v in net.state_tensors().items()})
        for prefix, opt in (("actor_opt", self.actor_opt), ("critic_opt", self.critic_opt)):
            for k, v in opt.tensors().items():
                out[f"{prefix}.{k}"] = v
        return out

    def save(self, path):
        return save_checkpoint(path, self.tensors())

    def load(self, path):
        tensors = load_checkpoint(path)
        restore(self.tensors(), tensors)
        self.actor_opt.step = int(tensors["actor_opt.step"][0]) if "actor_opt.step" in tensors else self.actor_opt.step
        self.critic_opt.step = int(tensors["critic_opt.step"][0]) if "critic_opt.step" in tensors else self.critic_opt.step
        return self
