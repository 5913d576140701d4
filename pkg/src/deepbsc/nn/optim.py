"""Adam and soft target updates over named parameter dictionaries.

Both update the arrays in place (and also return them) so that model objects
holding references to the same arrays see the new values.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ArgumentError, DimensionError, TrainingError


@dataclass
class AdamState:
    m: dict = field(default_factory=dict)
    v: dict = field(default_factory=dict)
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    @classmethod
    def for_params(cls, params, beta1=0.9, beta2=0.999, eps=1e-8):
        return cls(
            {k: np.zeros_like(p) for k, p in params.items()},
            {k: np.zeros_like(p) for k, p in params.items()},
            0,
            beta1,
            beta2,
            eps,
        )

    def tensors(self):
        out = {"step": np.array([float(self.step)])}
        out.update({f"m.{k}": a for k, a in self.m.items()})
        out.update({f"v.{k}": a for k, a in self.v.items()})
        return out


def adam_step(params, grads, state: AdamState, lr):
    """One bias-corrected Adam update of ``params`` using ``grads``."""
    for name, g in grads.items():
        if name not in params:
            raise DimensionError(f"gradient for unknown parameter {name!r}")
        if g.shape != params[name].shape:
            raise DimensionError(f"gradient {name!r} has shape {g.shape}, expected {params[name].shape}")
        if not np.all(np.isfinite(g)):
            raise TrainingError(f"non-finite gradient in {name!r}")
    state.step += 1
    b1, b2 = state.beta1, state.beta2
    c1 = 1.0 - b1**state.step
    c2 = 1.0 - b2**state.step
    for name, g in grads.items():
        if name not in state.m:
            state.m[name] = np.zeros_like(g)
            state.v[name] = np.zeros_like(g)
        m, v = state.m[name], state.v[name]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        if lr != 0.0:
            params[name] -= lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return params, state


def soft_update(target, source, tau):
    """theta_target <- tau * theta + (1 - tau) * theta_target, elementwise."""
    if not 0.0 <= tau <= 1.0:
        raise ArgumentError(f"tau must lie in [0, 1], got {tau}")
    if target.keys() != source.keys():
        raise DimensionError("target and source hold different parameters")
    for name, t in target.items():
        s = source[name]
        if s.shape != t.shape:
            raise DimensionError(f"{name!r}: shapes {t.shape} and {s.shape} differ")
        if tau == 1.0:
            t[...] = s
        elif tau != 0.0:
            t *= 1.0 - tau
            t += tau * s
    return target
