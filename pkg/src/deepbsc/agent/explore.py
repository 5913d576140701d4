"""Exploration: OU noise on the continuous action and the perturbed explorer network."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ArgumentError


def binarize(a):
    """Clamp to [0, 1] and threshold at 0.5."""
    return (np.clip(a, 0.0, 1.0) >= 0.5).astype(np.int8)


@dataclass
class OuNoise:
    x: np.ndarray
    theta: float = 0.15
    mu: float = 0.0
    sigma: float = 0.2

    @classmethod
    def zeros(cls, n, theta=0.15, mu=0.0, sigma=0.2):
        return cls(np.zeros(n), theta, mu, sigma)

    def advance(self, rng):
        self.x = self.x + self.theta * (self.mu - self.x) + self.sigma * rng.standard_normal(self.x.shape)
        return self.x


def explore_binarize(a_cont, ou: OuNoise, rng):
    """Advance the OU state, add it to the continuous action and binarise."""
    noise = ou.advance(rng)
    return binarize(np.asarray(a_cont) + noise), ou


def spawn_explorer(actor, alpha, rng):
    """Copy of ``actor`` with every weight moved by ``alpha * U(-1, 1) * W``.

    Returns ``(explorer, deltas)`` with the perturbation per parameter name.
    Batch-norm statistics are copied unchanged.
    """
    if alpha < 0:
        raise ArgumentError("explorer coefficient must be non-negative")
    explorer = actor.copy()
    deltas = {}
    for name, w in explorer.params().items():
        delta = alpha * rng.uniform(-1.0, 1.0, size=w.shape) * w
        w += delta
        deltas[name] = delta
    return explorer, deltas


def merge_explorer(actor, explorer, deltas, sigma, mode="delta"):
    """Pull the actor toward a winning explorer.

    ``"delta"``: ``W <- W + sigma * dW``; ``"literal"``: ``W <- W + sigma * W_explorer``.
    """
    ex = explorer.params()
    for name, w in actor.params().items():
        if mode == "delta":
            w += sigma * deltas[name]
        elif mode == "literal":
            w += sigma * ex[name]
        else:
            raise ArgumentError(f"unknown merge mode {mode!r}")
    return actor
