"""Fixed-capacity experience replay with oldest-first eviction."""
from __future__ import annotations

from typing import NamedTuple

import numpy as np

from ..errors import ArgumentError, DimensionError


class Batch(NamedTuple):
    states: np.ndarray
    actions: np.ndarray
    gaps: np.ndarray
    next_states: np.ndarray


class ReplayBuffer:
    def __init__(self, capacity, state_dim, action_dim):
        if capacity < 1:
            raise ArgumentError("replay capacity must be positive")
        self.capacity = capacity
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.gaps = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.size = 0
        self.head = 0  # slot the next experience goes into

    def __len__(self):
        return self.size

    def store(self, state, action, gap, next_state):
        if np.shape(state) != self.states.shape[1:] or np.shape(next_state) != self.states.shape[1:]:
            raise DimensionError("state dimension does not match the buffer")
        if np.shape(action) != self.actions.shape[1:]:
            raise DimensionError("action dimension does not match the buffer")
        i = self.head
        self.states[i] = state
        self.actions[i] = action
        self.gaps[i] = gap
        self.next_states[i] = next_state
        self.head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def order(self):
        """Buffer positions from oldest to newest."""
        start = self.head if self.size == self.capacity else 0
        return (start + np.arange(self.size)) % self.capacity

    def sample(self, n, rng):
        if n > self.size:
            raise ArgumentError(f"cannot sample {n} from {self.size} experiences")
        idx = rng.choice(self.size, size=n, replace=False)
        return Batch(self.states[idx], self.actions[idx], self.gaps[idx], self.next_states[idx])
