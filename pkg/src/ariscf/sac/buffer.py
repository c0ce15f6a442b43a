"""FIFO replay buffer over preallocated arrays."""

from __future__ import annotations

import numpy as np


class ReplayBuffer:
    """Ring buffer of (s, a, r, s') transitions with uniform batch sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int):
        self.capacity = int(capacity)
        self.obs = np.zeros((capacity, obs_dim))
        self.act = np.zeros((capacity, act_dim))
        self.rew = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.size = 0
        self._head = 0

    def add(self, obs, act, rew, next_obs) -> None:
        i = self._head
        self.obs[i] = obs
        self.act[i] = act
        self.rew[i] = rew
        self.next_obs[i] = next_obs
        self._head = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch: int, rng: np.random.Generator):
        """Uniform sample without replacement within the batch."""
        idx = rng.choice(self.size, size=min(batch, self.size), replace=False)
        return self.obs[idx], self.act[idx], self.rew[idx], self.next_obs[idx]

    def __len__(self) -> int:
        return self.size
