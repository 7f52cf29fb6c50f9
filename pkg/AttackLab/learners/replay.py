from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..mmdp import Transition


@dataclass
class Batch:
    obs: np.ndarray          # [B, m, obs_dim]
    prev_actions: np.ndarray  # [B, m]
    actions: np.ndarray      # [B, m]
    rewards: np.ndarray      # [B]
    states: np.ndarray       # [B, S]
    next_obs: np.ndarray     # [B, m, obs_dim]
    next_states: np.ndarray  # [B, S]
    next_masks: np.ndarray   # [B, m, A]
    terminals: np.ndarray    # [B]

    def __len__(self):
        return len(self.rewards)


def stack(transitions: list[Transition]) -> Batch:
    return Batch(
        obs=np.array([np.stack(t.obs_k) for t in transitions]),
        prev_actions=np.array([t.prev_actions_k for t in transitions], dtype=np.int64),
        actions=np.array([t.actions_k for t in transitions], dtype=np.int64),
        rewards=np.array([t.reward for t in transitions]),
        states=np.array([t.state for t in transitions]),
        next_obs=np.array([np.stack(t.next_obs_k) for t in transitions]),
        next_states=np.array([t.next_state for t in transitions]),
        next_masks=np.array([np.stack(t.next_masks_k) for t in transitions]),
        terminals=np.array([t.terminal for t in transitions], dtype=np.float64),
    )


class ReplayBuffer:
    """Fixed-capacity ring of transitions, filled one episode at a time."""

    def __init__(self, capacity: int, rng: np.random.Generator):
        self.capacity = capacity
        self.rng = rng
        self._items: list[Transition] = []
        self._next = 0
        self.inserted = 0

    def __len__(self):
        return len(self._items)

    def add(self, transition: Transition):
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity
        self.inserted += 1

    def add_episode(self, transitions: list[Transition]):
        for transition in transitions:
            self.add(transition)

    def sample(self, batch_size: int) -> Batch:
        """Uniform sample without replacement."""
        size = min(batch_size, len(self._items))
        picks = self.rng.choice(len(self._items), size=size, replace=False)
        return stack([self._items[i] for i in picks])
