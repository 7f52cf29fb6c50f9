from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from ..mmdp import EnvState, Environment, Transition, rng_for
from .policy import QTeamPolicy, greedy_action

Chooser = Callable[[EnvState, Sequence[int]], Sequence[int]]


@dataclass
class EpisodeResult:
    transitions: list[Transition]
    episode_return: float
    length: int
    won: bool


def collect_episode(env: Environment, seed: int, choose: Chooser) -> EpisodeResult:
    """Roll one episode where every environment agent is driven by ``choose``."""
    state = env.reset(seed)
    prev = [-1] * env.spec.n_agents
    transitions, total = [], 0.0
    while not state.terminal:
        actions = tuple(int(a) for a in choose(state, prev))
        reward, next_state = env.step(state, actions)
        transitions.append(Transition(
            state=state.global_state,
            obs_k=state.observations,
            actions_k=actions,
            reward=reward,
            next_state=next_state.global_state,
            next_obs_k=next_state.observations,
            next_masks_k=next_state.action_masks,
            terminal=next_state.terminal,
            prev_actions_k=tuple(prev),
        ))
        total += reward
        prev = list(actions)
        state = next_state
    return EpisodeResult(transitions, total, len(transitions), state.won)


def epsilon_greedy(policy: QTeamPolicy, epsilon: float, rng: np.random.Generator) -> Chooser:
    def choose(state: EnvState, prev: Sequence[int]) -> list[int]:
        actions = []
        for slot in range(policy.n_slots):
            mask = state.action_masks[slot]
            if rng.random() < epsilon:
                actions.append(int(rng.choice(np.flatnonzero(mask))))
            else:
                actions.append(greedy_action(policy, slot, state.observations[slot], mask, prev[slot]))
        return actions
    return choose


def greedy(policy: QTeamPolicy) -> Chooser:
    def choose(state: EnvState, prev: Sequence[int]) -> list[int]:
        return [
            greedy_action(policy, slot, state.observations[slot], state.action_masks[slot], prev[slot])
            for slot in range(policy.n_slots)
        ]
    return choose


def episode_seeds(seed: int, n: int) -> list[int]:
    return [int(s) for s in rng_for(seed).integers(0, 2 ** 63, size=n)]
