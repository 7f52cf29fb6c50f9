"""Attacked evaluation rollouts.

Every attack (learned or rule) is a controller that picks the attacked
agents' actions inside an ``AdversarialEnv``; the environment itself does
the accounting, so all methods are measured the same way.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Protocol, Sequence

import numpy as np

from ..learners.episodes import episode_seeds
from ..learners.policy import QTeamPolicy, greedy_action
from ..mmdp import EnvState, Environment
from .adversarial_env import AdversarialEnv, wrap_adversarial


@dataclass(frozen=True)
class AttackStats:
    attacked_steps: tuple[int, ...]
    total_steps: int
    team_return: float
    won: bool
    regularized_return: float
    # one row per step: deviation indicator of every attacked agent
    step_log: tuple[tuple[int, ...], ...] = field(default=(), repr=False)

    @property
    def attack_count(self) -> int:
        return sum(self.attacked_steps)

    def attacked_fraction(self, slot: int | None = None) -> float:
        if self.total_steps == 0:
            return 0.0
        count = self.attack_count if slot is None else self.attacked_steps[slot]
        return count / self.total_steps


class Controller(Protocol):
    def reset(self, seed: int) -> None:
        ...

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> Sequence[int]:
        ...


class GreedyAttacker:
    """Greedy actions of an attacker policy (or of any policy covering the targets)."""

    def __init__(self, policy: QTeamPolicy):
        self.policy = policy

    def reset(self, seed: int):
        pass

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> list[int]:
        prev = adv_env.target_prev_actions(state)
        return [
            greedy_action(self.policy, self.policy.slot_of(agent), state.observations[slot],
                          state.action_masks[slot], prev[slot])
            for slot, agent in enumerate(adv_env.targets)
        ]


class PassThrough:
    def reset(self, seed: int):
        pass

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> list[int]:
        base = adv_env.base_actions(state)
        return [base[agent] for agent in adv_env.targets]


def attacked_rollouts(env: Environment, base_policy: QTeamPolicy, k: Sequence[int], lam: float,
                      controller: Controller, n_episodes: int, seed: int) -> list[AttackStats]:
    adv_env = wrap_adversarial(env, base_policy, k, lam)
    results = []
    for episode_seed in episode_seeds(seed, n_episodes):
        controller.reset(episode_seed)
        state = adv_env.reset(episode_seed)
        log, team_return, regularized = [], 0.0, 0.0
        while not state.terminal:
            reward, state = adv_env.step(state, controller(adv_env, state))
            log.append(state.payload.last_deviations)
            team_return += state.payload.last_team_reward
            regularized += reward
        counts = tuple(int(c) for c in np.sum(log, axis=0)) if log else (0,) * len(adv_env.targets)
        results.append(AttackStats(counts, len(log), team_return, state.won, regularized, tuple(log)))
    return results


def rollout_attacked(env: Environment, base_policy: QTeamPolicy, attacker_policy: QTeamPolicy,
                     k: Sequence[int], lam: float, n_episodes: int, seed: int) -> list[AttackStats]:
    return attacked_rollouts(env, base_policy, k, lam, GreedyAttacker(attacker_policy), n_episodes, seed)


def rederive_attack_counts(step_log: Sequence[Sequence[int]], n_targets: int) -> tuple[int, ...]:
    """Per-agent attacked-step counts from a stored deviation log."""
    if not step_log:
        return (0,) * n_targets
    return tuple(int(c) for c in np.sum(np.asarray(step_log, dtype=np.int64), axis=0))


class ScriptedAttack:
    """Plays a fixed (step, agent, action) plan and a* everywhere else."""

    def __init__(self, plan: Sequence[tuple[int, int, int]]):
        self.plan = {(step, agent): action for step, agent, action in plan}

    def reset(self, seed: int):
        pass

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> list[int]:
        base = adv_env.base_actions(state)
        return [self.plan.get((state.step_index, agent), base[agent]) for agent in adv_env.targets]
