"""Hand-designed attacks: random timing, δ-threshold timing and dense argmin-Q.

Each attack reads the attacked agent's Q row from the frozen base policy at
the current observation and either passes a* through or replaces it.
"""
from __future__ import annotations

from typing import Literal, Sequence

import numpy as np

from ..attack.adversarial_env import AdversarialEnv
from ..attack.rollout import AttackStats, attacked_rollouts
from ..learners.policy import QTeamPolicy, argmin_action
from ..mmdp import EnvState, Environment, rng_for
from .delta import DeltaRule, delta_score

RandomMode = Literal['random', 'lowestQ']


def base_q_row(adv_env: AdversarialEnv, state: EnvState, slot: int) -> np.ndarray:
    agent = adv_env.targets[slot]
    policy = adv_env.base_policy
    prev = state.payload.prev_actions[agent]
    return policy.q_values(policy.slot_of(agent), state.observations[slot], prev)


class RandomTiming:
    """Each attacked agent deviates independently with probability ``prob``."""

    def __init__(self, mode: RandomMode, prob: float, seed: int = 0):
        if not 0.0 <= prob <= 1.0:
            raise ValueError(f'attack probability {prob} outside [0, 1]')
        self.mode = mode
        self.prob = prob
        self.seed = seed
        self.rng = rng_for(seed)

    def reset(self, seed: int):
        self.rng = rng_for(self.seed ^ seed)

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> list[int]:
        base = adv_env.base_actions(state)
        actions = []
        for slot, agent in enumerate(adv_env.targets):
            action = base[agent]
            if self.rng.random() < self.prob:
                mask = state.action_masks[slot]
                if self.mode == 'lowestQ':
                    action = argmin_action(base_q_row(adv_env, state, slot), mask)
                else:
                    others = [a for a in np.flatnonzero(mask) if a != base[agent]]
                    if others:
                        action = int(self.rng.choice(others))
            actions.append(action)
        return actions


class ThresholdTiming:
    """Replace a* by the argmin-Q action whenever δ ≥ threshold."""

    def __init__(self, rule: DeltaRule | str, threshold: float):
        self.rule = DeltaRule(rule)
        self.threshold = threshold

    def reset(self, seed: int):
        pass

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> list[int]:
        base = adv_env.base_actions(state)
        actions = []
        for slot, agent in enumerate(adv_env.targets):
            mask = np.asarray(state.action_masks[slot], dtype=bool)
            q = base_q_row(adv_env, state, slot)
            if delta_score(self.rule, q[mask[: len(q)]]) >= self.threshold:
                actions.append(argmin_action(q, mask))
            else:
                actions.append(base[agent])
        return actions


class DenseArgmin(ThresholdTiming):
    def __init__(self):
        super().__init__(DeltaRule.MAXDIFF, -np.inf)


def attack_random(mode: RandomMode, prob: float, base_policy: QTeamPolicy, env: Environment,
                  k: Sequence[int], n_episodes: int, seed: int, lam: float = 0.0) -> list[AttackStats]:
    return attacked_rollouts(env, base_policy, k, lam, RandomTiming(mode, prob, seed), n_episodes, seed)


def attack_rule_based(rule: DeltaRule | str, threshold: float, base_policy: QTeamPolicy, env: Environment,
                      k: Sequence[int], n_episodes: int, seed: int, lam: float = 0.0) -> list[AttackStats]:
    return attacked_rollouts(env, base_policy, k, lam, ThresholdTiming(rule, threshold), n_episodes, seed)


def attack_dense(base_policy: QTeamPolicy, env: Environment, k: Sequence[int],
                 n_episodes: int, seed: int, lam: float = 0.0) -> list[AttackStats]:
    return attacked_rollouts(env, base_policy, k, lam, DenseArgmin(), n_episodes, seed)


def threshold_grid(points: int = 1000, observed: Sequence[float] = ()) -> np.ndarray:
    """Evenly spaced thresholds on [0, 1] plus the exact observed δ values."""
    grid = np.linspace(0.0, 1.0, points)
    return np.unique(np.concatenate([grid, np.asarray(observed, dtype=np.float64)]))
