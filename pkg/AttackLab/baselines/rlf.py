"""Learned attack timing with a fixed (argmin-Q) attack action.

The timing learner sees the attacked agents' observations and chooses
``pass`` (0) or ``attack`` (1) for each of them. An attack forces the
agent's lowest-Q legal action and costs ``c_adv``.
"""
from __future__ import annotations

import logging
from typing import Sequence

import numpy as np

from ..attack.adversarial_env import AdversarialEnv, wrap_adversarial
from ..attack.rollout import AttackStats, attacked_rollouts
from ..environments.tree_games import TreeGameEnv
from ..errors import ConfigMismatch
from ..learners.config import TrainConfig
from ..learners.deep import train_network
from ..learners.policy import QTeamPolicy, argmin_action, greedy_action
from ..learners.tabular import train_tabular_q
from ..mmdp import EnvState, Environment, MmdpSpec
from .heuristics import base_q_row

logger = logging.getLogger(__name__)

PASS, ATTACK = 0, 1


def forced_actions(adv_env: AdversarialEnv, inner: EnvState, decisions: Sequence[int]) -> list[int]:
    base = adv_env.base_actions(inner)
    return [
        argmin_action(base_q_row(adv_env, inner, slot), inner.action_masks[slot])
        if decisions[slot] == ATTACK else base[agent]
        for slot, agent in enumerate(adv_env.targets)
    ]


class TimingEnv(Environment):
    def __init__(self, adv_env: AdversarialEnv, c_adv: float):
        if c_adv < 0:
            raise ConfigMismatch(f'c_adv must be >= 0, got {c_adv}')
        self.adv_env = adv_env
        self.c_adv = float(c_adv)
        self.reports_wins = adv_env.reports_wins
        inner = adv_env.spec
        self.spec = MmdpSpec(
            n_agents=inner.n_agents,
            action_counts=(2,) * inner.n_agents,
            obs_dims=inner.obs_dims,
            state_dim=inner.state_dim,
            horizon=inner.horizon,
            discount=inner.discount,
            initial_dist=inner.initial_dist,
        )
        self._masks = tuple(np.ones(2, dtype=bool) for _ in range(inner.n_agents))

    def _expose(self, inner: EnvState) -> EnvState:
        return EnvState(inner.global_state, inner.observations, inner.step_index, inner.terminal,
                        self._masks, inner.won, payload=inner)

    def _initial(self, rng: np.random.Generator) -> EnvState:
        return self._expose(self.adv_env._initial(rng))

    def _transition(self, state: EnvState, actions: tuple[int, ...]) -> tuple[float, EnvState]:
        inner = state.payload
        _, next_inner = self.adv_env.step(inner, forced_actions(self.adv_env, inner, actions))
        reward = -next_inner.payload.last_team_reward - self.c_adv * sum(actions)
        return reward, self._expose(next_inner)

    def fingerprint(self) -> str:
        return f'timing[{self.adv_env.fingerprint()}|c_adv={self.c_adv!r}]'


def train_rlf(env: Environment, base_policy: QTeamPolicy, k: Sequence[int], c_adv: float,
              train: TrainConfig) -> QTeamPolicy:
    timing_env = TimingEnv(wrap_adversarial(env, base_policy, k, 0.0), c_adv)
    targets = timing_env.adv_env.targets
    logger.info('training RL-F timing on agents %s with c_adv %g', targets, c_adv)
    if isinstance(env, TreeGameEnv):
        timing = train_tabular_q(timing_env, train, 'RL-F', agent_index=targets)
    else:
        timing = train_network(timing_env, 'QMIX', train, agent_index=targets)
        timing.algo = 'RL-F'
    timing.header.update({
        'role': 'timing',
        'targets': list(targets),
        'c_adv': float(c_adv),
        'base_policy': base_policy.fingerprint(),
        'env_fingerprint': env.fingerprint(),
    })
    timing.frozen = True
    return timing


class LearnedTiming:
    def __init__(self, timing: QTeamPolicy):
        self.timing = timing
        self._prev: list[int] = []

    def reset(self, seed: int):
        self._prev = []

    def __call__(self, adv_env: AdversarialEnv, state: EnvState) -> list[int]:
        if not self._prev:
            self._prev = [-1] * len(adv_env.targets)
        mask = np.ones(2, dtype=bool)
        decisions = [
            greedy_action(self.timing, slot, state.observations[slot], mask, self._prev[slot])
            for slot in range(len(adv_env.targets))
        ]
        self._prev = decisions
        return forced_actions(adv_env, state, decisions)


def rollout_rlf(env: Environment, base_policy: QTeamPolicy, timing: QTeamPolicy, k: Sequence[int],
                n_episodes: int, seed: int, lam: float = 0.0) -> list[AttackStats]:
    return attacked_rollouts(env, base_policy, k, lam, LearnedTiming(timing), n_episodes, seed)
