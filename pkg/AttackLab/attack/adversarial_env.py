"""The attacker's view of a frozen team.

``AdversarialEnv`` turns (environment, frozen base policy, target agents,
λ) into an ordinary ``Environment`` over the m attacked agents. Agents
outside the target set always play their greedy base action; the exposed
reward is ``-r - λ * deviations`` where a deviation is an attacked agent
taking anything other than its own greedy base action.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import BadTargets, ConfigMismatch
from ..learners.policy import QTeamPolicy, team_greedy_actions
from ..mmdp import EnvState, Environment, MmdpSpec


@dataclass(frozen=True)
class AdversarialPayload:
    base_state: EnvState
    # previous action of every environment agent, -1 before the first step
    prev_actions: tuple[int, ...]
    # greedy base actions at this state; empty once terminal
    base_actions: tuple[int, ...]
    last_team_reward: float = 0.0
    last_deviations: tuple[int, ...] = ()
    last_joint_action: tuple[int, ...] = ()


def check_targets(targets: Sequence[int], n_agents: int) -> tuple[int, ...]:
    targets = tuple(int(k) for k in targets)
    if not targets:
        raise BadTargets('at least one agent must be attacked')
    if len(set(targets)) != len(targets):
        raise BadTargets(f'duplicate target agents in {targets}')
    if any(not 0 <= k < n_agents for k in targets):
        raise BadTargets(f'target agents {targets} out of range for {n_agents} agents')
    return targets


class AdversarialEnv(Environment):
    def __init__(self, env: Environment, base_policy: QTeamPolicy, targets: Sequence[int], lam: float):
        if not base_policy.frozen:
            raise ConfigMismatch('the base policy must be frozen before it is attacked')
        if base_policy.n_slots != env.spec.n_agents or base_policy.obs_dims != env.spec.obs_dims:
            raise ConfigMismatch('base policy does not control this environment')
        if not math.isfinite(lam) or lam < 0:
            raise ConfigMismatch(f'lambda must be finite and >= 0, got {lam}')
        self.env = env
        self.base_policy = base_policy
        self.targets = check_targets(targets, env.spec.n_agents)
        self.lam = float(lam)
        self.reports_wins = env.reports_wins
        base = env.spec
        self.spec = MmdpSpec(
            n_agents=len(self.targets),
            action_counts=tuple(base.action_counts[k] for k in self.targets),
            obs_dims=tuple(base.obs_dims[k] for k in self.targets),
            state_dim=base.state_dim,
            horizon=base.horizon,
            discount=base.discount,
            initial_dist=base.initial_dist,
        )

    def wrap(self, base_state: EnvState, prev_actions: tuple[int, ...], **last) -> EnvState:
        base_actions = () if base_state.terminal else tuple(team_greedy_actions(
            self.base_policy, base_state.observations, base_state.action_masks, prev_actions))
        return EnvState(
            global_state=base_state.global_state,
            observations=tuple(base_state.observations[k] for k in self.targets),
            step_index=base_state.step_index,
            terminal=base_state.terminal,
            action_masks=tuple(base_state.action_masks[k] for k in self.targets),
            won=base_state.won,
            payload=AdversarialPayload(base_state, prev_actions, base_actions, **last),
        )

    def _initial(self, rng: np.random.Generator) -> EnvState:
        base_state = self.env._initial(rng)
        return self.wrap(base_state, (-1,) * self.env.spec.n_agents)

    def _transition(self, state: EnvState, actions: tuple[int, ...]) -> tuple[float, EnvState]:
        payload: AdversarialPayload = state.payload
        joint = list(payload.base_actions)
        deviations = []
        for slot, agent in enumerate(self.targets):
            joint[agent] = actions[slot]
            deviations.append(int(actions[slot] != payload.base_actions[agent]))
        team_reward, next_base = self.env.step(payload.base_state, joint)
        reward = -team_reward - self.lam * sum(deviations)
        next_state = self.wrap(next_base, tuple(joint), last_team_reward=team_reward,
                               last_deviations=tuple(deviations), last_joint_action=tuple(joint))
        return reward, next_state

    def base_actions(self, state: EnvState) -> tuple[int, ...]:
        return state.payload.base_actions

    def target_prev_actions(self, state: EnvState) -> list[int]:
        return [state.payload.prev_actions[k] for k in self.targets]

    def fingerprint(self) -> str:
        return (f'adversarial[{self.env.fingerprint()}|k={",".join(map(str, self.targets))}'
                f'|lambda={self.lam!r}|base={self.base_policy.fingerprint()}]')


def wrap_adversarial(env: Environment, base_policy: QTeamPolicy, k: Sequence[int], lam: float) -> AdversarialEnv:
    return AdversarialEnv(env, base_policy, k, lam)
