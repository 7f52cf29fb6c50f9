"""Multi-agent MDP contract shared by every environment, learner and attack.

An environment is a plain state machine: ``reset`` draws an initial
``EnvState`` from p0 and ``step`` applies a ``JointAction``. States are
immutable values, so a rollout never mutates anything the caller holds.
"""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import ConfigError, IllegalAction, SteppedTerminal

logger = logging.getLogger(__name__)

SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class MmdpSpec:
    n_agents: int
    action_counts: tuple[int, ...]
    obs_dims: tuple[int, ...]
    state_dim: int
    horizon: int
    discount: float = 1.0
    initial_dist: str = "deterministic"

    def __post_init__(self):
        if self.n_agents < 1:
            raise ConfigError('n_agents must be >= 1')
        if len(self.action_counts) != self.n_agents or len(self.obs_dims) != self.n_agents:
            raise ConfigError('one action count and one obs dim per agent')
        if any(count < 2 for count in self.action_counts):
            raise ConfigError('every agent needs at least 2 actions')
        if self.horizon < 1:
            raise ConfigError('horizon must be >= 1')
        if not 0.0 <= self.discount <= 1.0:
            raise ConfigError('discount must lie in [0, 1]')


@dataclass(frozen=True)
class EnvState:
    global_state: np.ndarray
    observations: tuple[np.ndarray, ...]
    step_index: int
    terminal: bool
    action_masks: tuple[np.ndarray, ...]
    won: bool = False
    # environment-private payload (positions, action prefix, wrapped state ...)
    payload: Any = None


@dataclass(frozen=True)
class JointAction:
    actions: tuple[int, ...]

    @classmethod
    def of(cls, *actions: int) -> 'JointAction':
        return cls(tuple(int(a) for a in actions))

    def __len__(self):
        return len(self.actions)

    def __getitem__(self, index):
        return self.actions[index]

    def __iter__(self):
        return iter(self.actions)


@dataclass(frozen=True)
class Transition:
    state: np.ndarray
    obs_k: tuple[np.ndarray, ...]
    actions_k: tuple[int, ...]
    reward: float
    next_state: np.ndarray
    next_obs_k: tuple[np.ndarray, ...]
    next_masks_k: tuple[np.ndarray, ...]
    terminal: bool
    # previous own action of each agent, -1 at the first step
    prev_actions_k: tuple[int, ...] = ()


@dataclass
class Trajectory:
    steps: list[tuple[EnvState, JointAction, float]] = field(default_factory=list)
    final_state: EnvState | None = None

    @property
    def episode_return(self) -> float:
        return float(sum(reward for _, _, reward in self.steps))

    def __len__(self):
        return len(self.steps)


def full_masks(spec: MmdpSpec) -> tuple[np.ndarray, ...]:
    return tuple(np.ones(count, dtype=bool) for count in spec.action_counts)


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) & SEED_MASK)


class Environment(ABC):
    """Validating front for a concrete environment.

    Subclasses implement ``_initial`` and ``_transition``; the public
    ``reset``/``step`` enforce the contract (seed handling, terminal and
    mask checks) so every environment fails the same way.
    """

    spec: MmdpSpec
    reports_wins: bool = True

    def reset(self, seed: int) -> EnvState:
        return self._initial(rng_for(seed))

    def step(self, state: EnvState, action: JointAction | Sequence[int]) -> tuple[float, EnvState]:
        if state.terminal:
            raise SteppedTerminal(f'step called on a terminal state at t={state.step_index}')
        actions = action.actions if isinstance(action, JointAction) else tuple(int(a) for a in action)
        if len(actions) != self.spec.n_agents:
            raise IllegalAction(f'expected {self.spec.n_agents} actions, got {len(actions)}')
        for agent, (act, mask) in enumerate(zip(actions, state.action_masks)):
            if not 0 <= act < len(mask) or not mask[act]:
                raise IllegalAction(f'agent {agent} cannot take action {act}')
        reward, next_state = self._transition(state, actions)
        return float(reward), next_state

    @abstractmethod
    def _initial(self, rng: np.random.Generator) -> EnvState:
        ...

    @abstractmethod
    def _transition(self, state: EnvState, actions: tuple[int, ...]) -> tuple[float, EnvState]:
        ...

    def fingerprint(self) -> str:
        return f'{type(self).__name__}:{self.spec}'


def env_reset(env: Environment, seed: int) -> EnvState:
    return env.reset(seed)


def env_step(env: Environment, state: EnvState, action: JointAction | Sequence[int]) -> tuple[float, EnvState]:
    return env.step(state, action)


def run_episode(env: Environment, seed: int,
                choose: Callable[[EnvState], Sequence[int]]) -> Trajectory:
    """Roll one episode, asking ``choose`` for the joint action at every step."""
    state = env.reset(seed)
    trajectory = Trajectory()
    while not state.terminal:
        action = JointAction.of(*choose(state))
        reward, next_state = env.step(state, action)
        trajectory.steps.append((state, action, reward))
        state = next_state
    trajectory.final_state = state
    return trajectory
