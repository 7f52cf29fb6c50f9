"""GoalGather: a cooperative gridworld where the team must occupy every goal at once."""
from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..mmdp import EnvState, Environment, MmdpSpec

UP, DOWN, LEFT, RIGHT, STAY = range(5)
MOVES = {UP: (0, -1), DOWN: (0, 1), LEFT: (-1, 0), RIGHT: (1, 0), STAY: (0, 0)}


class GridTeamSpec(BaseModel):
    model_config = ConfigDict(extra='forbid', frozen=True)

    width: int = Field(default=5, ge=2)
    height: int = Field(default=5, ge=2)
    n_agents: int = Field(default=2, ge=1)
    n_goals: int = Field(default=2, ge=1)
    horizon: int = Field(default=40, ge=1)
    obs_radius: int = Field(default=0, ge=0)
    reward_win: float = 10.0
    reward_step: float = -0.1
    reward_progress: float = 0.5

    @model_validator(mode='after')
    def check_layout(self):
        if self.n_goals != self.n_agents:
            raise ValueError('n_goals must equal n_agents')
        if 2 * self.n_agents > self.width * self.height:
            raise ValueError('grid too small for distinct agent and goal cells')
        return self


@dataclass(frozen=True)
class GridPayload:
    agents: tuple[tuple[int, int], ...]
    goals: tuple[tuple[int, int], ...]
    best_coverage: int


def coverage(agents, goals) -> int:
    """Goals occupied by exactly one agent."""
    return sum(1 for goal in goals if sum(1 for pos in agents if pos == goal) == 1)


def goalgather_dynamics(spec: GridTeamSpec, payload: GridPayload, step_index: int,
                        joint_action) -> tuple[float, GridPayload, bool, bool]:
    """Move every agent at once; returns (reward, next payload, terminal, won).

    Moves off the grid leave the agent where it is.
    """
    agents = []
    for (x, y), action in zip(payload.agents, joint_action):
        dx, dy = MOVES[int(action)]
        agents.append((min(max(x + dx, 0), spec.width - 1), min(max(y + dy, 0), spec.height - 1)))
    covered = coverage(agents, payload.goals)
    reward = spec.reward_step + spec.reward_progress * max(0, covered - payload.best_coverage)
    won = covered == spec.n_goals
    if won:
        reward += spec.reward_win
    terminal = won or step_index + 1 >= spec.horizon
    return reward, GridPayload(tuple(agents), payload.goals, max(covered, payload.best_coverage)), terminal, won


class GoalGatherEnv(Environment):
    def __init__(self, grid: GridTeamSpec | None = None):
        self.grid = grid or GridTeamSpec()
        n = self.grid.n_agents
        obs_dim = 2 + 3 * n + 3 * (n - 1)
        self.spec = MmdpSpec(
            n_agents=n,
            action_counts=(5,) * n,
            obs_dims=(obs_dim,) * n,
            state_dim=4 * n + 1,
            horizon=self.grid.horizon,
            discount=1.0,
            initial_dist='uniform over distinct agent and goal cells',
        )
        self._masks = tuple(np.ones(5, dtype=bool) for _ in range(n))

    def _scale(self, dx: int, dy: int) -> tuple[float, float]:
        return dx / (self.grid.width - 1), dy / (self.grid.height - 1)

    def _visible(self, origin, other) -> bool:
        radius = self.grid.obs_radius
        if radius == 0:
            return True
        return max(abs(origin[0] - other[0]), abs(origin[1] - other[1])) <= radius

    def observe(self, payload: GridPayload, agent: int) -> np.ndarray:
        me = payload.agents[agent]
        features = list(self._scale(*me))
        others = [pos for i, pos in enumerate(payload.agents) if i != agent]
        for entity in list(payload.goals) + others:
            if self._visible(me, entity):
                features.extend(self._scale(entity[0] - me[0], entity[1] - me[1]))
                features.append(1.0)
            else:
                features.extend((0.0, 0.0, 0.0))
        return np.array(features)

    def global_state(self, payload: GridPayload, step_index: int) -> np.ndarray:
        features = []
        for pos in payload.agents + payload.goals:
            features.extend(self._scale(*pos))
        features.append(step_index / self.grid.horizon)
        return np.array(features)

    def state_from(self, payload: GridPayload, step_index: int = 0,
                   terminal: bool = False, won: bool = False) -> EnvState:
        return EnvState(
            global_state=self.global_state(payload, step_index),
            observations=tuple(self.observe(payload, i) for i in range(self.grid.n_agents)),
            step_index=step_index,
            terminal=terminal,
            action_masks=self._masks,
            won=won,
            payload=payload,
        )

    def _initial(self, rng: np.random.Generator) -> EnvState:
        n = self.grid.n_agents
        cells = rng.choice(self.grid.width * self.grid.height, size=2 * n, replace=False)
        positions = [(int(c) % self.grid.width, int(c) // self.grid.width) for c in cells]
        payload = GridPayload(tuple(positions[:n]), tuple(positions[n:]), 0)
        return self.state_from(payload)

    def _transition(self, state: EnvState, actions: tuple[int, ...]) -> tuple[float, EnvState]:
        reward, payload, terminal, won = goalgather_dynamics(self.grid, state.payload, state.step_index, actions)
        return reward, self.state_from(payload, state.step_index + 1, terminal, won)

    def fingerprint(self) -> str:
        digest = hashlib.sha256(self.grid.model_dump_json().encode()).hexdigest()[:16]
        return f'goalgather:{digest}'
