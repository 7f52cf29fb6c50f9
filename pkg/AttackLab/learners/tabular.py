"""Tabular learners for tree games: exact value iteration and ε-greedy Q-learning."""
from __future__ import annotations

import logging
from collections import defaultdict

import numpy as np
from tqdm import tqdm

from ..baselines.oracles import value_iteration
from ..environments.tree_games import TreeGameEnv
from ..errors import ConfigMismatch
from ..mmdp import Environment, rng_for
from .config import TrainConfig
from .episodes import epsilon_greedy, episode_seeds
from .policy import QTeamPolicy

logger = logging.getLogger(__name__)


def policy_from_value_iteration(env: TreeGameEnv) -> QTeamPolicy:
    if not isinstance(env, TreeGameEnv):
        raise ConfigMismatch('tabular-VI needs a tree game')
    q_table = value_iteration(env.tree)
    table = {}
    for prefix, row in q_table.rows():
        table[env.observation_for(prefix).tobytes()] = row.copy()
    return QTeamPolicy(
        mode='tabular',
        algo='tabular-VI',
        action_counts=env.spec.action_counts,
        obs_dims=env.spec.obs_dims,
        agent_index=(0,),
        tables=[table],
        frozen=True,
        header={'env_fingerprint': env.fingerprint()},
    )


def train_tabular_q(env: Environment, config: TrainConfig, algo: str = 'tabular-Q',
                    agent_index: tuple[int, ...] | None = None) -> QTeamPolicy:
    """Independent ε-greedy Q-learning, one table per agent, online TD(0) updates.

    The default ``'constant'`` schedule steps by ``learning_rate`` (1.0
    unless set), which is exact on deterministic trees once every pair has
    been updated after its successors. ``'visit'`` steps by 1/N(o, a): it
    averages every bootstrapped target seen so far, so early underestimates
    fade only slowly.
    """
    step = config.step_size('tabular')
    spec = env.spec
    n = spec.n_agents
    policy = QTeamPolicy(
        mode='tabular',
        algo=algo,
        action_counts=spec.action_counts,
        obs_dims=spec.obs_dims,
        agent_index=agent_index or tuple(range(n)),
        tables=[{} for _ in range(n)],
    )
    visits = [defaultdict(lambda slot=slot: np.zeros(spec.action_counts[slot])) for slot in range(n)]
    gamma = spec.discount if config.discount is None else config.discount
    rng = rng_for(config.seed)
    seeds = episode_seeds(config.seed, config.episodes)
    recent = []

    for episode in tqdm(range(config.episodes), disable=not config.progress, desc=algo):
        choose = epsilon_greedy(policy, config.epsilon(episode), rng)
        state = env.reset(seeds[episode])
        prev = [-1] * n
        total = 0.0
        while not state.terminal:
            actions = choose(state, prev)
            reward, next_state = env.step(state, actions)
            total += reward
            for slot in range(n):
                table = policy.tables[slot]
                key = state.observations[slot].tobytes()
                row = table.setdefault(key, np.zeros(spec.action_counts[slot]))
                target = reward
                if not next_state.terminal:
                    next_row = table.get(next_state.observations[slot].tobytes())
                    if next_row is not None:
                        mask = next_state.action_masks[slot]
                        target += gamma * float(np.max(np.where(mask, next_row, -np.inf)))
                action = actions[slot]
                counts = visits[slot][key]
                counts[action] += 1
                alpha = 1.0 / counts[action] if config.lr_schedule == 'visit' else step
                row[action] += alpha * (target - row[action])
            prev = list(actions)
            state = next_state
        recent.append(total)
        if (episode + 1) % config.log_every == 0:
            mean_return = float(np.mean(recent))
            policy.history.append({'episode': episode + 1, 'mean_return': mean_return})
            logger.info('%s episode %d eps %.3f mean return %.3f states %d',
                        algo, episode + 1, config.epsilon(episode), mean_return, len(policy.tables[0]))
            recent.clear()

    policy.frozen = True
    return policy
