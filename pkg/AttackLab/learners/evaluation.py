from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import EmptyEvaluation
from ..mmdp import Environment
from .episodes import collect_episode, episode_seeds, greedy
from .policy import QTeamPolicy


@dataclass(frozen=True)
class EvalStats:
    # None when the environment has no win condition (tree games report returns)
    win_rate: float | None
    mean_return: float
    mean_episode_length: float
    n_episodes: int


def evaluate_policy(env: Environment, policy: QTeamPolicy, n_episodes: int, seed: int) -> EvalStats:
    """Fully greedy rollouts of a frozen team policy."""
    if n_episodes <= 0:
        raise EmptyEvaluation('evaluation needs at least one episode')
    choose = greedy(policy)
    returns, lengths, wins = [], [], []
    for episode_seed in episode_seeds(seed, n_episodes):
        result = collect_episode(env, episode_seed, choose)
        returns.append(result.episode_return)
        lengths.append(result.length)
        wins.append(result.won)
    return EvalStats(
        win_rate=float(np.mean(wins)) if env.reports_wins else None,
        mean_return=float(np.mean(returns)),
        mean_episode_length=float(np.mean(lengths)),
        n_episodes=n_episodes,
    )
