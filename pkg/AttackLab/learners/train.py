from __future__ import annotations

import hashlib
import logging

from ..environments.tree_games import TreeGameEnv
from ..errors import ConfigMismatch
from ..mmdp import Environment
from .config import BaseAlgo, TrainConfig
from .deep import train_network
from .policy import QTeamPolicy
from .tabular import policy_from_value_iteration, train_tabular_q

logger = logging.getLogger(__name__)


def train_base(env: Environment, algo: BaseAlgo, config: TrainConfig) -> QTeamPolicy:
    """Train (or solve for) the team policy that attacks will target; returns it frozen."""
    is_tree = isinstance(env, TreeGameEnv)
    if algo in ('tabular-VI', 'tabular-Q') and not is_tree:
        raise ConfigMismatch(f'{algo} runs on tree games only')
    logger.info('training base policy with %s on %s', algo, env.fingerprint())
    if algo == 'tabular-VI':
        policy = policy_from_value_iteration(env)
    elif algo == 'tabular-Q':
        policy = train_tabular_q(env, config, algo)
    elif algo in ('VDN', 'QMIX'):
        policy = train_network(env, algo, config)
    else:
        raise ConfigMismatch(f'unknown base algorithm {algo}')
    policy.header.update({'env_fingerprint': env.fingerprint(), 'seed': config.seed,
                          'config_hash': config_digest(config)})
    policy.frozen = True
    return policy


def config_digest(config: TrainConfig) -> str:
    return hashlib.sha256(config.model_dump_json().encode()).hexdigest()[:16]
