from __future__ import annotations

import logging
import math
from typing import Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator

from ..environments.tree_games import TreeGameEnv
from ..errors import ConfigMismatch
from ..learners.config import TrainConfig
from ..learners.deep import train_network
from ..learners.policy import QTeamPolicy
from ..learners.tabular import train_tabular_q
from .adversarial_env import AdversarialEnv

logger = logging.getLogger(__name__)

AttackerAlgo = Literal['tabular-Q', 'single-agent-QMIX', 'multi-agent-QMIX']


class AttackConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    targets: list[int] = Field(min_length=1)
    lam: float = Field(default=1.0, ge=0.0, alias='lambda')
    train: TrainConfig = Field(default_factory=TrainConfig)
    attacker_algo: AttackerAlgo = 'tabular-Q'

    @field_validator('lam')
    @classmethod
    def finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError('lambda must be finite')
        return value


def default_attacker_algo(adv_env: AdversarialEnv) -> AttackerAlgo:
    if isinstance(adv_env.env, TreeGameEnv):
        return 'tabular-Q'
    return 'single-agent-QMIX' if len(adv_env.targets) == 1 else 'multi-agent-QMIX'


def check_attacker_algo(adv_env: AdversarialEnv, algo: AttackerAlgo):
    m = len(adv_env.targets)
    if algo == 'tabular-Q' and not isinstance(adv_env.env, TreeGameEnv):
        raise ConfigMismatch('tabular attackers run on tree games only')
    if algo == 'single-agent-QMIX' and m != 1:
        raise ConfigMismatch(f'single-agent-QMIX attacks exactly one agent, got {m}')
    if algo == 'multi-agent-QMIX' and m < 2:
        raise ConfigMismatch('multi-agent-QMIX needs at least two attacked agents')


def train_attack(adv_env: AdversarialEnv, config: AttackConfig) -> QTeamPolicy:
    """Learn the sparse attacker for one (targets, λ) pair and return it frozen.

    The attacker is a team of m agents in the adversarial environment. Each
    slot acts for one attacked agent; for m >= 2 their Q values meet in the
    mixer, for m = 1 the mixer is a state-conditioned monotone scalar map.
    """
    if tuple(config.targets) != adv_env.targets or config.lam != adv_env.lam:
        raise ConfigMismatch('attack config disagrees with the adversarial environment')
    check_attacker_algo(adv_env, config.attacker_algo)
    logger.info('training %s attacker on agents %s with lambda %g',
                config.attacker_algo, adv_env.targets, adv_env.lam)
    if config.attacker_algo == 'tabular-Q':
        attacker = train_tabular_q(adv_env, config.train, 'tabular-Q', agent_index=adv_env.targets)
    else:
        attacker = train_network(adv_env, 'QMIX', config.train, agent_index=adv_env.targets)
        attacker.algo = config.attacker_algo
    attacker.header.update({
        'role': 'attacker',
        'targets': list(adv_env.targets),
        'lambda': adv_env.lam,
        'base_policy': adv_env.base_policy.fingerprint(),
        'env_fingerprint': adv_env.env.fingerprint(),
        'seed': config.train.seed,
    })
    attacker.frozen = True
    return attacker
