"""Experiment configuration.

Config files are UTF-8 ``key = value`` lines with dotted section prefixes::

    # Example-1 tree, learned sparse attack
    env.kind = tree_example1
    env.T = 6
    attack.method = OPT
    attack.lambda = 1.0
    attack.train.episodes = 20000

Values parse as bool (``true``/``false``), ``none``, int, float or a
comma-separated list of those; anything else stays a string. Unknown keys
and wrong types are ``ConfigError``.
"""
from __future__ import annotations

import enum
import hashlib
import math
from pathlib import Path
from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from ..baselines.delta import DeltaRule
from ..environments.goal_gather import GridTeamSpec
from ..errors import ConfigError
from ..learners.config import BaseAlgo, TrainConfig

EnvKind = Literal['tree_example1', 'tree_example2', 'tree_random', 'goalgather']
AttackMethod = Literal['OPT', 'Ra-R', 'Ra-L', 'Ru-B', 'Ru-D', 'RL-F', 'oracle-budget', 'oracle-reg', 'none']

COMMON_PARAMS = {'method', 'targets'}
METHOD_PARAMS = {
    'OPT': {'lam', 'lambdas', 'attacker_algo', 'train'},
    'Ra-R': {'prob'},
    'Ra-L': {'prob'},
    'Ru-B': {'rule', 'threshold', 'thresholds'},
    'Ru-D': set(),
    'RL-F': {'c_adv', 'train'},
    'oracle-budget': {'N'},
    'oracle-reg': {'lam', 'lambdas'},
    'none': set(),
}
TREE_ONLY = {'oracle-budget', 'oracle-reg'}


def _listify(value):
    return [value] if isinstance(value, (int, float)) and not isinstance(value, bool) else value


class EnvConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    kind: EnvKind = 'tree_example1'
    T: int = Field(default=6, ge=1)
    t: int = 3
    p: int = 1
    branching: int = Field(default=2, ge=2)
    tree_seed: int = 0
    grid: GridTeamSpec = Field(default_factory=GridTeamSpec)

    @property
    def is_tree(self) -> bool:
        return self.kind.startswith('tree_')


class BaseSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    algo: BaseAlgo = 'tabular-VI'
    train: TrainConfig = Field(default_factory=TrainConfig)


class AttackMethodConfig(BaseModel):
    model_config = ConfigDict(extra='forbid', populate_by_name=True)

    method: AttackMethod = 'none'
    targets: list[int] = Field(default_factory=lambda: [0], min_length=1)
    lam: float = Field(default=1.0, ge=0.0, alias='lambda')
    # λ grid for sweep_lambda
    lambdas: list[float] = Field(default_factory=list)
    attacker_algo: Literal['tabular-Q', 'single-agent-QMIX', 'multi-agent-QMIX'] | None = None
    prob: float = Field(default=0.0, ge=0.0, le=1.0)
    rule: DeltaRule = DeltaRule.MAXDIFF
    threshold: float = 0.5
    # Ru-B threshold grid for match_baselines
    thresholds: list[float] = Field(default_factory=list)
    c_adv: float = Field(default=0.0, ge=0.0)
    N: int = Field(default=2, ge=0)
    train: TrainConfig = Field(default_factory=TrainConfig)

    @field_validator('targets', 'lambdas', 'thresholds', mode='before')
    @classmethod
    def listify(cls, value):
        return _listify(value)

    @field_validator('lam', 'threshold', 'c_adv')
    @classmethod
    def finite(cls, value: float, info) -> float:
        if info.field_name != 'threshold' and not math.isfinite(value):
            raise ValueError(f'{info.field_name} must be finite')
        return value

    @model_validator(mode='after')
    def parameters_match_method(self):
        allowed = COMMON_PARAMS | METHOD_PARAMS[self.method]
        stray = sorted(self.model_fields_set - allowed)
        if stray:
            raise ValueError(f'attack.{", attack.".join(stray)} not used by method {self.method}')
        return self

    @property
    def parameter(self) -> str:
        if self.method in ('OPT', 'oracle-reg'):
            return f'lambda={self.lam:g}'
        if self.method in ('Ra-R', 'Ra-L'):
            return f'p={self.prob:g}'
        if self.method == 'Ru-B':
            return f'{self.rule.value}>={self.threshold:g}'
        if self.method == 'RL-F':
            return f'c_adv={self.c_adv:g}'
        if self.method == 'oracle-budget':
            return f'N={self.N}'
        return '-'


class EvalSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    episodes: int = Field(default=1000, ge=1)


class ExperimentSection(BaseModel):
    model_config = ConfigDict(extra='forbid')

    name: str = 'experiment'
    seeds: int = Field(default=5, ge=1)
    master_seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1)


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra='forbid')

    env: EnvConfig = Field(default_factory=EnvConfig)
    base: BaseSection = Field(default_factory=BaseSection)
    attack: AttackMethodConfig = Field(default_factory=AttackMethodConfig)
    eval: EvalSection = Field(default_factory=EvalSection)
    experiment: ExperimentSection = Field(default_factory=ExperimentSection)

    @model_validator(mode='after')
    def method_fits_environment(self):
        if self.attack.method in TREE_ONLY:
            if not self.env.is_tree:
                raise ValueError(f'{self.attack.method} is defined on tree games only')
            if self.base.algo != 'tabular-VI':
                raise ValueError(f'{self.attack.method} attacks the exact tabular-VI base policy')
        if self.base.algo.startswith('tabular') and not self.env.is_tree:
            raise ValueError(f'{self.base.algo} runs on tree games only')
        return self

    def with_attack(self, **changes) -> 'ExperimentConfig':
        """Copy with attack parameters replaced (parameters of the old method are dropped)."""
        current = self.attack.model_dump(by_alias=True, exclude_unset=True)
        if 'method' in changes:
            current = {key: value for key, value in current.items() if key in COMMON_PARAMS}
        aliases = {'lam': 'lambda'}
        current.update({aliases.get(key, key): value for key, value in changes.items()})
        data = self.model_dump(by_alias=True, exclude_unset=True)
        data['attack'] = current
        return ExperimentConfig.model_validate(data)


def parse_value(text: str) -> Any:
    text = text.strip()
    if text == '[]':
        return []
    if ',' in text:
        return [parse_value(part) for part in text.split(',') if part.strip()]
    lowered = text.lower()
    if lowered in ('true', 'false'):
        return lowered == 'true'
    if lowered == 'none':
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def parse_config_text(text: str) -> ExperimentConfig:
    data: dict[str, Any] = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            raise ConfigError(f'line {number}: expected key = value, got {raw!r}')
        key, value = (part.strip() for part in line.split('=', 1))
        node = data
        *sections, leaf = key.split('.')
        for section in sections:
            node = node.setdefault(section, {})
            if not isinstance(node, dict):
                raise ConfigError(f'line {number}: {key} conflicts with an earlier value')
        if leaf in node:
            raise ConfigError(f'line {number}: duplicate key {key}')
        node[leaf] = parse_value(value)
    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as err:
        raise ConfigError(str(err)) from err


def load_config(path: str | Path) -> ExperimentConfig:
    try:
        text = Path(path).read_text(encoding='utf-8')
    except OSError as err:
        raise ConfigError(f'cannot read config {path}: {err}') from err
    return parse_config_text(text)


def _format(value: Any) -> str:
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if value is None:
        return 'none'
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, list):
        return ', '.join(_format(item) for item in value) + (',' if len(value) == 1 else '') if value else '[]'
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _flatten(prefix: str, data: dict[str, Any]) -> list[tuple[str, Any]]:
    items = []
    for key in sorted(data):
        value = data[key]
        name = f'{prefix}.{key}' if prefix else key
        if isinstance(value, dict):
            items.extend(_flatten(name, value))
        else:
            items.append((name, value))
    return items


def dump_config(config: ExperimentConfig) -> str:
    """Canonical text form: every key explicitly set, sorted, one per line."""
    data = config.model_dump(by_alias=True, exclude_unset=True)
    return ''.join(f'{key} = {_format(value)}\n' for key, value in _flatten('', data))


def config_hash(config: ExperimentConfig | str) -> str:
    text = config if isinstance(config, str) else dump_config(config)
    return hashlib.sha256(text.encode('utf-8')).hexdigest()
