"""Run records: what one experiment produced, persisted as ``run_record.json``."""
from __future__ import annotations

import logging
from pathlib import Path

from pydantic import BaseModel, Field

from ..errors import RecordMismatch
from .config import ExperimentConfig, config_hash, parse_config_text

logger = logging.getLogger(__name__)

RECORD_FILE = 'run_record.json'


class SeedResult(BaseModel):
    seed_index: int
    seed: int
    # None when the environment has no win condition
    win_rate: float | None = None
    mean_return: float = 0.0
    mean_regularized_return: float = 0.0
    # mean attacked steps per episode, one entry per attacked agent
    attacked_steps: list[float] = Field(default_factory=list)
    mean_total_steps: float = 0.0
    n_episodes: int = 0
    failed: bool = False
    error: str | None = None
    artifacts: dict[str, str] = Field(default_factory=dict)

    @property
    def score(self) -> float:
        return self.win_rate if self.win_rate is not None else self.mean_return

    @property
    def attacked_fraction(self) -> float:
        if self.mean_total_steps == 0:
            return 0.0
        return sum(self.attacked_steps) / self.mean_total_steps


class Aggregate(BaseModel):
    retained: list[int]
    scores: list[float]
    mean_score: float
    mean_win_rate: float | None = None
    mean_return: float
    attacked_steps: list[float]
    mean_total_steps: float

    @property
    def attacked_fraction(self) -> float:
        if self.mean_total_steps == 0:
            return 0.0
        return sum(self.attacked_steps) / self.mean_total_steps


class RunRecord(BaseModel):
    name: str
    method: str
    parameter: str
    config_text: str
    config_hash: str
    seeds: list[SeedResult] = Field(default_factory=list)
    aggregate: Aggregate | None = None
    degraded: bool = False
    artifacts: dict[str, str] = Field(default_factory=dict)
    wall_clock: float = 0.0

    @property
    def config(self) -> ExperimentConfig:
        return parse_config_text(self.config_text)

    def check_hash(self):
        if config_hash(self.config_text) != self.config_hash:
            raise RecordMismatch(f'record {self.name} does not match its stored config')

    def comparable(self) -> dict:
        """Everything except timing, for reproducibility checks."""
        return self.model_dump(exclude={'wall_clock'})


def save_record(record: RunRecord, directory: str | Path) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    path = directory / RECORD_FILE
    path.write_text(record.model_dump_json(indent=2), encoding='utf-8')
    logger.debug('wrote %s', path)
    return path


def load_record(path: str | Path) -> RunRecord:
    path = Path(path)
    if path.is_dir():
        path = path / RECORD_FILE
    record = RunRecord.model_validate_json(path.read_text(encoding='utf-8'))
    record.check_hash()
    return record


def find_records(root: str | Path) -> list[RunRecord]:
    return [load_record(path) for path in sorted(Path(root).rglob(RECORD_FILE))]


def merge_records(records: list[RunRecord]) -> RunRecord:
    """Combine shards of one experiment; refuses records from different configs."""
    if not records:
        raise RecordMismatch('nothing to merge')
    first = records[0]
    for record in records[1:]:
        if record.config_hash != first.config_hash:
            raise RecordMismatch(f'cannot merge {record.name} ({record.config_hash[:12]}) '
                                 f'into {first.name} ({first.config_hash[:12]})')
    seeds = sorted((seed for record in records for seed in record.seeds), key=lambda s: s.seed_index)
    return first.model_copy(update={
        'seeds': seeds,
        'aggregate': None,
        'degraded': any(record.degraded for record in records),
        'artifacts': {k: v for record in records for k, v in record.artifacts.items()},
        'wall_clock': sum(record.wall_clock for record in records),
    })
