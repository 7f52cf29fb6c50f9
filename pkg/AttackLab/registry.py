"""Run registry on top of the SQLAlchemy session."""
from __future__ import annotations

import logging

from sqlalchemy.orm import Session

from .harness.records import RunRecord
from .models import Runs, SeedResults

logger = logging.getLogger(__name__)


def register_run(db: Session, record: RunRecord) -> int:
    run = Runs(
        name=record.name,
        method=record.method,
        parameter=record.parameter,
        config_hash=record.config_hash,
        config_text=record.config_text,
        degraded=record.degraded,
        mean_score=record.aggregate.mean_score if record.aggregate else None,
        record_path=record.artifacts.get('record'),
        record_json=record.model_dump_json(),
        wall_clock=record.wall_clock,
    )
    for seed in record.seeds:
        run.seeds.append(SeedResults(
            seed_index=seed.seed_index,
            # u64 seeds overflow sqlite integers
            seed=str(seed.seed),
            win_rate=seed.win_rate,
            mean_return=seed.mean_return,
            attacked_steps=','.join(f'{x:.6f}' for x in seed.attacked_steps),
            mean_total_steps=seed.mean_total_steps,
            failed=seed.failed,
            error=seed.error,
        ))
    db.add(run)
    db.commit()
    db.refresh(run)
    logger.info('registered run %d (%s %s)', run.id, run.method, run.parameter)
    return run.id


def list_runs(db: Session, method: str | None = None) -> list[Runs]:
    query = db.query(Runs)
    if method is not None:
        query = query.filter(Runs.method == method)
    return query.order_by(Runs.id).all()


def get_run(db: Session, run_id: int) -> Runs | None:
    return db.query(Runs).filter(Runs.id == run_id).first()


def delete_run(db: Session, run_id: int) -> bool:
    run = get_run(db, run_id)
    if run is None:
        return False
    db.delete(run)
    db.commit()
    return True


def record_of(run: Runs) -> RunRecord:
    return RunRecord.model_validate_json(run.record_json)
