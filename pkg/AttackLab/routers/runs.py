from typing import Annotated, Literal

from fastapi import APIRouter, Depends, HTTPException, Path, Query, status
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel, ConfigDict
from sqlalchemy.orm import Session

from ..database import SessionLocal
from ..harness.report import emit_report
from ..registry import delete_run, get_run, list_runs, record_of

router = APIRouter(
    prefix='/runs',
    tags=['runs']
)


def get_db():
    db = SessionLocal()
    try:
        yield db
    finally:
        db.close()


db_dependency = Annotated[Session, Depends(get_db)]


class SeedResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    seed_index: int
    seed: str
    win_rate: float | None
    mean_return: float
    attacked_steps: str
    mean_total_steps: float
    failed: bool
    error: str | None


class RunResponse(BaseModel):
    model_config = ConfigDict(from_attributes=True)

    id: int
    name: str
    method: str
    parameter: str
    config_hash: str
    degraded: bool
    mean_score: float | None
    wall_clock: float


class RunDetailResponse(RunResponse):
    config_text: str
    seeds: list[SeedResponse]


@router.get('/', status_code=status.HTTP_200_OK, response_model=list[RunResponse])
async def read_all(db: db_dependency, method: str | None = None):
    return list_runs(db, method)


@router.get('/report', response_class=PlainTextResponse)
async def read_report(db: db_dependency, format: Literal['table', 'delimited'] = Query('table')):
    return emit_report([record_of(run) for run in list_runs(db)], format)


@router.get('/{run_id}', status_code=status.HTTP_200_OK, response_model=RunDetailResponse)
async def read_run(db: db_dependency, run_id: int = Path(gt=0)):
    run = get_run(db, run_id)
    if run is not None:
        return run
    raise HTTPException(status_code=404, detail='run not found')


@router.delete('/{run_id}', status_code=status.HTTP_204_NO_CONTENT)
async def remove_run(db: db_dependency, run_id: int = Path(gt=0)):
    if not delete_run(db, run_id):
        raise HTTPException(status_code=404, detail='run not found')
