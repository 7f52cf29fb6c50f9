from typing import Literal

from fastapi import APIRouter, HTTPException, status
from pydantic import BaseModel, Field

from ..baselines.oracles import OracleResult, oracle_budget_dp, oracle_reg_dp
from ..environments import TreeGameSpec, build_example1, build_example2, build_random_tree
from ..errors import AttackLabError

router = APIRouter(
    prefix='/oracle',
    tags=['oracle']
)


class TreeRequest(BaseModel):
    construction: Literal['example1', 'example2', 'random'] = 'example1'
    T: int = Field(default=6, ge=1, le=20)
    t: int = Field(default=3, ge=0)
    p: int = Field(default=1, ge=0)
    branching: int = Field(default=2, ge=2)
    seed: int = Field(default=0, ge=0)


class BudgetRequest(TreeRequest):
    N: int = Field(default=2, ge=0)


class RegularizedRequest(TreeRequest):
    lam: float = Field(default=1.0, ge=0.0, allow_inf_nan=False)


class OracleResponse(BaseModel):
    value: float
    attack_count: int
    team_return: float
    witness: list[tuple[int, int]]
    path: list[int]


def build_tree(request: TreeRequest) -> TreeGameSpec:
    if request.construction == 'example1':
        return build_example1(request.T, request.t, request.p, request.seed)
    if request.construction == 'example2':
        return build_example2(request.T, request.p, request.seed)
    return build_random_tree(request.T, request.branching, request.seed)


def to_response(result: OracleResult) -> OracleResponse:
    return OracleResponse(
        value=result.value,
        attack_count=result.attack_count,
        team_return=result.team_return,
        witness=[(step, action) for step, _, action in result.witness],
        path=list(result.path),
    )


@router.post('/budget', status_code=status.HTTP_200_OK, response_model=OracleResponse)
async def budget(request: BudgetRequest):
    try:
        return to_response(oracle_budget_dp(build_tree(request), request.N))
    except AttackLabError as err:
        raise HTTPException(status_code=400, detail=str(err))


@router.post('/regularized', status_code=status.HTTP_200_OK, response_model=OracleResponse)
async def regularized(request: RegularizedRequest):
    try:
        return to_response(oracle_reg_dp(build_tree(request), request.lam))
    except AttackLabError as err:
        raise HTTPException(status_code=400, detail=str(err))
