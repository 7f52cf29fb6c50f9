from __future__ import annotations

from typing import Sequence

import numpy as np

from ..errors import WrongArity
from .records import Aggregate, SeedResult


def _aggregate(retained: list[SeedResult]) -> Aggregate:
    wins = [seed.win_rate for seed in retained]
    return Aggregate(
        retained=[seed.seed_index for seed in retained],
        scores=[seed.score for seed in retained],
        mean_score=float(np.mean([seed.score for seed in retained])),
        mean_win_rate=None if any(w is None for w in wins) else float(np.mean(wins)),
        mean_return=float(np.mean([seed.mean_return for seed in retained])),
        attacked_steps=[float(x) for x in np.mean([seed.attacked_steps for seed in retained], axis=0)]
        if retained[0].attacked_steps else [],
        mean_total_steps=float(np.mean([seed.mean_total_steps for seed in retained])),
    )


def aggregate_median3(seed_results: Sequence[SeedResult]) -> Aggregate:
    """Drop the best and worst of five seeds (by win rate, else mean return); keep the middle three.

    Ties are broken by seed index, so the ordering is total.
    """
    if len(seed_results) != 5:
        raise WrongArity(f'median-of-3 needs exactly 5 seed results, got {len(seed_results)}')
    ranked = sorted(seed_results, key=lambda seed: (seed.score, seed.seed_index))
    return _aggregate(sorted(ranked[1:4], key=lambda seed: seed.seed_index))


def aggregate_all(seed_results: Sequence[SeedResult]) -> Aggregate:
    if not seed_results:
        raise WrongArity('no seed results to aggregate')
    return _aggregate(sorted(seed_results, key=lambda seed: seed.seed_index))


def aggregate_seeds(seed_results: Sequence[SeedResult]) -> Aggregate:
    return aggregate_median3(seed_results) if len(seed_results) == 5 else aggregate_all(seed_results)
