"""Softmax confidence scores used by the threshold (rule-based) attack.

Both rules look at ``softmax(q_row)``. ``maxdiff`` is the gap between the
most and least likely action, in [0, 1]. ``entropy`` is the normalized
``sum p log p / log m`` as printed in the literature: it lies in [-1, 0],
is -1 for a uniform row, and the attack still fires when it is high.
"""
from __future__ import annotations

import enum

import numpy as np


class DeltaRule(str, enum.Enum):
    MAXDIFF = 'maxdiff'
    ENTROPY = 'entropy'


def softmax(q_row: np.ndarray) -> np.ndarray:
    q = np.asarray(q_row, dtype=np.float64)
    shifted = np.exp(q - q.max())
    return shifted / shifted.sum()


def delta_score(rule: DeltaRule | str, q_row: np.ndarray) -> float:
    rule = DeltaRule(rule)
    probs = softmax(q_row)
    if rule is DeltaRule.MAXDIFF:
        return float(probs.max() - probs.min())
    m = len(probs)
    if m == 1:
        return 0.0
    positive = probs[probs > 0]
    return float(np.sum(positive * np.log(positive)) / np.log(m))
