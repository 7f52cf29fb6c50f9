from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch
from .nn import ParamStore


@dataclass
class OptimizerState:
    """Adam-style first/second moment accumulators, one pair per parameter."""
    learning_rate: float = 5e-4
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    grad_clip: float | None = 10.0
    step: int = 0
    first: dict[str, np.ndarray] = field(default_factory=dict)
    second: dict[str, np.ndarray] = field(default_factory=dict)


def _clip(grads: dict[str, np.ndarray], max_norm: float | None) -> dict[str, np.ndarray]:
    if max_norm is None:
        return grads
    norm = float(np.sqrt(sum(float(np.sum(g * g)) for g in grads.values())))
    if norm <= max_norm or norm == 0.0:
        return grads
    scale = max_norm / norm
    return {name: g * scale for name, g in grads.items()}


def optimizer_step(state: OptimizerState, params: ParamStore, grads: dict[str, np.ndarray]) -> ParamStore:
    """Apply one update in place and return ``params``."""
    for name, grad in grads.items():
        if name not in params or params[name].shape != grad.shape:
            raise ShapeMismatch(f'gradient for {name} does not match its parameter')
    grads = _clip(grads, state.grad_clip)
    state.step += 1
    correction1 = 1.0 - state.beta1 ** state.step
    correction2 = 1.0 - state.beta2 ** state.step
    for name, grad in grads.items():
        m = state.first.get(name)
        v = state.second.get(name)
        if m is None:
            m = np.zeros_like(grad)
            v = np.zeros_like(grad)
        m = state.beta1 * m + (1.0 - state.beta1) * grad
        v = state.beta2 * v + (1.0 - state.beta2) * grad * grad
        state.first[name], state.second[name] = m, v
        update = state.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + state.eps)
        params[name].data = params[name].data - update
    return params
