"""Feed-forward agent networks and the monotonic mixers that combine them."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor

ParamStore = dict[str, Tensor]


@dataclass(frozen=True)
class MlpSpec:
    """Layer widths from input to output; hidden layers use ReLU, the last is linear.

    At least one hidden layer is required.
    """
    widths: tuple[int, ...]

    def __post_init__(self):
        if len(self.widths) < 3 or any(w < 1 for w in self.widths):
            raise ShapeMismatch(f'bad MLP widths {self.widths}')

    @property
    def n_layers(self) -> int:
        return len(self.widths) - 1


@dataclass(frozen=True)
class MixerSpec:
    n_inputs: int
    state_dim: int
    embed_dim: int = 16
    hypernet_hidden: int = 32
    kind: Literal['qmix', 'vdn'] = 'qmix'


def _uniform_fan_in(rng: np.random.Generator, fan_in: int, shape) -> np.ndarray:
    bound = 1.0 / math.sqrt(fan_in)
    return rng.uniform(-bound, bound, size=shape)


def init_linear(rng: np.random.Generator, prefix: str, n_in: int, n_out: int) -> ParamStore:
    return {
        f'{prefix}.weight': Tensor(_uniform_fan_in(rng, n_in, (n_in, n_out)), requires_grad=True, name=f'{prefix}.weight'),
        f'{prefix}.bias': Tensor(_uniform_fan_in(rng, n_in, (n_out,)), requires_grad=True, name=f'{prefix}.bias'),
    }


def init_mlp(spec: MlpSpec, rng: np.random.Generator, prefix: str = 'agent') -> ParamStore:
    params: ParamStore = {}
    for layer, (n_in, n_out) in enumerate(zip(spec.widths[:-1], spec.widths[1:])):
        params.update(init_linear(rng, f'{prefix}.{layer}', n_in, n_out))
    return params


def linear(params: ParamStore, prefix: str, x: Tensor) -> Tensor:
    return x @ params[f'{prefix}.weight'] + params[f'{prefix}.bias']


def mlp_forward(spec: MlpSpec, params: ParamStore, x: Tensor, prefix: str = 'agent') -> Tensor:
    if x.shape[-1] != spec.widths[0]:
        raise ShapeMismatch(f'input width {x.shape[-1]} != {spec.widths[0]}')
    squeeze = x.data.ndim == 1
    if squeeze:
        x = x.reshape(1, -1)
    for layer in range(spec.n_layers):
        x = linear(params, f'{prefix}.{layer}', x)
        if layer < spec.n_layers - 1:
            x = x.relu()
    return x.reshape(-1) if squeeze else x


def mlp_forward_numpy(spec: MlpSpec, params: ParamStore, x: np.ndarray, prefix: str = 'agent') -> np.ndarray:
    """Tape-free forward pass for acting."""
    for layer in range(spec.n_layers):
        x = x @ params[f'{prefix}.{layer}.weight'].data + params[f'{prefix}.{layer}.bias'].data
        if layer < spec.n_layers - 1:
            x = np.maximum(x, 0.0)
    return x


def init_mixer(spec: MixerSpec, rng: np.random.Generator, prefix: str = 'mixer') -> ParamStore:
    if spec.kind == 'vdn':
        return {}
    n, s, e, h = spec.n_inputs, spec.state_dim, spec.embed_dim, spec.hypernet_hidden
    params: ParamStore = {}
    params.update(init_linear(rng, f'{prefix}.hyper_w1.0', s, h))
    params.update(init_linear(rng, f'{prefix}.hyper_w1.1', h, n * e))
    params.update(init_linear(rng, f'{prefix}.hyper_b1', s, e))
    params.update(init_linear(rng, f'{prefix}.hyper_w2.0', s, h))
    params.update(init_linear(rng, f'{prefix}.hyper_w2.1', h, e))
    params.update(init_linear(rng, f'{prefix}.hyper_b2.0', s, e))
    params.update(init_linear(rng, f'{prefix}.hyper_b2.1', e, 1))
    return params


def _hyper(params: ParamStore, prefix: str, state: Tensor) -> Tensor:
    return linear(params, f'{prefix}.1', linear(params, f'{prefix}.0', state).relu())


def mixer_forward(spec: MixerSpec, params: ParamStore, agent_qs: Tensor, state: Tensor,
                  prefix: str = 'mixer') -> Tensor:
    """Q_tot for a batch: agent_qs [B, n] (or [n]) and state [B, S] (or [S]).

    Hypernetwork weights pass through ``abs`` so Q_tot never decreases when
    an agent's Q increases.
    """
    squeeze = agent_qs.data.ndim == 1
    if squeeze:
        agent_qs = agent_qs.reshape(1, -1)
        state = state.reshape(1, -1)
    if agent_qs.shape[-1] != spec.n_inputs:
        raise ShapeMismatch(f'mixer expects {spec.n_inputs} agent Qs, got {agent_qs.shape[-1]}')
    if spec.kind == 'vdn':
        q_tot = agent_qs.sum(axis=1)
        return q_tot.reshape(()) if squeeze else q_tot
    if state.shape[-1] != spec.state_dim or state.shape[0] != agent_qs.shape[0]:
        raise ShapeMismatch(f'state {state.shape} does not match mixer state_dim {spec.state_dim}')
    batch = agent_qs.shape[0]
    n, e = spec.n_inputs, spec.embed_dim
    w1 = _hyper(params, f'{prefix}.hyper_w1', state).abs().reshape(batch, n, e)
    b1 = linear(params, f'{prefix}.hyper_b1', state).reshape(batch, 1, e)
    hidden = (agent_qs.reshape(batch, 1, n) @ w1 + b1).relu()
    w2 = _hyper(params, f'{prefix}.hyper_w2', state).abs()
    b2 = _hyper(params, f'{prefix}.hyper_b2', state).reshape(batch, 1, 1)
    q_tot = (hidden @ w2.reshape(batch, e, 1) + b2).reshape(batch)
    return q_tot.reshape(()) if squeeze else q_tot
