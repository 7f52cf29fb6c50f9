"""Team Q policies: the frozen base team and every learned attacker share this type."""
from __future__ import annotations

import copy
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Literal

import numpy as np

from ..approx import MixerSpec, MlpSpec, ParamStore, Tensor, load_arrays, mlp_forward_numpy, save_arrays
from ..errors import ConfigMismatch, NoLegalAction


@dataclass
class QTeamPolicy:
    mode: Literal['tabular', 'network']
    algo: str
    action_counts: tuple[int, ...]
    obs_dims: tuple[int, ...]
    # slot -> environment agent index
    agent_index: tuple[int, ...]
    tables: list[dict[bytes, np.ndarray]] = field(default_factory=list)
    agent_spec: MlpSpec | None = None
    params: ParamStore = field(default_factory=dict)
    mixer_spec: MixerSpec | None = None
    mixer_params: ParamStore = field(default_factory=dict)
    frozen: bool = False
    header: dict[str, Any] = field(default_factory=dict)
    history: list[dict[str, float]] = field(default_factory=list)

    @property
    def n_slots(self) -> int:
        return len(self.agent_index)

    @property
    def max_actions(self) -> int:
        return max(self.action_counts)

    def slot_of(self, agent: int) -> int:
        return self.agent_index.index(agent)

    def agent_input(self, slot: int, obs: np.ndarray, prev_action: int) -> np.ndarray:
        """Observation, one-hot previous own action (zeros at t=0), one-hot slot id."""
        prev = np.zeros(self.max_actions)
        if prev_action >= 0:
            prev[prev_action] = 1.0
        ident = np.zeros(self.n_slots)
        ident[slot] = 1.0
        return np.concatenate([obs, prev, ident])

    def q_values(self, slot: int, obs: np.ndarray, prev_action: int = -1) -> np.ndarray:
        if self.mode == 'tabular':
            row = self.tables[slot].get(np.asarray(obs, dtype=np.float64).tobytes())
            return row.copy() if row is not None else np.zeros(self.action_counts[slot])
        x = self.agent_input(slot, obs, prev_action)
        return mlp_forward_numpy(self.agent_spec, self.params, x)[: self.action_counts[slot]]

    def frozen_copy(self) -> 'QTeamPolicy':
        clone = copy.deepcopy(self)
        clone.frozen = True
        return clone

    def arrays(self) -> dict[str, np.ndarray]:
        if self.mode == 'network':
            named = {**self.params, **self.mixer_params}
            return {name: tensor.data for name, tensor in named.items()}
        arrays = {}
        for slot, table in enumerate(self.tables):
            keys = sorted(table)
            if keys:
                arrays[f'table.{slot}.keys'] = np.stack([np.frombuffer(k, dtype=np.float64) for k in keys])
                arrays[f'table.{slot}.rows'] = np.stack([table[k] for k in keys])
        return arrays

    def fingerprint(self) -> str:
        digest = hashlib.sha256()
        for name, array in sorted(self.arrays().items()):
            digest.update(name.encode())
            digest.update(np.ascontiguousarray(array, dtype='<f8').tobytes())
        return digest.hexdigest()[:16]


def greedy_action(policy: QTeamPolicy, agent: int, obs: np.ndarray, mask: np.ndarray, prev_action: int = -1) -> int:
    """Best legal action of policy slot ``agent``; ties go to the lowest index."""
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise NoLegalAction(f'slot {agent} has no legal action')
    q = policy.q_values(agent, obs, prev_action)
    return int(np.argmax(np.where(mask[: len(q)], q, -np.inf)))


def argmin_action(q: np.ndarray, mask: np.ndarray) -> int:
    mask = np.asarray(mask, dtype=bool)
    if not mask.any():
        raise NoLegalAction('no legal action')
    return int(np.argmin(np.where(mask[: len(q)], q, np.inf)))


def team_greedy_actions(policy: QTeamPolicy, observations, masks, prev_actions) -> list[int]:
    """Greedy action for every slot, reading each slot's agent from the environment state."""
    return [
        greedy_action(policy, slot, observations[agent], masks[agent], prev_actions[agent])
        for slot, agent in enumerate(policy.agent_index)
    ]


def save_policy(policy: QTeamPolicy, stem: str | Path, **extra) -> Path:
    header = {
        'mode': policy.mode,
        'algo': policy.algo,
        'action_counts': list(policy.action_counts),
        'obs_dims': list(policy.obs_dims),
        'agent_index': list(policy.agent_index),
        'agent_widths': list(policy.agent_spec.widths) if policy.agent_spec else None,
        'mixer': policy.mixer_spec.__dict__ if policy.mixer_spec else None,
        'fingerprint': policy.fingerprint(),
        **policy.header,
        **extra,
    }
    return save_arrays(stem, policy.arrays(), json.loads(json.dumps(header)))


def load_policy(stem: str | Path, env_fingerprint: str | None = None) -> QTeamPolicy:
    arrays, header = load_arrays(stem)
    if env_fingerprint is not None and header.get('env_fingerprint') not in (None, env_fingerprint):
        raise ConfigMismatch(f'policy was trained on {header["env_fingerprint"]}, not {env_fingerprint}')
    policy = QTeamPolicy(
        mode=header['mode'],
        algo=header['algo'],
        action_counts=tuple(header['action_counts']),
        obs_dims=tuple(header['obs_dims']),
        agent_index=tuple(header['agent_index']),
        frozen=True,
        header={k: v for k, v in header.items() if k not in {
            'mode', 'algo', 'action_counts', 'obs_dims', 'agent_index', 'agent_widths', 'mixer', 'fingerprint'}},
    )
    if policy.mode == 'tabular':
        for slot in range(policy.n_slots):
            keys = arrays.get(f'table.{slot}.keys')
            rows = arrays.get(f'table.{slot}.rows')
            table = {} if keys is None else {k.tobytes(): row.copy() for k, row in zip(keys, rows)}
            policy.tables.append(table)
    else:
        policy.agent_spec = MlpSpec(tuple(header['agent_widths']))
        if header['mixer']:
            policy.mixer_spec = MixerSpec(**header['mixer'])
        for name, array in arrays.items():
            target = policy.mixer_params if name.startswith('mixer.') else policy.params
            target[name] = Tensor(array, requires_grad=True, name=name)
    return policy
