"""VDN / QMIX-style value decomposition learners.

One agent network is shared by every controlled agent (the slot id is part
of its input). Per-agent Q values of the taken actions are combined by the
mixer into Q_tot and regressed onto r + γ·Q_tot' from a periodically copied
target network. The same loop trains base teams and attackers: an
adversarial environment just looks like a team of m agents.
"""
from __future__ import annotations

import copy
import logging

import numpy as np
from tqdm import tqdm

from ..approx import (
    MixerSpec,
    MlpSpec,
    OptimizerState,
    Tensor,
    backward,
    init_mixer,
    init_mlp,
    mixer_forward,
    mlp_forward,
    mlp_forward_numpy,
    optimizer_step,
)
from ..errors import ConfigMismatch, DivergedTraining, NonFinite
from ..mmdp import Environment, rng_for
from .config import TrainConfig
from .episodes import collect_episode, epsilon_greedy, episode_seeds
from .policy import QTeamPolicy
from .replay import Batch, ReplayBuffer

logger = logging.getLogger(__name__)


def build_network_policy(env: Environment, algo: str, config: TrainConfig,
                         agent_index: tuple[int, ...] | None = None) -> QTeamPolicy:
    spec = env.spec
    if len(set(spec.obs_dims)) != 1 or len(set(spec.action_counts)) != 1:
        raise ConfigMismatch('shared agent networks need identical observation and action sizes')
    n, obs_dim, n_actions = spec.n_agents, spec.obs_dims[0], spec.action_counts[0]
    rng = rng_for(config.seed)
    agent_spec = MlpSpec((obs_dim + n_actions + n, *config.hidden, n_actions))
    mixer_spec = MixerSpec(n, spec.state_dim, config.mixer_embed, config.hypernet_hidden,
                           kind='vdn' if algo == 'VDN' else 'qmix')
    return QTeamPolicy(
        mode='network',
        algo=algo,
        action_counts=spec.action_counts,
        obs_dims=spec.obs_dims,
        agent_index=agent_index or tuple(range(n)),
        agent_spec=agent_spec,
        params=init_mlp(agent_spec, rng),
        mixer_spec=mixer_spec,
        mixer_params=init_mixer(mixer_spec, rng),
    )


def _inputs(policy: QTeamPolicy, obs: np.ndarray, prev: np.ndarray) -> np.ndarray:
    """[B, m, obs_dim] observations -> [B * m, input] agent-network inputs."""
    batch, m, _ = obs.shape
    prev_hot = np.zeros((batch, m, policy.max_actions))
    rows, cols = np.nonzero(prev >= 0)
    prev_hot[rows, cols, prev[rows, cols]] = 1.0
    ident = np.broadcast_to(np.eye(m), (batch, m, m))
    return np.concatenate([obs, prev_hot, ident], axis=2).reshape(batch * m, -1)


def td_targets(target: QTeamPolicy, batch: Batch, gamma: float) -> np.ndarray:
    size, m = batch.actions.shape
    next_q = mlp_forward_numpy(target.agent_spec, target.params, _inputs(target, batch.next_obs, batch.actions))
    next_q = next_q.reshape(size, m, -1)
    masked = np.where(batch.next_masks, next_q, -np.inf)
    best = np.where(batch.next_masks.any(axis=2), masked.max(axis=2), 0.0)
    best = np.where(batch.terminals[:, None] > 0, 0.0, best)
    next_tot = mixer_forward(target.mixer_spec, target.mixer_params, Tensor(best), Tensor(batch.next_states)).data
    return batch.rewards + gamma * (1.0 - batch.terminals) * next_tot


def td_loss(policy: QTeamPolicy, batch: Batch, targets: np.ndarray) -> Tensor:
    size, m = batch.actions.shape
    q = mlp_forward(policy.agent_spec, policy.params, Tensor(_inputs(policy, batch.obs, batch.prev_actions)))
    chosen = q.reshape(size, m, -1).gather(batch.actions)
    q_tot = mixer_forward(policy.mixer_spec, policy.mixer_params, chosen, Tensor(batch.states))
    return (q_tot - targets).square().mean()


def mean_td_error(policy: QTeamPolicy, target: QTeamPolicy, batch: Batch, gamma: float) -> float:
    return td_loss(policy, batch, td_targets(target, batch, gamma)).item()


def _snapshot(policy: QTeamPolicy) -> dict[str, np.ndarray]:
    return {name: t.data.copy() for name, t in {**policy.params, **policy.mixer_params}.items()}


def _restore(policy: QTeamPolicy, snapshot: dict[str, np.ndarray]):
    for name, data in snapshot.items():
        store = policy.mixer_params if name in policy.mixer_params else policy.params
        store[name].data = data.copy()


def train_network(env: Environment, algo: str, config: TrainConfig,
                  agent_index: tuple[int, ...] | None = None) -> QTeamPolicy:
    policy = build_network_policy(env, algo, config, agent_index)
    target = copy.deepcopy(policy)
    gamma = env.spec.discount if config.discount is None else config.discount
    rng = rng_for(config.seed + 1)
    buffer = ReplayBuffer(config.buffer_capacity, rng)
    optimizer = OptimizerState(learning_rate=config.step_size('network'), grad_clip=config.grad_clip)
    named = {**policy.params, **policy.mixer_params}
    seeds = episode_seeds(config.seed, config.episodes)
    last_good = _snapshot(policy)
    losses, returns, wins = [], [], []

    for episode in tqdm(range(config.episodes), disable=not config.progress, desc=algo):
        result = collect_episode(env, seeds[episode], epsilon_greedy(policy, config.epsilon(episode), rng))
        buffer.add_episode(result.transitions)
        returns.append(result.episode_return)
        wins.append(result.won)

        if len(buffer) >= config.batch_size:
            for _ in range(config.updates_per_episode):
                batch = buffer.sample(config.batch_size)
                try:
                    loss = td_loss(policy, batch, td_targets(target, batch, gamma))
                    grads = backward(loss, named)
                except NonFinite as err:
                    _restore(policy, last_good)
                    policy.frozen = True
                    logger.error('%s diverged at episode %d: %s', algo, episode + 1, err)
                    raise DivergedTraining(f'{algo} diverged at episode {episode + 1}', policy=policy) from err
                optimizer_step(optimizer, named, grads)
                losses.append(loss.item())

        if (episode + 1) % config.target_update_period == 0:
            target = copy.deepcopy(policy)
            last_good = _snapshot(policy)

        if (episode + 1) % config.log_every == 0:
            entry = {
                'episode': episode + 1,
                'epsilon': config.epsilon(episode),
                'loss': float(np.mean(losses)) if losses else float('nan'),
                'mean_return': float(np.mean(returns)),
                'win_rate': float(np.mean(wins)),
            }
            policy.history.append(entry)
            logger.info('%s episode %d eps %.3f loss %.4f return %.3f win %.3f', algo, entry['episode'],
                        entry['epsilon'], entry['loss'], entry['mean_return'], entry['win_rate'])
            losses, returns, wins = [], [], []

    policy.frozen = True
    return policy
