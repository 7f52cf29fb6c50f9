import copy

import numpy as np
import pytest

from ..approx import OptimizerState, backward, optimizer_step
from ..baselines.oracles import value_iteration
from ..environments import GoalGatherEnv, GridTeamSpec
from ..errors import ConfigMismatch, DivergedTraining, EmptyEvaluation
from ..learners import ReplayBuffer, TrainConfig, evaluate_policy, load_policy, save_policy, train_base
from ..learners.deep import build_network_policy, mean_td_error, td_loss, td_targets
from ..learners.episodes import collect_episode, episode_seeds, epsilon_greedy, greedy
from ..learners.replay import stack
from ..mmdp import rng_for
from .utils import distinct_tree_env, example1_env, example2_env, quick_network, quick_tabular, tiny_grid, vi_base


def test_value_iteration_policy_plays_the_optimal_leaf():
    env = example1_env()
    policy = vi_base(env)
    stats = evaluate_policy(env, policy, 3, 0)
    assert stats.mean_return == 50.0
    assert stats.win_rate is None
    assert stats.mean_episode_length == env.tree.depth
    root = policy.q_values(0, env.observation_for(()))
    assert np.array_equal(root, value_iteration(env.tree).row(()))


def test_unknown_observation_gets_zero_row():
    env = example1_env()
    assert np.array_equal(vi_base(env).q_values(0, np.zeros(13) + 7.0), np.zeros(2))


@pytest.mark.parametrize('env_factory', [example1_env, example2_env])
def test_tabular_q_with_unit_step_matches_value_iteration(env_factory):
    env = env_factory()
    policy = train_base(env, 'tabular-Q', quick_tabular())
    assert policy.frozen
    assert evaluate_policy(env, policy, 1, 0).mean_return == 50.0
    q_table = value_iteration(env.tree)
    for prefix in [(), env.tree.construction_meta.optimal[:2]]:
        assert np.allclose(policy.q_values(0, env.observation_for(prefix)), q_table.row(prefix))


def test_tabular_history_is_logged():
    policy = train_base(example1_env(), 'tabular-Q', quick_tabular(2000))
    assert [entry['episode'] for entry in policy.history] == [1000, 2000]


def test_tabular_algorithms_need_a_tree():
    with pytest.raises(ConfigMismatch):
        train_base(tiny_grid(), 'tabular-Q', quick_tabular(10))
    with pytest.raises(ConfigMismatch):
        train_base(tiny_grid(), 'tabular-VI', quick_tabular(10))


@pytest.mark.parametrize('algo', ['QMIX', 'VDN'])
def test_network_training_smoke(algo):
    env = tiny_grid()
    policy = train_base(env, algo, quick_network())
    assert policy.mode == 'network' and policy.frozen
    assert policy.header['env_fingerprint'] == env.fingerprint()
    assert [entry['episode'] for entry in policy.history] == [10, 20]
    assert all(np.isfinite(entry['loss']) for entry in policy.history)
    stats = evaluate_policy(env, policy, 5, 1)
    assert 0.0 <= stats.win_rate <= 1.0


def test_network_training_is_seed_deterministic():
    env = tiny_grid()
    first = train_base(env, 'QMIX', quick_network(seed=3))
    second = train_base(env, 'QMIX', quick_network(seed=3))
    assert first.fingerprint() == second.fingerprint()


def test_divergence_keeps_last_good_parameters():
    config = quick_network(episodes=6).model_copy(update={'learning_rate': 1e200, 'grad_clip': None})
    with pytest.raises(DivergedTraining) as err:
        train_base(tiny_grid(), 'QMIX', config)
    policy = err.value.policy
    assert policy is not None and policy.frozen
    assert all(np.all(np.isfinite(t.data)) for t in {**policy.params, **policy.mixer_params}.values())


def test_save_and_load_tabular_policy(tmp_path):
    env = example1_env()
    policy = vi_base(env)
    manifest = save_policy(policy, tmp_path / 'base', role='base')
    assert manifest.exists()
    loaded = load_policy(tmp_path / 'base', env.fingerprint())
    assert loaded.frozen and loaded.header['role'] == 'base'
    assert loaded.fingerprint() == policy.fingerprint()
    obs = env.observation_for((1, 0, 1))
    assert np.array_equal(loaded.q_values(0, obs), policy.q_values(0, obs))


def test_load_rejects_another_environment(tmp_path):
    save_policy(vi_base(example1_env(seed=0)), tmp_path / 'base')
    with pytest.raises(ConfigMismatch):
        load_policy(tmp_path / 'base', example1_env(seed=1).fingerprint())


def test_save_and_load_network_policy(tmp_path):
    env = tiny_grid()
    policy = train_base(env, 'QMIX', quick_network(episodes=10))
    save_policy(policy, tmp_path / 'team')
    loaded = load_policy(tmp_path / 'team', env.fingerprint())
    state = env.reset(5)
    for slot in range(2):
        assert np.allclose(loaded.q_values(slot, state.observations[slot], 2),
                           policy.q_values(slot, state.observations[slot], 2))
    assert loaded.mixer_spec == policy.mixer_spec


def test_empty_evaluation():
    env = example1_env()
    with pytest.raises(EmptyEvaluation):
        evaluate_policy(env, vi_base(env), 0, 0)


def test_replay_buffer_overwrites_oldest():
    env = example1_env()
    episode = collect_episode(env, 0, lambda state, prev: [0])
    buffer = ReplayBuffer(4, rng_for(0))
    buffer.add_episode(episode.transitions)
    assert len(buffer) == 4 and buffer.inserted == 6
    assert buffer._items[0] is episode.transitions[4]
    batch = buffer.sample(10)
    assert len(batch) == 4
    assert batch.obs.shape == (4, 1, 13)
    assert batch.prev_actions.shape == (4, 1)


def test_first_transition_has_no_previous_action():
    episode = collect_episode(tiny_grid(), 0, lambda state, prev: [4, 4])
    assert episode.transitions[0].prev_actions_k == (-1, -1)
    assert episode.transitions[1].prev_actions_k == (4, 4)


def test_epsilon_schedule():
    config = TrainConfig(episodes=100)
    assert config.epsilon(0) == 1.0
    assert config.epsilon(10) == pytest.approx(0.525)
    assert config.epsilon(50) == pytest.approx(0.05)
    assert TrainConfig(hidden=32).hidden == [32]


def test_episode_seeds_are_reproducible():
    assert episode_seeds(9, 4) == episode_seeds(9, 4)
    assert episode_seeds(9, 4) != episode_seeds(10, 4)


@pytest.mark.parametrize('env_factory', [example1_env, example2_env])
def test_default_tabular_config_reproduces_value_iteration(env_factory):
    env = env_factory()
    config = TrainConfig(seed=0)
    assert config.step_size('tabular') == 1.0 and config.lr_schedule == 'constant'
    policy = train_base(env, 'tabular-Q', config)
    q_table = value_iteration(env.tree)
    optimal = env.tree.construction_meta.optimal
    for step in range(env.tree.depth):
        prefix = optimal[:step]
        assert np.array_equal(policy.q_values(0, env.observation_for(prefix)), q_table.row(prefix))


def test_step_size_defaults_per_learner():
    assert TrainConfig().step_size('network') == 5e-4
    assert TrainConfig(learning_rate=0.3).step_size('tabular') == 0.3
    assert TrainConfig(learning_rate=0.3).step_size('network') == 0.3


def test_td_error_on_a_greedy_batch_is_below_the_training_floor():
    env = distinct_tree_env(T=2, branching=2)
    config = TrainConfig(episodes=600, batch_size=16, buffer_capacity=500, hidden=[16], updates_per_episode=4,
                         target_update_period=50, learning_rate=1e-2, log_every=600, seed=0)
    policy = train_base(env, 'VDN', config)
    floor = policy.history[-1]['loss']
    # the last target copy coincides with the end of training
    batch = stack(collect_episode(env, 123, greedy(policy)).transitions)
    assert mean_td_error(policy, policy, batch, env.spec.discount) < floor


def test_targets_are_stale_between_copies():
    env = tiny_grid()
    config = quick_network()
    policy = build_network_policy(env, 'QMIX', config)
    target = copy.deepcopy(policy)
    rng = rng_for(0)
    buffer = ReplayBuffer(200, rng)
    for seed in range(5):
        buffer.add_episode(collect_episode(env, seed, epsilon_greedy(policy, 1.0, rng)).transitions)
    batch = buffer.sample(16)
    gamma = env.spec.discount
    before = td_targets(target, batch, gamma)
    named = {**policy.params, **policy.mixer_params}
    optimizer = OptimizerState(learning_rate=1e-2)
    for _ in range(5):
        optimizer_step(optimizer, named, backward(td_loss(policy, batch, td_targets(target, batch, gamma)), named))
    assert np.array_equal(td_targets(target, batch, gamma), before)
    assert not np.array_equal(td_targets(policy, batch, gamma), before)
    refreshed = copy.deepcopy(policy)
    assert np.array_equal(td_targets(refreshed, batch, gamma), td_targets(policy, batch, gamma))


def test_random_weight_team_rarely_wins_goal_gather():
    env = GoalGatherEnv(GridTeamSpec())
    policy = train_base(env, 'QMIX', TrainConfig(episodes=0, seed=0))
    stats = evaluate_policy(env, policy, 300, 0)
    assert stats.win_rate < 0.3
