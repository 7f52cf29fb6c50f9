import numpy as np
import pytest

from ..errors import ConfigError, IllegalAction, SteppedTerminal
from ..mmdp import JointAction, MmdpSpec, env_reset, env_step, full_masks, run_episode
from .utils import example1_env, tiny_grid


def test_spec_rejects_inconsistent_sizes():
    with pytest.raises(ConfigError):
        MmdpSpec(n_agents=2, action_counts=(2,), obs_dims=(3, 3), state_dim=1, horizon=1)
    with pytest.raises(ConfigError):
        MmdpSpec(n_agents=1, action_counts=(1,), obs_dims=(3,), state_dim=1, horizon=1)
    with pytest.raises(ConfigError):
        MmdpSpec(n_agents=1, action_counts=(2,), obs_dims=(3,), state_dim=1, horizon=0)
    with pytest.raises(ConfigError):
        MmdpSpec(n_agents=1, action_counts=(2,), obs_dims=(3,), state_dim=1, horizon=1, discount=1.5)


def test_full_masks_allow_every_action():
    spec = MmdpSpec(n_agents=2, action_counts=(2, 5), obs_dims=(1, 1), state_dim=1, horizon=1)
    masks = full_masks(spec)
    assert [m.tolist() for m in masks] == [[True, True], [True] * 5]


def test_joint_action_behaves_like_a_tuple():
    action = JointAction.of(1, 0, 4)
    assert len(action) == 3
    assert action[2] == 4
    assert list(action) == [1, 0, 4]


def test_reset_is_deterministic_in_the_seed():
    env = tiny_grid()
    first, second = env_reset(env, 7), env_reset(env, 7)
    assert first.payload == second.payload
    assert np.array_equal(first.global_state, second.global_state)


def test_step_rejects_wrong_arity_and_masked_actions():
    env = tiny_grid()
    state = env_reset(env, 0)
    with pytest.raises(IllegalAction):
        env_step(env, state, (0,))
    with pytest.raises(IllegalAction):
        env_step(env, state, (0, 5))


def test_step_after_terminal_raises():
    env = example1_env()
    trajectory = run_episode(env, 0, lambda state: (0,))
    assert trajectory.final_state.terminal
    with pytest.raises(SteppedTerminal):
        env_step(env, trajectory.final_state, (0,))


def test_run_episode_records_every_step():
    env = example1_env()
    trajectory = run_episode(env, 0, lambda state: (1,))
    assert len(trajectory) == env.tree.depth
    assert trajectory.episode_return == env.tree.reward_of((1,) * env.tree.depth)
