import numpy as np
import pytest
from pydantic import ValidationError

from ..attack import (
    AttackConfig,
    GreedyAttacker,
    PassThrough,
    ScriptedAttack,
    attacked_rollouts,
    check_targets,
    default_attacker_algo,
    rederive_attack_counts,
    rollout_attacked,
    train_attack,
    wrap_adversarial,
)
from ..baselines.oracles import oracle_reg_dp
from ..environments import GoalGatherEnv, GridTeamSpec
from ..errors import BadTargets, ConfigMismatch
from ..learners import TrainConfig, evaluate_policy, train_base
from ..learners.episodes import episode_seeds
from ..learners.policy import team_greedy_actions
from .utils import example1_env, example2_env, quick_network, quick_tabular, tiny_grid, vi_base


@pytest.fixture(scope='module')
def grid_team():
    env = tiny_grid()
    return env, train_base(env, 'QMIX', quick_network(episodes=30))


def test_bad_targets():
    with pytest.raises(BadTargets):
        check_targets([], 2)
    with pytest.raises(BadTargets):
        check_targets([1, 1], 2)
    with pytest.raises(BadTargets):
        check_targets([2], 2)
    env = example1_env()
    with pytest.raises(BadTargets):
        wrap_adversarial(env, vi_base(env), [], 0.0)
    assert check_targets([1, 0], 2) == (1, 0)


def test_adversarial_env_rejects_bad_setups(grid_team):
    env = example1_env()
    base = vi_base(env)
    with pytest.raises(ConfigMismatch):
        wrap_adversarial(env, base, [0], -1.0)
    with pytest.raises(ConfigMismatch):
        wrap_adversarial(env, base, [0], float('inf'))
    thawed = base.frozen_copy()
    thawed.frozen = False
    with pytest.raises(ConfigMismatch):
        wrap_adversarial(env, thawed, [0], 1.0)
    grid, _ = grid_team
    with pytest.raises(ConfigMismatch):
        wrap_adversarial(grid, base, [0], 1.0)


def test_zero_lambda_negates_the_team_reward():
    env = example1_env()
    adv_env = wrap_adversarial(env, vi_base(env), [0], 0.0)
    state = adv_env.reset(0)
    rewards = []
    while not state.terminal:
        reward, state = adv_env.step(state, adv_env.base_actions(state))
        rewards.append(reward)
    assert rewards == [-0.0] * 5 + [-50.0]
    assert state.payload.last_team_reward == 50.0


def test_adversarial_spec_covers_only_the_targets(grid_team):
    env, base = grid_team
    adv_env = wrap_adversarial(env, base, [1], 0.5)
    assert adv_env.spec.n_agents == 1
    assert adv_env.spec.obs_dims == (env.spec.obs_dims[1],)
    assert adv_env.spec.state_dim == env.spec.state_dim
    state = adv_env.reset(3)
    assert np.array_equal(state.observations[0], env.reset(3).observations[1])


def test_pass_through_reproduces_the_unattacked_team(grid_team):
    env, base = grid_team
    stats = attacked_rollouts(env, base, [0, 1], 0.0, PassThrough(), 8, 11)
    assert all(s.attack_count == 0 for s in stats)
    clean = evaluate_policy(env, base, 8, 11)
    assert np.mean([s.team_return for s in stats]) == pytest.approx(clean.mean_return)
    assert np.mean([s.won for s in stats]) == pytest.approx(clean.win_rate)


def test_adversarial_steps_match_the_wrapped_environment(grid_team):
    env, base = grid_team
    lam = 0.7
    adv_env = wrap_adversarial(env, base, [1], lam)
    rng = np.random.default_rng(0)
    adv_state, state = adv_env.reset(4), env.reset(4)
    prev = [-1, -1]
    while not adv_state.terminal:
        greedy = team_greedy_actions(base, state.observations, state.action_masks, prev)
        assert list(adv_env.base_actions(adv_state)) == greedy
        choice = int(rng.integers(5))
        joint = [greedy[0], choice]
        adv_reward, adv_state = adv_env.step(adv_state, (choice,))
        reward, state = env.step(state, joint)
        assert adv_reward == pytest.approx(-reward - lam * int(choice != greedy[1]))
        assert adv_state.payload.last_joint_action == tuple(joint)
        assert adv_state.payload.prev_actions == tuple(joint)
        assert np.array_equal(adv_state.global_state, state.global_state)
        prev = joint
    assert state.terminal


def test_regularized_accounting_of_a_scripted_attack():
    env = example1_env()
    witness = oracle_reg_dp(env.tree, 1.0).witness
    stats = attacked_rollouts(env, vi_base(env), [0], 1.0, ScriptedAttack(witness), 2, 0)
    for s in stats:
        assert s.team_return == -100 and s.attack_count == 2
        assert s.regularized_return == 98
        assert s.attacked_fraction() == pytest.approx(2 / 6)
        assert rederive_attack_counts(s.step_log, 1) == s.attacked_steps


def test_scripted_non_deviation_is_not_counted():
    env = example1_env()
    star = env.tree.construction_meta.optimal[0]
    stats = attacked_rollouts(env, vi_base(env), [0], 1.0, ScriptedAttack([(0, 0, star)]), 1, 0)
    assert stats[0].attack_count == 0 and stats[0].team_return == 50


def test_rederive_counts_of_an_empty_log():
    assert rederive_attack_counts([], 2) == (0, 0)
    assert rederive_attack_counts([(1, 0), (1, 1)], 2) == (2, 1)


def test_attack_config_validation():
    config = AttackConfig.model_validate({'targets': [0], 'lambda': 2.0})
    assert config.lam == 2.0
    with pytest.raises(ValidationError):
        AttackConfig(targets=[])
    with pytest.raises(ValidationError):
        AttackConfig(targets=[0], lam=float('inf'))
    with pytest.raises(ValidationError):
        AttackConfig(targets=[0], lam=-0.5)


def test_tabular_attacker_finds_the_sparse_attack():
    env = example1_env()
    base = vi_base(env)
    adv_env = wrap_adversarial(env, base, [0], 1.0)
    assert default_attacker_algo(adv_env) == 'tabular-Q'
    attacker = train_attack(adv_env, AttackConfig(targets=[0], lam=1.0, train=quick_tabular()))
    assert attacker.frozen
    assert attacker.header['role'] == 'attacker' and attacker.header['lambda'] == 1.0
    assert attacker.header['base_policy'] == base.fingerprint()
    stats = rollout_attacked(env, base, attacker, [0], 1.0, 3, 0)
    assert all(s.team_return == -100 and s.attack_count == 2 for s in stats)


def test_huge_lambda_stops_attacking():
    env = example1_env()
    base = vi_base(env)
    adv_env = wrap_adversarial(env, base, [0], 1e6)
    attacker = train_attack(adv_env, AttackConfig(targets=[0], lam=1e6, train=quick_tabular(2000)))
    stats = rollout_attacked(env, base, attacker, [0], 1e6, 2, 0)
    assert all(s.attack_count == 0 and s.team_return == 50 for s in stats)


def test_train_attack_rejects_mismatches(grid_team):
    env = example1_env()
    adv_env = wrap_adversarial(env, vi_base(env), [0], 1.0)
    with pytest.raises(ConfigMismatch):
        train_attack(adv_env, AttackConfig(targets=[0], lam=2.0, train=quick_tabular(10)))
    with pytest.raises(ConfigMismatch):
        train_attack(adv_env, AttackConfig(targets=[0], lam=1.0, train=quick_tabular(10),
                                           attacker_algo='multi-agent-QMIX'))
    grid, base = grid_team
    one = wrap_adversarial(grid, base, [0], 1.0)
    with pytest.raises(ConfigMismatch):
        train_attack(one, AttackConfig(targets=[0], lam=1.0, train=quick_network(), attacker_algo='tabular-Q'))
    both = wrap_adversarial(grid, base, [0, 1], 1.0)
    with pytest.raises(ConfigMismatch):
        train_attack(both, AttackConfig(targets=[0, 1], lam=1.0, train=quick_network(),
                                        attacker_algo='single-agent-QMIX'))


@pytest.mark.parametrize('targets', [[1], [0, 1]])
def test_network_attacker_smoke(grid_team, targets):
    env, base = grid_team
    adv_env = wrap_adversarial(env, base, targets, 0.5)
    algo = default_attacker_algo(adv_env)
    assert algo == ('single-agent-QMIX' if len(targets) == 1 else 'multi-agent-QMIX')
    attacker = train_attack(adv_env, AttackConfig(targets=targets, lam=0.5, train=quick_network(),
                                                  attacker_algo=algo))
    assert attacker.algo == algo and attacker.agent_index == tuple(targets)
    stats = rollout_attacked(env, base, attacker, targets, 0.5, 4, 0)
    assert len(stats) == 4
    for s in stats:
        assert len(s.attacked_steps) == len(targets)
        assert 0 <= s.attack_count <= s.total_steps * len(targets)
        assert s.regularized_return == pytest.approx(-s.team_return - 0.5 * s.attack_count)


def learned_witness(env, base, attacker, lam):
    """(step, action) of every deviation on the attacker's greedy rollout."""
    adv_env = wrap_adversarial(env, base, [0], lam)
    controller = GreedyAttacker(attacker)
    state = adv_env.reset(0)
    witness = []
    while not state.terminal:
        step = state.step_index
        _, state = adv_env.step(state, controller(adv_env, state))
        if state.payload.last_deviations[0]:
            witness.append((step, state.payload.last_joint_action[0]))
    return witness


@pytest.mark.slow
@pytest.mark.parametrize('lam', [0.0, 0.5, 1.0, 5.0])
@pytest.mark.parametrize('env_factory', [example1_env, example2_env])
def test_tabular_attacker_matches_the_regularized_oracle(env_factory, lam):
    matches = 0
    for seed in range(5):
        env = env_factory(seed)
        base = vi_base(env)
        oracle = oracle_reg_dp(env.tree, lam)
        if env_factory is example1_env and lam == 1.0:
            assert oracle.value == 98 and oracle.attack_count == 2
        adv_env = wrap_adversarial(env, base, [0], lam)
        train = TrainConfig(episodes=200_000, seed=seed, log_every=50_000)
        attacker = train_attack(adv_env, AttackConfig(targets=[0], lam=lam, train=train))
        stats = rollout_attacked(env, base, attacker, [0], lam, 1, 0)[0]
        matched = stats.regularized_return == oracle.value
        if env_factory is example2_env and lam > 0:
            meta = env.tree.construction_meta
            expected = [(meta.p, (meta.optimal[meta.p] + 1) % 3), (env.tree.depth - 1, 0)]
            matched = matched and learned_witness(env, base, attacker, lam) == expected
        matches += int(matched)
    assert matches >= 4


@pytest.mark.slow
def test_transform_identity_over_logged_transitions(grid_team):
    rng = np.random.default_rng(0)
    grid, grid_base = grid_team
    tree = example2_env()
    settings = [(grid, grid_base, (1,), 0.7), (tree, vi_base(tree), (0,), 1.3)]
    logged = 0
    for index, (env, base, targets, lam) in enumerate(settings):
        adv_env = wrap_adversarial(env, base, targets, lam)
        for seed in episode_seeds(index, 10_000):
            if logged >= 5_000 * (index + 1):
                break
            adv_state, state = adv_env.reset(seed), env.reset(seed)
            prev = [-1] * env.spec.n_agents
            while not adv_state.terminal:
                greedy = team_greedy_actions(base, state.observations, state.action_masks, prev)
                choices = tuple(int(rng.integers(env.spec.action_counts[agent])) for agent in targets)
                joint = list(greedy)
                for agent, choice in zip(targets, choices):
                    joint[agent] = choice
                adv_reward, adv_state = adv_env.step(adv_state, choices)
                reward, state = env.step(state, joint)
                deviations = sum(int(joint[agent] != greedy[agent]) for agent in targets)
                assert abs(adv_reward + reward + lam * deviations) <= 1e-12
                executed = adv_state.payload.last_joint_action
                assert all(executed[agent] == greedy[agent]
                           for agent in range(env.spec.n_agents) if agent not in targets)
                assert tuple(executed[agent] for agent in targets) == choices
                prev = joint
                logged += 1
    assert logged >= 10_000


@pytest.mark.slow
def test_sparse_attack_hurts_a_trained_team():
    env = GoalGatherEnv(GridTeamSpec())
    team_train = TrainConfig(episodes=20_000, learning_rate=5e-4, seed=0)
    base = train_base(env, 'QMIX', team_train)
    clean = evaluate_policy(env, base, 500, 1)
    win_rates = []
    for lam in (0.05, 2.0):
        adv_env = wrap_adversarial(env, base, [0], lam)
        attacker = train_attack(adv_env, AttackConfig(
            targets=[0], lam=lam, attacker_algo='single-agent-QMIX',
            train=TrainConfig(episodes=10_000, learning_rate=5e-4, seed=0)))
        stats = rollout_attacked(env, base, attacker, [0], lam, 500, 1)
        win_rates.append((np.mean([s.won for s in stats]), np.mean([s.attack_count for s in stats])))
    assert win_rates[0][0] <= clean.win_rate
    assert win_rates[0][1] >= win_rates[1][1]
