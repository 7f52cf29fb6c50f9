import json

import pytest

from ..environments import GoalGatherEnv, TreeGameEnv
from ..errors import ConfigError, RecordMismatch, WrongArity
from ..harness import (
    DELIMITED_HEADER,
    aggregate_all,
    aggregate_median3,
    aggregate_seeds,
    build_env,
    config_hash,
    derive_seeds,
    dump_config,
    emit_report,
    find_records,
    load_record,
    match_baselines,
    merge_records,
    parse_config_text,
    parse_report,
    rederive_seed_counts,
    run_experiment,
    save_record,
    sweep_lambda,
)
from ..harness.config import parse_value
from .utils import sample_record, seed_result

TREE = """
env.kind = tree_example1
env.T = 6
env.t = 3
env.p = 1
eval.episodes = 2
experiment.seeds = 1
experiment.master_seed = 7
"""

TABULAR_TRAIN = """
attack.train.episodes = 4000
attack.train.eps_anneal_episodes = 3200
attack.train.lr_schedule = constant
attack.train.learning_rate = 1.0
"""


def tree_config(attack: str):
    return parse_config_text(TREE + attack)


def test_parse_values():
    assert parse_value(' 3 ') == 3
    assert parse_value('2.5') == 2.5
    assert parse_value('TRUE') is True
    assert parse_value('none') is None
    assert parse_value('0,') == [0]
    assert parse_value('0, 1') == [0, 1]
    assert parse_value('[]') == []
    assert parse_value('maxdiff') == 'maxdiff'


def test_config_dump_round_trip():
    config = tree_config('attack.method = Ru-B\nattack.rule = entropy\nattack.threshold = -0.25\n'
                         'attack.targets = 0\nattack.thresholds = 0.1, 0.2\n')
    text = dump_config(config)
    assert 'attack.targets = 0,\n' in text
    assert 'attack.rule = entropy\n' in text
    assert 'attack.thresholds = 0.1, 0.2\n' in text
    assert text.splitlines() == sorted(text.splitlines())
    again = parse_config_text(text)
    assert dump_config(again) == text
    assert again.model_dump() == config.model_dump()
    assert config_hash(again) == config_hash(text)


def test_config_defaults_and_comments():
    config = parse_config_text('# nothing but defaults\n\nattack.method = OPT  # learned\nattack.lambda = 2\n')
    assert config.env.kind == 'tree_example1' and config.base.algo == 'tabular-VI'
    assert config.attack.lam == 2.0 and config.attack.parameter == 'lambda=2'
    assert config.experiment.seeds == 5


@pytest.mark.parametrize('text', [
    'env.kind tree_example1',
    'env.T = 6\nenv.T = 7',
    'env.colour = red',
    'env.T = six',
    'attack.method = none\nattack.prob = 0.2',
    'attack.method = Ra-R\nattack.prob = 1.5',
    'attack.method = OPT\nattack.lambda = -1',
    'env.kind = goalgather\nbase.algo = QMIX\nattack.method = oracle-budget',
    'attack.method = oracle-reg\nbase.algo = tabular-Q',
    'env.kind = goalgather\nbase.algo = tabular-Q',
    'env = 3\nenv.T = 4',
])
def test_config_errors(text):
    with pytest.raises(ConfigError):
        parse_config_text(text)


def test_missing_config_file(tmp_path):
    from ..harness import load_config
    with pytest.raises(ConfigError):
        load_config(tmp_path / 'absent.txt')


def test_with_attack_drops_the_old_method_parameters():
    config = tree_config('attack.method = OPT\nattack.lambda = 3\n')
    moved = config.with_attack(method='Ra-R', prob=0.2)
    assert moved.attack.parameter == 'p=0.2'
    assert 'lambda' not in dump_config(moved)
    assert config.with_attack(lam=0.5).attack.parameter == 'lambda=0.5'


def test_parameters_by_method():
    assert tree_config('attack.method = Ru-B\nattack.rule = entropy\nattack.threshold = -0.5').attack.parameter \
        == 'entropy>=-0.5'
    assert tree_config('attack.method = RL-F\nattack.c_adv = 0.25').attack.parameter == 'c_adv=0.25'
    assert tree_config('attack.method = oracle-budget\nattack.N = 3').attack.parameter == 'N=3'
    assert tree_config('attack.method = Ru-D').attack.parameter == '-'


def test_derive_seeds():
    seeds = derive_seeds(0, 5)
    assert seeds == derive_seeds(0, 5) and len(set(seeds)) == 5
    assert all(0 <= seed < 2 ** 64 for seed in seeds)
    assert derive_seeds(1, 5) != seeds


def test_build_env():
    assert isinstance(build_env(tree_config('')), TreeGameEnv)
    assert build_env(parse_config_text('env.kind = tree_random\nenv.T = 4\nenv.branching = 3')).tree.branching == 3
    assert build_env(parse_config_text('env.kind = tree_example2\nenv.T = 5\nenv.p = 2')).tree.branching == 3
    grid = build_env(parse_config_text('env.kind = goalgather\nenv.grid.width = 4\nbase.algo = QMIX'))
    assert isinstance(grid, GoalGatherEnv) and grid.grid.width == 4


def test_median_of_three():
    seeds = [seed_result(i, score) for i, score in enumerate([0.9, 0.1, 0.5, 0.3, 0.7])]
    aggregate = aggregate_median3(seeds)
    assert aggregate.retained == [2, 3, 4]
    assert aggregate.scores == [0.5, 0.3, 0.7]
    assert aggregate.mean_score == pytest.approx(0.5)


def test_median_of_three_breaks_ties_by_seed_index():
    aggregate = aggregate_median3([seed_result(i, 0.5) for i in range(5)])
    assert aggregate.retained == [1, 2, 3]


def test_median_of_three_needs_five_seeds():
    with pytest.raises(WrongArity):
        aggregate_median3([seed_result(i, 0.5) for i in range(4)])
    with pytest.raises(WrongArity):
        aggregate_all([])


def test_other_seed_counts_keep_every_seed():
    aggregate = aggregate_seeds([seed_result(i, s, attacked=(i, 2.0)) for i, s in enumerate([0.2, 0.4, 0.9])])
    assert aggregate.retained == [0, 1, 2]
    assert aggregate.mean_score == pytest.approx(0.5)
    assert aggregate.attacked_steps == [1.0, 2.0]


def test_tree_scores_use_the_return():
    seed = seed_result(0, 0.5).model_copy(update={'win_rate': None, 'mean_return': -42.0})
    assert seed.score == -42.0
    assert aggregate_all([seed]).mean_win_rate is None


def test_empty_report_is_just_the_header():
    assert emit_report([], 'delimited') == DELIMITED_HEADER + '\n'
    assert parse_report(emit_report([], 'delimited')) == []


def test_delimited_report_round_trip():
    degraded = sample_record(method='Ra-R', parameter='p=0.1').model_copy(update={'aggregate': None, 'degraded': True})
    text = emit_report([sample_record(), degraded], 'delimited')
    rows = parse_report(text)
    assert rows[0].method == 'OPT' and rows[0].parameter == 'lambda=1'
    assert rows[0].retained_scores == (0.3, 0.4, 0.5)
    assert rows[0].mean_score == pytest.approx(0.4)
    assert rows[0].attacked_steps == (1.0,) and rows[0].total_steps == 10.0
    assert rows[0].config_hash == sample_record().config_hash
    assert rows[1].retained_scores is None and rows[1].method == 'Ra-R'
    with pytest.raises(ValueError):
        parse_report('method\tparameter\n')


def test_table_report():
    table = emit_report([sample_record()])
    lines = table.splitlines()
    assert lines[0].startswith('Attack type')
    assert set(lines[1]) <= {'-', '+'}
    assert 'OPT' in lines[2] and '1.000 / 10.000' in lines[2] and '(mean 0.400)' in lines[2]


def test_record_hash_is_checked(tmp_path):
    record = sample_record()
    save_record(record, tmp_path)
    assert load_record(tmp_path) == record
    tampered = record.model_copy(update={'config_text': 'attack.method = none\n'})
    with pytest.raises(RecordMismatch):
        tampered.check_hash()
    (tmp_path / 'run_record.json').write_text(tampered.model_dump_json())
    with pytest.raises(RecordMismatch):
        load_record(tmp_path / 'run_record.json')


def test_merge_records():
    first = sample_record().model_copy(update={'seeds': [seed_result(2, 0.1)]})
    second = sample_record().model_copy(update={'seeds': [seed_result(0, 0.4)], 'wall_clock': 2.0})
    merged = merge_records([first, second])
    assert [seed.seed_index for seed in merged.seeds] == [0, 2]
    assert merged.wall_clock == pytest.approx(3.5)
    other = sample_record().model_copy(update={'config_hash': 'f' * 64})
    with pytest.raises(RecordMismatch):
        merge_records([first, other])
    with pytest.raises(RecordMismatch):
        merge_records([])


def test_none_attack_run():
    record = run_experiment(tree_config('attack.method = none\n'))
    assert not record.degraded
    assert record.aggregate.scores == [50.0]
    assert record.aggregate.attacked_steps == [0.0]
    assert record.aggregate.mean_total_steps == 6.0
    assert record.config_hash == config_hash(record.config_text)


def test_runs_are_reproducible():
    config = tree_config('attack.method = Ra-R\nattack.prob = 0.4\nexperiment.seeds = 3\neval.episodes = 10\n')
    assert run_experiment(config).comparable() == run_experiment(config).comparable()


def test_parallel_workers_give_the_same_record():
    text = 'attack.method = Ra-R\nattack.prob = 0.4\nexperiment.seeds = 2\neval.episodes = 5\n'
    serial = run_experiment(tree_config(text))
    parallel = run_experiment(tree_config(text + 'experiment.workers = 2\n'))
    assert [s.model_dump() for s in serial.seeds] == [s.model_dump() for s in parallel.seeds]


def test_zero_probability_random_attack_is_no_attack():
    quiet = run_experiment(tree_config('attack.method = Ra-R\nattack.prob = 0\nexperiment.seeds = 5\n'))
    none = run_experiment(tree_config('attack.method = none\nexperiment.seeds = 5\n'))
    assert quiet.aggregate == none.aggregate
    assert len(quiet.aggregate.retained) == 3


def test_failed_seed_degrades_the_run():
    record = run_experiment(tree_config('attack.method = OPT\nattack.attacker_algo = multi-agent-QMIX\n'))
    assert record.degraded and record.aggregate is None
    assert record.seeds[0].failed and 'ConfigMismatch' in record.seeds[0].error
    assert 'degraded' in emit_report([record], 'delimited')


def test_opt_run_writes_artifacts(tmp_path):
    record = run_experiment(tree_config('attack.method = OPT\n' + TABULAR_TRAIN), tmp_path)
    assert record.aggregate.scores == [-100.0]
    assert record.aggregate.attacked_steps == [2.0]
    assert (tmp_path / 'config.txt').read_text() == record.config_text
    seed = record.seeds[0]
    assert set(seed.artifacts) == {'base', 'attacker', 'attack_log'}
    assert rederive_seed_counts(seed, 1) == seed.attacked_steps
    assert len(json.loads((tmp_path / 'seed_0' / 'attack_log.json').read_text())) == 2
    assert find_records(tmp_path) == [record]


def test_oracle_methods_replay_their_witness():
    budget = run_experiment(tree_config('attack.method = oracle-budget\nattack.N = 2\n'))
    assert budget.aggregate.scores == [-100.0] and budget.aggregate.attacked_steps == [2.0]
    reg = run_experiment(tree_config('attack.method = oracle-reg\nattack.lambda = 1e6\n'))
    assert reg.aggregate.scores == [50.0] and reg.aggregate.attacked_steps == [0.0]


def test_rlf_run_on_a_binary_tree():
    record = run_experiment(tree_config('attack.method = RL-F\nattack.c_adv = 0\n' + TABULAR_TRAIN))
    assert record.aggregate.scores == [-100.0]


def test_sweep_lambda_picks_the_strongest_attack(tmp_path):
    config = tree_config('attack.method = OPT\nattack.lambdas = 1, 1000000\n' + TABULAR_TRAIN)
    records, best = sweep_lambda(config, out_dir=tmp_path)
    assert best == 1.0
    assert [record.parameter for record in records] == ['lambda=1', 'lambda=1e+06']
    assert len(find_records(tmp_path)) == 2
    with pytest.raises(ConfigError):
        sweep_lambda(tree_config('attack.method = none\n'), [1.0])
    with pytest.raises(ConfigError):
        sweep_lambda(config, [])


def test_match_baselines():
    config = tree_config('attack.method = OPT\nattack.lambda = 1\n' + TABULAR_TRAIN)
    opt = run_experiment(config)
    ra_l, ru_b = match_baselines(opt, config, thresholds=[0.0, 0.5, 0.9999])
    assert ra_l.method == 'Ra-L' and ra_l.parameter.startswith('p=0.333')
    assert ru_b.method == 'Ru-B'
    candidates = [run_experiment(config.with_attack(method='Ru-B', threshold=t)) for t in (0.0, 0.5, 0.9999)]
    counts = [sum(c.aggregate.attacked_steps) for c in candidates]
    within = [c for c in counts if c <= 2.0]
    assert sum(ru_b.aggregate.attacked_steps) == (max(within) if within else min(counts))
