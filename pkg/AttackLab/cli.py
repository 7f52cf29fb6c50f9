"""Command line entry point: ``python -m AttackLab.cli <command> --config FILE``.

Exit codes: 0 success, 2 configuration error, 3 degraded run (a seed
failed), 1 any other laboratory error.
"""
from __future__ import annotations

import argparse
import json
import logging
import logging.config
import os
import sys
from pathlib import Path
from typing import Sequence

from pydantic import ValidationError

from .baselines.oracles import oracle_budget_dp, oracle_reg_dp, replay_witness
from .errors import AttackLabError, ConfigError
from .harness import (
    ExperimentConfig,
    RunRecord,
    build_env,
    derive_seeds,
    emit_report,
    find_records,
    load_config,
    load_record,
    match_baselines,
    run_experiment,
    sweep_lambda,
)
from .learners import evaluate_policy, save_policy, train_base

logger = logging.getLogger('AttackLab.cli')

LOGGING_INI = Path(__file__).with_name('logging.ini')

EXIT_OK, EXIT_ERROR, EXIT_CONFIG, EXIT_DEGRADED = 0, 1, 2, 3

LEARNED = {'OPT', 'RL-F'}
BASELINES = {'Ra-R', 'Ra-L', 'Ru-B', 'Ru-D', 'none'}
ORACLES = {'oracle-budget', 'oracle-reg'}


def setup_logging(verbose: bool):
    if LOGGING_INI.exists():
        logging.config.fileConfig(str(LOGGING_INI), disable_existing_loggers=False)
    else:
        logging.basicConfig(level=logging.INFO)
    if verbose:
        logging.getLogger('AttackLab').setLevel(logging.DEBUG)


def with_master_seed(config: ExperimentConfig, seed: int | None) -> ExperimentConfig:
    if seed is None:
        return config
    data = config.model_dump(by_alias=True, exclude_unset=True)
    data.setdefault('experiment', {})['master_seed'] = seed
    return ExperimentConfig.model_validate(data)


def _config(args) -> ExperimentConfig:
    if not args.config:
        raise ConfigError('--config is required')
    return with_master_seed(load_config(args.config), args.seed)


def _require(config: ExperimentConfig, methods: set[str], command: str):
    if config.attack.method not in methods:
        raise ConfigError(f'{command} runs attack.method in {sorted(methods)}, got {config.attack.method}')


def _finish(records: Sequence[RunRecord], args) -> int:
    if args.register:
        from .database import SessionLocal
        from .registry import register_run
        db = SessionLocal()
        try:
            for record in records:
                register_run(db, record)
        finally:
            db.close()
    print(emit_report(records, args.format), end='')
    return EXIT_DEGRADED if any(record.degraded for record in records) else EXIT_OK


def cmd_train_base(args) -> int:
    config = _config(args)
    env = build_env(config)
    seed = derive_seeds(config.experiment.master_seed, 1)[0]
    policy = train_base(env, config.base.algo, config.base.train.model_copy(update={'seed': seed}))
    stats = evaluate_policy(env, policy, config.eval.episodes, seed)
    if args.out:
        path = save_policy(policy, Path(args.out) / 'base')
        logger.info('saved base policy to %s', path)
    print(json.dumps({'algo': config.base.algo, 'seed': seed, **stats.__dict__}))
    return EXIT_OK


def cmd_train_attack(args) -> int:
    config = _config(args)
    _require(config, LEARNED, 'train-attack')
    if args.sweep:
        records, best = sweep_lambda(config, out_dir=args.out)
        logger.info('selected lambda %g', best)
        return _finish(records, args)
    return _finish([run_experiment(config, args.out)], args)


def cmd_attack_baseline(args) -> int:
    config = _config(args)
    if args.match:
        opt_record = load_record(args.match)
        ra_l, ru_b = match_baselines(opt_record, config, out_dir=args.out)
        return _finish([opt_record, ra_l, ru_b], args)
    _require(config, BASELINES, 'attack-baseline')
    return _finish([run_experiment(config, args.out)], args)


def cmd_oracle(args) -> int:
    config = _config(args)
    _require(config, ORACLES, 'oracle')
    tree = build_env(config).tree
    if config.attack.method == 'oracle-budget':
        result = oracle_budget_dp(tree, config.attack.N)
    else:
        result = oracle_reg_dp(tree, config.attack.lam)
    replayed, _ = replay_witness(tree, result.witness)
    print(json.dumps({
        'objective': result.objective,
        'value': result.value,
        'team_return': result.team_return,
        'replayed_team_return': replayed,
        'attack_count': result.attack_count,
        'witness': result.witness_text(),
    }))
    return EXIT_OK


def cmd_evaluate(args) -> int:
    return _finish([run_experiment(_config(args), args.out)], args)


def cmd_report(args) -> int:
    records = [record for root in args.records for record in find_records(root)]
    print(emit_report(records, args.format), end='')
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog='attacklab', description=__doc__.splitlines()[0])
    commands = parser.add_subparsers(dest='command', required=True)

    def command(name, handler, help):
        sub = commands.add_parser(name, help=help)
        sub.add_argument('--config', type=Path)
        sub.add_argument('--seed', type=int, help='override experiment.master_seed (u64)')
        sub.add_argument('--out', type=Path, default=os.getenv('ATTACKLAB_OUT'))
        sub.add_argument('--format', choices=('table', 'delimited'), default='table')
        sub.add_argument('--register', action='store_true', help='store the run in the registry database')
        sub.add_argument('--verbose', action='store_true')
        sub.set_defaults(handler=handler)
        return sub

    command('train-base', cmd_train_base, 'train and evaluate the base team only')
    attack = command('train-attack', cmd_train_attack, 'learn OPT or RL-F attacks over all seeds')
    attack.add_argument('--sweep', action='store_true', help='sweep attack.lambdas and pick the strongest')
    baseline = command('attack-baseline', cmd_attack_baseline, 'evaluate Ra-R, Ra-L, Ru-B, Ru-D or no attack')
    baseline.add_argument('--match', type=Path, help='OPT run record to match Ra-L and Ru-B against')
    command('oracle', cmd_oracle, 'solve the exact budget or regularized oracle on a tree game')
    command('evaluate', cmd_evaluate, 'run the full protocol for any attack method')
    report = command('report', cmd_report, 'tabulate stored run records')
    report.add_argument('records', nargs='*', type=Path, default=[Path('.')])
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    setup_logging(args.verbose)
    try:
        return args.handler(args)
    except (ConfigError, ValidationError) as err:
        logger.error('configuration error: %s', err)
        return EXIT_CONFIG
    except AttackLabError as err:
        logger.error('%s: %s', type(err).__name__, err)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
