"""Experiment runner: one config, several seeds, one RunRecord.

Per seed the base team is trained (or solved), the configured attack is
trained if it learns, and ``eval.episodes`` attacked rollouts are scored.
Seeds come from a ``SeedSequence`` over the master seed, so a config fully
determines every number it reports.
"""
from __future__ import annotations

import json
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Sequence

import numpy as np

from ..attack import (
    AttackConfig,
    AttackStats,
    PassThrough,
    ScriptedAttack,
    attacked_rollouts,
    default_attacker_algo,
    rederive_attack_counts,
    rollout_attacked,
    train_attack,
    wrap_adversarial,
)
from ..baselines.heuristics import attack_dense, attack_random, attack_rule_based, threshold_grid
from ..baselines.oracles import oracle_budget_dp, oracle_reg_dp
from ..baselines.rlf import rollout_rlf, train_rlf
from ..environments import GoalGatherEnv, TreeGameEnv, build_example1, build_example2, build_random_tree
from ..errors import AttackLabError, ConfigError, EmptyEvaluation
from ..learners import QTeamPolicy, save_policy, train_base
from ..learners.episodes import episode_seeds
from ..mmdp import Environment
from .aggregate import aggregate_seeds
from .config import ExperimentConfig, config_hash, dump_config
from .records import RECORD_FILE, RunRecord, SeedResult, save_record

logger = logging.getLogger(__name__)

# (env + base sections, seed) -> trained base policy, shared by sweeps within one process
_BASE_CACHE: dict[tuple[str, int], QTeamPolicy] = {}


def build_env(config: ExperimentConfig) -> Environment:
    env = config.env
    if env.kind == 'tree_example1':
        return TreeGameEnv(build_example1(env.T, env.t, env.p, env.tree_seed))
    if env.kind == 'tree_example2':
        return TreeGameEnv(build_example2(env.T, env.p, env.tree_seed))
    if env.kind == 'tree_random':
        return TreeGameEnv(build_random_tree(env.T, env.branching, env.tree_seed))
    return GoalGatherEnv(env.grid)


def derive_seeds(master_seed: int, n: int) -> list[int]:
    return [int(s) for s in np.random.SeedSequence(master_seed).generate_state(n, dtype=np.uint64)]


def _base_policy(config: ExperimentConfig, env: Environment, seed: int) -> QTeamPolicy:
    key = (json.dumps(config.model_dump(include={'env', 'base'}, mode='json'), sort_keys=True), seed)
    if key not in _BASE_CACHE:
        train = config.base.train.model_copy(update={'seed': seed})
        _BASE_CACHE[key] = train_base(env, config.base.algo, train)
    return _BASE_CACHE[key]


def summarize(stats: Sequence[AttackStats], seed_index: int, seed: int, reports_wins: bool) -> SeedResult:
    if not stats:
        raise EmptyEvaluation('no evaluation episodes')
    return SeedResult(
        seed_index=seed_index,
        seed=seed,
        win_rate=float(np.mean([s.won for s in stats])) if reports_wins else None,
        mean_return=float(np.mean([s.team_return for s in stats])),
        mean_regularized_return=float(np.mean([s.regularized_return for s in stats])),
        attacked_steps=[float(x) for x in np.mean([s.attacked_steps for s in stats], axis=0)],
        mean_total_steps=float(np.mean([s.total_steps for s in stats])),
        n_episodes=len(stats),
    )


def attack_seed(config: ExperimentConfig, env: Environment, base: QTeamPolicy, seed: int,
                seed_dir: Path | None = None) -> list[AttackStats]:
    """Train (if needed) and evaluate the configured attack against one base policy."""
    attack = config.attack
    k, n = attack.targets, config.eval.episodes
    eval_seed = episode_seeds(seed, 2)[1]
    method = attack.method

    if method == 'none':
        return attacked_rollouts(env, base, k, 0.0, PassThrough(), n, eval_seed)
    if method == 'OPT':
        adv_env = wrap_adversarial(env, base, k, attack.lam)
        attacker = train_attack(adv_env, AttackConfig(
            targets=k,
            lam=attack.lam,
            train=attack.train.model_copy(update={'seed': seed}),
            attacker_algo=attack.attacker_algo or default_attacker_algo(adv_env),
        ))
        if seed_dir:
            save_policy(attacker, seed_dir / 'attacker')
        return rollout_attacked(env, base, attacker, k, attack.lam, n, eval_seed)
    if method in ('Ra-R', 'Ra-L'):
        mode = 'random' if method == 'Ra-R' else 'lowestQ'
        return attack_random(mode, attack.prob, base, env, k, n, eval_seed)
    if method == 'Ru-B':
        return attack_rule_based(attack.rule, attack.threshold, base, env, k, n, eval_seed)
    if method == 'Ru-D':
        return attack_dense(base, env, k, n, eval_seed)
    if method == 'RL-F':
        timing = train_rlf(env, base, k, attack.c_adv, attack.train.model_copy(update={'seed': seed}))
        if seed_dir:
            save_policy(timing, seed_dir / 'timing')
        return rollout_rlf(env, base, timing, k, n, eval_seed, lam=attack.c_adv)
    if method == 'oracle-budget':
        result = oracle_budget_dp(env.tree, attack.N)
        return attacked_rollouts(env, base, k, 0.0, ScriptedAttack(result.witness), n, eval_seed)
    result = oracle_reg_dp(env.tree, attack.lam)
    return attacked_rollouts(env, base, k, attack.lam, ScriptedAttack(result.witness), n, eval_seed)


def run_seed(config: ExperimentConfig, seed_index: int, seed: int, out_dir: str | Path | None = None) -> SeedResult:
    seed_dir = Path(out_dir) / f'seed_{seed_index}' if out_dir else None
    try:
        env = build_env(config)
        base = _base_policy(config, env, seed)
        artifacts = {}
        if seed_dir:
            seed_dir.mkdir(parents=True, exist_ok=True)
            artifacts['base'] = str(save_policy(base, seed_dir / 'base'))
        stats = attack_seed(config, env, base, seed, seed_dir)
        result = summarize(stats, seed_index, seed, env.reports_wins)
        if seed_dir:
            for name in ('attacker', 'timing'):
                if (seed_dir / f'{name}.manifest.json').exists():
                    artifacts[name] = str(seed_dir / f'{name}.manifest.json')
            log_path = seed_dir / 'attack_log.json'
            log_path.write_text(json.dumps([[list(row) for row in s.step_log] for s in stats]))
            artifacts['attack_log'] = str(log_path)
        result.artifacts = artifacts
    except AttackLabError as err:
        logger.warning('seed %d (%d) failed: %s', seed_index, seed, err)
        return SeedResult(seed_index=seed_index, seed=seed, failed=True, error=f'{type(err).__name__}: {err}')
    logger.info('seed %d: score %.3f attacked %s of %.1f steps', seed_index, result.score,
                [round(x, 3) for x in result.attacked_steps], result.mean_total_steps)
    return result


def run_experiment(config: ExperimentConfig, out_dir: str | Path | None = None) -> RunRecord:
    started = time.perf_counter()
    text = dump_config(config)
    seeds = derive_seeds(config.experiment.master_seed, config.experiment.seeds)
    logger.info('experiment %s: %s %s on %s, %d seeds', config.experiment.name, config.attack.method,
                config.attack.parameter, config.env.kind, len(seeds))

    if config.experiment.workers > 1:
        with ProcessPoolExecutor(max_workers=config.experiment.workers) as pool:
            futures = [pool.submit(run_seed, config, i, seed, out_dir) for i, seed in enumerate(seeds)]
            results = [future.result() for future in futures]
    else:
        results = [run_seed(config, i, seed, out_dir) for i, seed in enumerate(seeds)]

    degraded = any(result.failed for result in results)
    if degraded:
        logger.warning('experiment %s degraded: %d of %d seeds failed', config.experiment.name,
                       sum(result.failed for result in results), len(results))
    record = RunRecord(
        name=config.experiment.name,
        method=config.attack.method,
        parameter=config.attack.parameter,
        config_text=text,
        config_hash=config_hash(text),
        seeds=results,
        aggregate=None if degraded else aggregate_seeds(results),
        degraded=degraded,
        wall_clock=time.perf_counter() - started,
    )
    if out_dir:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / 'config.txt').write_text(text, encoding='utf-8')
        record.artifacts['config'] = str(out_dir / 'config.txt')
        record.artifacts['record'] = str(out_dir / RECORD_FILE)
        save_record(record, out_dir)
    return record


def run_grid(configs: Sequence[ExperimentConfig], out_dir: str | Path | None = None) -> list[RunRecord]:
    records = []
    for index, config in enumerate(configs):
        sub_dir = Path(out_dir) / f'{index:02d}-{config.attack.method}' if out_dir else None
        records.append(run_experiment(config, sub_dir))
    return records


def sweep_lambda(config: ExperimentConfig, lambdas: Sequence[float] | None = None,
                 out_dir: str | Path | None = None) -> tuple[list[RunRecord], float]:
    """One OPT run per λ; picks the λ with the lowest retained mean score, ties to the larger λ."""
    lambdas = list(lambdas if lambdas is not None else config.attack.lambdas)
    if config.attack.method != 'OPT' or not lambdas:
        raise ConfigError('a lambda sweep needs attack.method = OPT and a non-empty lambda grid')
    configs = [config.with_attack(lam=lam) for lam in lambdas]
    records = run_grid(configs, out_dir)
    scored = [(record.aggregate.mean_score, -lam) for record, lam in zip(records, lambdas) if not record.degraded]
    if not scored:
        raise EmptyEvaluation('every lambda in the sweep degraded')
    best = -min(scored)[1]
    logger.info('lambda sweep over %s selected %g', lambdas, best)
    return records, best


def match_baselines(opt_record: RunRecord, config: ExperimentConfig, thresholds: Sequence[float] | None = None,
                    out_dir: str | Path | None = None) -> tuple[RunRecord, RunRecord]:
    """Ra-L at OPT's attack rate and Ru-B at (at most) OPT's mean attack count."""
    if opt_record.aggregate is None:
        raise EmptyEvaluation('cannot match baselines against a degraded OPT run')
    targets = config.attack.targets
    prob = min(1.0, opt_record.aggregate.attacked_fraction / len(targets))
    out_dir = Path(out_dir) if out_dir else None
    ra_l = run_experiment(config.with_attack(method='Ra-L', prob=prob), out_dir / 'Ra-L' if out_dir else None)

    opt_count = sum(opt_record.aggregate.attacked_steps)
    if thresholds is None:
        thresholds = config.attack.thresholds or list(threshold_grid(21))
    candidates = []
    for index, threshold in enumerate(thresholds):
        sub_dir = out_dir / f'Ru-B-{index:02d}' if out_dir else None
        record = run_experiment(config.with_attack(method='Ru-B', threshold=float(threshold)), sub_dir)
        if not record.degraded:
            candidates.append((sum(record.aggregate.attacked_steps), record))
    if not candidates:
        raise EmptyEvaluation('every Ru-B threshold degraded')
    within = [c for c in candidates if c[0] <= opt_count]
    ru_b = max(within, key=lambda c: c[0])[1] if within else min(candidates, key=lambda c: c[0])[1]
    logger.info('matched Ra-L at p=%.3f and Ru-B at %s (OPT attacks %.3f steps)', prob, ru_b.parameter, opt_count)
    return ra_l, ru_b


def rederive_seed_counts(result: SeedResult, n_targets: int) -> list[float]:
    """Mean attacked steps per agent recomputed from the stored deviation log."""
    episodes = json.loads(Path(result.artifacts['attack_log']).read_text())
    counts = [rederive_attack_counts(log, n_targets) for log in episodes]
    return [float(x) for x in np.mean(counts, axis=0)]
