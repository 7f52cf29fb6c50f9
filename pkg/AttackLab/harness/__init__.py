from .aggregate import aggregate_all, aggregate_median3, aggregate_seeds
from .config import (
    AttackMethodConfig,
    EnvConfig,
    ExperimentConfig,
    config_hash,
    dump_config,
    load_config,
    parse_config_text,
)
from .experiment import (
    build_env,
    derive_seeds,
    match_baselines,
    rederive_seed_counts,
    run_experiment,
    run_grid,
    sweep_lambda,
)
from .records import Aggregate, RunRecord, SeedResult, find_records, load_record, merge_records, save_record
from .report import DELIMITED_HEADER, ReportRow, emit_report, parse_report
