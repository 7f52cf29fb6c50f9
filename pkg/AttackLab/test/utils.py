import numpy as np
import pytest
from sqlalchemy import create_engine, StaticPool, text
from sqlalchemy.orm import sessionmaker
from fastapi.testclient import TestClient

from ..database import Base
from ..main import app
from ..environments import GoalGatherEnv, GridTeamSpec, TreeGameEnv, TreeGameSpec, build_example1, build_example2
from ..harness.records import Aggregate, RunRecord, SeedResult
from ..learners import TrainConfig
from ..learners.tabular import policy_from_value_iteration

SQLALCHEMY_DATABASE_URL = 'sqlite:///./test.db'

engine = create_engine(
    SQLALCHEMY_DATABASE_URL,
    connect_args={'check_same_thread': False},
    poolclass=StaticPool,
)

TestingSessionLocal = sessionmaker(autocommit=False, autoflush=False, bind=engine)

Base.metadata.create_all(bind=engine)


def override_get_db():
    db = TestingSessionLocal()
    try:
        yield db
    finally:
        db.close()


client = TestClient(app)


def example1_env(seed=0, T=6, t=3, p=1):
    return TreeGameEnv(build_example1(T, t, p, seed))


def example2_env(seed=0, T=5, p=2):
    return TreeGameEnv(build_example2(T, p, seed))


def distinct_tree_env(T=4, branching=2, seed=0):
    """Tree whose leaves are a permutation, so no Q row has ties."""
    rng = np.random.default_rng(seed)
    leaves = rng.permutation(branching ** T).astype(np.float64) - 5.0
    return TreeGameEnv(TreeGameSpec(branching, T, leaves))


def tiny_grid(horizon=10):
    return GoalGatherEnv(GridTeamSpec(width=3, height=3, n_agents=2, n_goals=2, horizon=horizon))


def vi_base(env):
    return policy_from_value_iteration(env)


def quick_tabular(episodes=5000, seed=0):
    return TrainConfig(episodes=episodes, eps_anneal_episodes=int(0.8 * episodes), lr_schedule='constant',
                       learning_rate=1.0, seed=seed, log_every=1000)


def quick_network(episodes=20, seed=0):
    return TrainConfig(episodes=episodes, batch_size=8, buffer_capacity=200, hidden=[16], mixer_embed=4,
                       hypernet_hidden=8, target_update_period=5, seed=seed, log_every=10)


def seed_result(index, win_rate, attacked=(1.0,), total=10.0):
    return SeedResult(seed_index=index, seed=100 + index, win_rate=win_rate, mean_return=win_rate * 10,
                      attacked_steps=list(attacked), mean_total_steps=total, n_episodes=10)


def sample_record(method='OPT', parameter='lambda=1', scores=(0.3, 0.4, 0.5)):
    from ..harness.config import config_hash
    config_text = 'attack.method = OPT\n'
    seeds = [seed_result(i, s) for i, s in enumerate(scores)]
    return RunRecord(
        name='sample',
        method=method,
        parameter=parameter,
        config_text=config_text,
        config_hash=config_hash(config_text),
        seeds=seeds,
        aggregate=Aggregate(retained=[0, 1, 2], scores=list(scores), mean_score=float(np.mean(scores)),
                            mean_win_rate=float(np.mean(scores)), mean_return=float(np.mean(scores)) * 10,
                            attacked_steps=[1.0], mean_total_steps=10.0),
        wall_clock=1.5,
    )


@pytest.fixture
def test_run():
    from ..registry import register_run
    db = TestingSessionLocal()
    run_id = register_run(db, sample_record())
    db.close()
    yield run_id
    with engine.connect() as connection:
        connection.execute(text("DELETE FROM seed_results;"))
        connection.execute(text("DELETE FROM runs;"))
        connection.commit()
