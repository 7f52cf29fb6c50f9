from .goal_gather import GoalGatherEnv, GridTeamSpec, goalgather_dynamics
from .tree_games import (
    TreeConstruction,
    TreeGameEnv,
    TreeGameSpec,
    build_example1,
    build_example2,
    build_random_tree,
)

__all__ = [
    'GoalGatherEnv',
    'GridTeamSpec',
    'TreeConstruction',
    'TreeGameEnv',
    'TreeGameSpec',
    'build_example1',
    'build_example2',
    'build_random_tree',
    'goalgather_dynamics',
]
