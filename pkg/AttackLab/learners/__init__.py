from .config import TrainConfig
from .evaluation import EvalStats, evaluate_policy
from .policy import QTeamPolicy, argmin_action, greedy_action, load_policy, save_policy
from .replay import ReplayBuffer
from .train import train_base

__all__ = [
    'EvalStats',
    'QTeamPolicy',
    'ReplayBuffer',
    'TrainConfig',
    'argmin_action',
    'evaluate_policy',
    'greedy_action',
    'load_policy',
    'save_policy',
    'train_base',
]
