from .adversarial_env import AdversarialEnv, AdversarialPayload, check_targets, wrap_adversarial
from .rollout import (
    AttackStats,
    GreedyAttacker,
    PassThrough,
    ScriptedAttack,
    attacked_rollouts,
    rederive_attack_counts,
    rollout_attacked,
)
from .train import AttackConfig, default_attacker_algo, train_attack
