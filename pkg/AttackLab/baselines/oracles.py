"""Exact solvers on tree games.

All solvers run backward induction one tree level at a time with numpy:
the values of level ``d + 1`` reshaped to ``[b**d, b]`` are the Q rows of
level ``d`` (children of node ``i`` are ``i * b + a``). Un-attacked steps
follow the base greedy action a* (lowest index on ties); witnesses prefer
not attacking whenever that is optimal, then the lowest action index.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterator, Literal, Sequence

import numpy as np

from ..environments.tree_games import TreeGameEnv, TreeGameSpec, _check_size
from ..errors import InvalidIndices

logger = logging.getLogger(__name__)

Witness = tuple[tuple[int, int, int], ...]


@dataclass(frozen=True)
class QTable:
    tree: TreeGameSpec
    levels: tuple[np.ndarray, ...]

    def node_index(self, prefix: Sequence[int]) -> int:
        index = 0
        for action in prefix:
            index = index * self.tree.branching + int(action)
        return index

    def row(self, prefix: Sequence[int]) -> np.ndarray:
        if len(prefix) >= self.tree.depth:
            raise InvalidIndices('leaves have no Q row')
        return self.levels[len(prefix)][self.node_index(prefix)]

    def greedy(self, prefix: Sequence[int]) -> int:
        return int(np.argmax(self.row(prefix)))

    def greedy_level(self, depth: int) -> np.ndarray:
        return np.argmax(self.levels[depth], axis=1)

    def argmin_level(self, depth: int) -> np.ndarray:
        return np.argmin(self.levels[depth], axis=1)

    @property
    def value(self) -> float:
        return float(self.levels[0][0].max())

    def rows(self) -> Iterator[tuple[tuple[int, ...], np.ndarray]]:
        b = self.tree.branching
        for depth, level in enumerate(self.levels):
            for index, row in enumerate(level):
                prefix = []
                for _ in range(depth):
                    index, digit = divmod(index, b)
                    prefix.append(digit)
                yield tuple(reversed(prefix)), row


@dataclass(frozen=True)
class OracleResult:
    # queried objective: team return (budget) or attacker objective (regularized, forced)
    value: float
    witness: Witness
    attack_count: int
    team_return: float
    path: tuple[int, ...]
    objective: Literal['budget', 'regularized', 'forced']

    def witness_text(self) -> str:
        return ' '.join(f'{step}:{action}' for step, _, action in self.witness)


def value_iteration(tree: TreeGameSpec) -> QTable:
    _check_size(tree.depth, tree.branching)
    b = tree.branching
    values = tree.leaf_rewards.astype(np.float64)
    levels = [None] * tree.depth
    for depth in reversed(range(tree.depth)):
        q = values.reshape(b ** depth, b)
        levels[depth] = q.copy()
        values = q.max(axis=1)
    return QTable(tree, tuple(levels))


def _result(tree: TreeGameSpec, path: list[int], witness: list[tuple[int, int, int]],
            lam: float, objective) -> OracleResult:
    team_return = tree.reward_of(path)
    count = len(witness)
    value = team_return if objective == 'budget' else -team_return - lam * count
    return OracleResult(value, tuple(witness), count, team_return, tuple(path), objective)


def oracle_budget_dp(tree: TreeGameSpec, N: int, q_table: QTable | None = None) -> OracleResult:
    """Minimum team return with at most N deviations from a*."""
    if N < 0:
        raise InvalidIndices('budget must be >= 0')
    q_table = q_table or value_iteration(tree)
    b, T = tree.branching, tree.depth
    # worst[d][node, n]: lowest reachable return from level-d node with n deviations left
    worst = [None] * (T + 1)
    worst[T] = np.repeat(tree.leaf_rewards[:, None], N + 1, axis=1)
    for depth in reversed(range(T)):
        q = worst[depth + 1].reshape(b ** depth, b, N + 1)
        nodes = np.arange(b ** depth)
        star = q_table.greedy_level(depth)
        stay = q[nodes, star, :]
        deviate = q.copy()
        deviate[nodes, star, :] = np.inf
        best_deviation = deviate.min(axis=1)
        level = stay.copy()
        if N > 0:
            level[:, 1:] = np.minimum(stay[:, 1:], best_deviation[:, :-1])
        worst[depth] = level

    path, witness, node, left = [], [], 0, N
    for depth in range(T):
        star = int(q_table.greedy_level(depth)[node])
        children = worst[depth + 1][node * b: node * b + b]
        action = star
        if left > 0:
            candidates = [a for a in range(b) if a != star and children[a, left - 1] < children[star, left]]
            if candidates:
                best = min(children[a, left - 1] for a in candidates)
                action = next(a for a in candidates if children[a, left - 1] == best)
        if action != star:
            witness.append((depth, 0, action))
            left -= 1
        path.append(action)
        node = node * b + action
    logger.debug('budget oracle N=%d value %.1f witness %s', N, worst[0][0, N], witness)
    return _result(tree, path, witness, 0.0, 'budget')


def oracle_reg_dp(tree: TreeGameSpec, lam: float, q_table: QTable | None = None) -> OracleResult:
    """Maximum of -return - λ·(deviations from a*)."""
    q_table = q_table or value_iteration(tree)
    b, T = tree.branching, tree.depth
    values = [None] * (T + 1)
    values[T] = -tree.leaf_rewards.astype(np.float64)
    for depth in reversed(range(T)):
        q = values[depth + 1].reshape(b ** depth, b)
        penalty = lam * (np.arange(b)[None, :] != q_table.greedy_level(depth)[:, None])
        values[depth] = (q - penalty).max(axis=1)

    path, witness, node = [], [], 0
    for depth in range(T):
        star = int(q_table.greedy_level(depth)[node])
        scores = values[depth + 1][node * b: node * b + b] - lam * (np.arange(b) != star)
        action = star if scores[star] == scores.max() else int(np.argmax(scores))
        if action != star:
            witness.append((depth, 0, action))
        path.append(action)
        node = node * b + action
    return _result(tree, path, witness, lam, 'regularized')


def oracle_forced_dp(tree: TreeGameSpec, cost: float = 0.0, q_table: QTable | None = None) -> OracleResult:
    """Best timing plan when every attack forces the argmin-Q action.

    Maximizes -return - cost·(attacks). Attacks where argmin equals a* are
    never chosen, so every attack in the witness is a real deviation.
    """
    q_table = q_table or value_iteration(tree)
    b, T = tree.branching, tree.depth
    values = [None] * (T + 1)
    values[T] = -tree.leaf_rewards.astype(np.float64)
    for depth in reversed(range(T)):
        q = values[depth + 1].reshape(b ** depth, b)
        nodes = np.arange(b ** depth)
        star, low = q_table.greedy_level(depth), q_table.argmin_level(depth)
        attack = np.where(low != star, q[nodes, low] - cost, -np.inf)
        values[depth] = np.maximum(q[nodes, star], attack)

    path, witness, node = [], [], 0
    for depth in range(T):
        star = int(q_table.greedy_level(depth)[node])
        low = int(q_table.argmin_level(depth)[node])
        child = values[depth + 1][node * b: node * b + b]
        action = star
        if low != star and child[low] - cost > child[star]:
            action = low
            witness.append((depth, 0, action))
        path.append(action)
        node = node * b + action
    return _result(tree, path, witness, cost, 'forced')


def dense_argmin_path(tree: TreeGameSpec, q_table: QTable | None = None) -> OracleResult:
    """Follow the argmin-Q action at every node (the dense attack)."""
    q_table = q_table or value_iteration(tree)
    path, witness = [], []
    for depth in range(tree.depth):
        prefix_low = int(np.argmin(q_table.row(path)))
        if prefix_low != q_table.greedy(path):
            witness.append((depth, 0, prefix_low))
        path.append(prefix_low)
    return _result(tree, path, witness, 0.0, 'forced')


def replay_witness(tree: TreeGameSpec, witness: Witness, q_table: QTable | None = None) -> tuple[float, int]:
    """Drive the environment with a* except at witness steps; returns (team return, deviations)."""
    q_table = q_table or value_iteration(tree)
    env = TreeGameEnv(tree)
    forced = {step: action for step, _, action in witness}
    state = env.reset(0)
    total, deviations = 0.0, 0
    while not state.terminal:
        star = q_table.greedy(state.payload)
        action = forced.get(state.step_index, star)
        deviations += int(action != star)
        reward, state = env.step(state, (action,))
        total += reward
    return total, deviations


def rule_attack_path(tree: TreeGameSpec, q_table: QTable, attack_when) -> tuple[tuple[int, ...], int]:
    """Path of an online rule: ``attack_when(q_row)`` decides, argmin-Q is forced."""
    path, count = [], 0
    for _ in range(tree.depth):
        row = q_table.row(path)
        star, low = int(np.argmax(row)), int(np.argmin(row))
        action = low if attack_when(row) else star
        count += int(action != star)
        path.append(action)
    return tuple(path), count
