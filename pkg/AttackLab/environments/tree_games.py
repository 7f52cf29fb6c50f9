"""Deterministic tree games.

A tree game is a single-agent episode of ``depth`` steps where every action
sequence leads to its own state and the only reward is paid at the leaf.
Leaves are indexed by reading the action sequence as a base-``branching``
number, first action most significant, so the children of level-``d`` node
``i`` are ``i * branching + a`` on level ``d + 1``.

``build_example1`` and ``build_example2`` construct the two counterexample
games where threshold attacks and argmin-Q attacks miss the optimal sparse
attack.
"""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ..errors import InvalidIndices, TooLarge
from ..mmdp import EnvState, Environment, MmdpSpec, rng_for

MAX_LEAF_BITS = 20
FILLER_MAX = 47

OPTIMAL_REWARD = 50.0
DECOY_REWARD = 49.0
TRAP_REWARD = -100.0
RUNNER_UP_REWARD = 48.0


@dataclass(frozen=True)
class TreeConstruction:
    kind: str
    optimal: tuple[int, ...]
    t: int | None
    p: int | None
    a_prime: tuple[int, ...]
    a_double_prime: tuple[int, ...]
    trap: tuple[int, ...]
    decoy: tuple[int, ...]
    runner_up: tuple[int, ...]


@dataclass(frozen=True)
class TreeGameSpec:
    branching: int
    depth: int
    leaf_rewards: np.ndarray
    construction_meta: TreeConstruction | None = None

    def __post_init__(self):
        if self.leaf_rewards.shape != (self.branching ** self.depth,):
            raise InvalidIndices('leaf_rewards must hold one value per leaf')

    @property
    def n_leaves(self) -> int:
        return self.branching ** self.depth

    def leaf_index(self, sequence: Sequence[int]) -> int:
        if len(sequence) != self.depth:
            raise InvalidIndices(f'leaf sequences have length {self.depth}')
        index = 0
        for action in sequence:
            if not 0 <= action < self.branching:
                raise InvalidIndices(f'action {action} outside [0, {self.branching})')
            index = index * self.branching + int(action)
        return index

    def leaf_sequence(self, index: int) -> tuple[int, ...]:
        digits = []
        for _ in range(self.depth):
            index, digit = divmod(index, self.branching)
            digits.append(digit)
        return tuple(reversed(digits))

    def reward_of(self, sequence: Sequence[int]) -> float:
        return float(self.leaf_rewards[self.leaf_index(sequence)])

    def leaves(self) -> Iterator[tuple[tuple[int, ...], float]]:
        for index, reward in enumerate(self.leaf_rewards):
            yield self.leaf_sequence(index), float(reward)


def _check_size(depth: int, branching: int):
    if depth * math.log2(branching) > MAX_LEAF_BITS:
        raise TooLarge(f'{branching}^{depth} leaves is beyond exact dynamic programming')


def _filler(seed: int, leaf: int) -> int:
    digest = hashlib.blake2b(f'{seed}:{leaf}'.encode(), digest_size=8).digest()
    return int.from_bytes(digest, 'little') % (FILLER_MAX + 1)


def _filled_leaves(branching: int, depth: int, seed: int) -> np.ndarray:
    return np.array([_filler(seed, leaf) for leaf in range(branching ** depth)], dtype=np.float64)


def build_example1(T: int, t: int, p: int, filler_seed: int) -> TreeGameSpec:
    """Binary tree where the optimal 2-step attack hits the low-confidence step t."""
    if T < 4 or not 0 <= p < t < T - 1:
        raise InvalidIndices(f'need 0 <= p < t < T-1 and T >= 4, got T={T} t={t} p={p}')
    _check_size(T, 2)
    rng = rng_for(filler_seed)
    optimal = tuple(int(a) for a in rng.integers(0, 2, T))
    a_prime = tuple(int(a) for a in rng.integers(0, 2, T - 2 - t))
    a_double_prime = tuple(int(a) for a in rng.integers(0, 2, T - 1 - p))

    decoy_prefix = optimal[:t] + (1 - optimal[t],) + a_prime
    decoy = decoy_prefix + (1,)
    trap = decoy_prefix + (0,)
    runner_up = optimal[:p] + (1 - optimal[p],) + a_double_prime

    leaves = _filled_leaves(2, T, filler_seed)
    spec = TreeGameSpec(2, T, leaves, TreeConstruction(
        kind='example1', optimal=optimal, t=t, p=p, a_prime=a_prime,
        a_double_prime=a_double_prime, trap=trap, decoy=decoy, runner_up=runner_up,
    ))
    leaves[spec.leaf_index(optimal)] = OPTIMAL_REWARD
    leaves[spec.leaf_index(decoy)] = DECOY_REWARD
    leaves[spec.leaf_index(trap)] = TRAP_REWARD
    leaves[spec.leaf_index(runner_up)] = RUNNER_UP_REWARD
    return spec


def build_example2(T: int, p: int, filler_seed: int) -> TreeGameSpec:
    """Ternary tree where the optimal first deviation is not the argmin-Q action."""
    if T < 3 or not 0 <= p < T - 1:
        raise InvalidIndices(f'need 0 <= p < T-1 and T >= 3, got T={T} p={p}')
    _check_size(T, 3)
    rng = rng_for(filler_seed)
    optimal = tuple(int(a) for a in rng.integers(0, 3, T))
    a_prime = tuple(int(a) for a in rng.integers(0, 3, T - 2 - p))
    a_double_prime = tuple(int(a) for a in rng.integers(0, 3, T - 1 - p))

    decoy_prefix = optimal[:p] + ((optimal[p] + 1) % 3,) + a_prime
    decoy = decoy_prefix + (1,)
    trap = decoy_prefix + (0,)
    runner_up = optimal[:p] + ((optimal[p] + 2) % 3,) + a_double_prime

    leaves = _filled_leaves(3, T, filler_seed)
    spec = TreeGameSpec(3, T, leaves, TreeConstruction(
        kind='example2', optimal=optimal, t=None, p=p, a_prime=a_prime,
        a_double_prime=a_double_prime, trap=trap, decoy=decoy, runner_up=runner_up,
    ))
    leaves[spec.leaf_index(optimal)] = OPTIMAL_REWARD
    leaves[spec.leaf_index(decoy)] = DECOY_REWARD
    leaves[spec.leaf_index(trap)] = TRAP_REWARD
    leaves[spec.leaf_index(runner_up)] = RUNNER_UP_REWARD
    return spec


def build_random_tree(T: int, branching: int, seed: int) -> TreeGameSpec:
    if T < 1 or branching < 2:
        raise InvalidIndices('random trees need T >= 1 and branching >= 2')
    _check_size(T, branching)
    rng = rng_for(seed)
    leaves = rng.integers(-100, 51, branching ** T).astype(np.float64)
    return TreeGameSpec(branching, T, leaves)


class TreeGameEnv(Environment):
    """A tree game as a one-agent environment.

    Observation and global state are the same vector: a one-hot of the
    step index followed by the action prefix, one slot per step holding
    ``(a + 1) / branching`` (zero for steps not yet taken). The vector
    identifies the node exactly, which keeps tabular learners finite.
    """

    reports_wins = False

    def __init__(self, tree: TreeGameSpec):
        self.tree = tree
        dim = 2 * tree.depth + 1
        self.spec = MmdpSpec(
            n_agents=1,
            action_counts=(tree.branching,),
            obs_dims=(dim,),
            state_dim=dim,
            horizon=tree.depth,
            discount=1.0,
            initial_dist='single deterministic root',
        )
        self._mask = np.ones(tree.branching, dtype=bool)
        self._mask.flags.writeable = False

    def observation_for(self, prefix: Sequence[int]) -> np.ndarray:
        depth = self.tree.depth
        vector = np.zeros(2 * depth + 1)
        vector[len(prefix)] = 1.0
        for step, action in enumerate(prefix):
            vector[depth + 1 + step] = (action + 1) / self.tree.branching
        return vector

    def state_for(self, prefix: Sequence[int]) -> EnvState:
        prefix = tuple(int(a) for a in prefix)
        vector = self.observation_for(prefix)
        return EnvState(
            global_state=vector,
            observations=(vector,),
            step_index=len(prefix),
            terminal=len(prefix) == self.tree.depth,
            action_masks=(self._mask,),
            payload=prefix,
        )

    def _initial(self, rng: np.random.Generator) -> EnvState:
        return self.state_for(())

    def _transition(self, state: EnvState, actions: tuple[int, ...]) -> tuple[float, EnvState]:
        prefix = state.payload + (actions[0],)
        reward = self.tree.reward_of(prefix) if len(prefix) == self.tree.depth else 0.0
        return reward, self.state_for(prefix)

    def fingerprint(self) -> str:
        digest = hashlib.sha256(self.tree.leaf_rewards.astype('<f8').tobytes()).hexdigest()[:16]
        return f'tree:{self.tree.branching}^{self.tree.depth}:{digest}'
