"""Replay strategies: none, uniform ring buffer, proportional prioritized replay."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from polecart import ContractViolation

PRIORITY_EPS = 1e-5


class Strategy(str, enum.Enum):
    NONE = "none"
    UNIFORM = "uniform"
    PRIORITIZED = "prioritized"


class EmptyBufferError(LookupError):
    """Sampling from an empty buffer; the caller should skip learning."""


class Transition(NamedTuple):
    state: np.ndarray
    action: int
    reward: float
    next_state: np.ndarray
    terminal: bool


class SumTree:
    """Binary tree of partial sums over ``capacity`` leaves.

    Stored as a 1-indexed heap array; the leaf count is rounded up to a power
    of two so that descending the tree visits leaves in index order. Batched
    descent and update walk one tree level per numpy call.
    """

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.n_leaves = 1 << max(0, (capacity - 1).bit_length())
        self.depth = self.n_leaves.bit_length() - 1
        self.nodes = np.zeros(2 * self.n_leaves, dtype=np.float64)

    @property
    def total(self) -> float:
        return float(self.nodes[1])

    @property
    def leaves(self) -> np.ndarray:
        return self.nodes[self.n_leaves : self.n_leaves + self.capacity]

    def update(self, indices, values) -> None:
        idx = np.atleast_1d(np.asarray(indices, dtype=np.int64)) + self.n_leaves
        self.nodes[idx] = values
        for _ in range(self.depth):
            # parents are recomputed from both children, so duplicates are harmless
            idx = idx >> 1
            self.nodes[idx] = self.nodes[2 * idx] + self.nodes[2 * idx + 1]

    def rebuild(self) -> None:
        for level in range(self.depth - 1, -1, -1):
            lo, hi = 1 << level, 1 << (level + 1)
            self.nodes[lo:hi] = self.nodes[2 * lo : 2 * hi : 2] + self.nodes[2 * lo + 1 : 2 * hi : 2]

    def find(self, points) -> np.ndarray:
        """Leaf index holding each prefix-sum point in ``[0, total)``."""
        u = np.array(points, dtype=np.float64, ndmin=1)
        idx = np.ones(u.shape, dtype=np.int64)
        for _ in range(self.depth):
            left = 2 * idx
            left_sum = self.nodes[left]
            go_right = u >= left_sum
            u = np.where(go_right, u - left_sum, u)
            idx = left + go_right
        return idx - self.n_leaves


@dataclass
class SampledBatch:
    states: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_states: np.ndarray
    terminals: np.ndarray
    indices: np.ndarray
    weights: np.ndarray

    def __len__(self):
        return len(self.indices)

    @property
    def transitions(self) -> list[Transition]:
        return [
            Transition(s, int(a), float(r), s2, bool(d))
            for s, a, r, s2, d in zip(
                self.states, self.actions, self.rewards, self.next_states, self.terminals
            )
        ]


class ReplayBuffer:
    """FIFO ring of transitions with a sampling strategy.

    ``Strategy.NONE`` keeps only the latest transition regardless of
    ``capacity``.
    """

    def __init__(
        self,
        capacity: int = 10000,
        strategy: Strategy | str = Strategy.UNIFORM,
        alpha: float = 0.6,
        state_dim: int = 4,
    ):
        self.strategy = Strategy(strategy)
        if self.strategy is Strategy.NONE:
            capacity = 1
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self.alpha = alpha
        self.states = np.zeros((capacity, state_dim))
        self.actions = np.zeros(capacity, dtype=np.int64)
        self.rewards = np.zeros(capacity)
        self.next_states = np.zeros((capacity, state_dim))
        self.terminals = np.zeros(capacity, dtype=bool)
        self.cursor = 0
        self.size = 0
        self.tree = SumTree(capacity) if self.strategy is Strategy.PRIORITIZED else None

    def __len__(self):
        return self.size

    def push(self, t: Transition) -> None:
        i = self.cursor
        self.states[i] = t.state
        self.actions[i] = t.action
        self.rewards[i] = t.reward
        self.next_states[i] = t.next_state
        self.terminals[i] = t.terminal
        if self.tree is not None:
            self.tree.update(i, self.max_priority())
        self.cursor = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def max_priority(self) -> float:
        """Largest stored leaf value (already raised to alpha), 1.0 when empty."""
        if self.tree is None or self.size == 0:
            return 1.0
        return float(self.tree.leaves[: self.size].max())

    def get(self, i: int) -> Transition:
        if not 0 <= i < self.size:
            raise IndexError(i)
        return Transition(
            self.states[i].copy(),
            int(self.actions[i]),
            float(self.rewards[i]),
            self.next_states[i].copy(),
            bool(self.terminals[i]),
        )

    def ordered(self) -> list[Transition]:
        """Stored transitions, oldest first."""
        start = self.cursor if self.size == self.capacity else 0
        return [self.get((start + k) % self.capacity) for k in range(self.size)]

    def probabilities(self) -> np.ndarray:
        """Sampling probability of each stored slot."""
        if self.tree is None:
            return np.full(self.size, 1.0 / self.size)
        leaves = self.tree.leaves[: self.size]
        return leaves / leaves.sum()

    def _gather(self, idx: np.ndarray, weights: np.ndarray) -> SampledBatch:
        return SampledBatch(
            self.states[idx],
            self.actions[idx],
            self.rewards[idx],
            self.next_states[idx],
            self.terminals[idx],
            idx,
            weights,
        )


def push(buffer: ReplayBuffer, t: Transition) -> None:
    buffer.push(t)


def sample(buffer: ReplayBuffer, n: int, rng: np.random.Generator, beta: float = 1.0) -> SampledBatch:
    if buffer.size == 0:
        raise EmptyBufferError("replay buffer is empty")
    if n < 1:
        raise ContractViolation(f"batch size must be >= 1, got {n}")
    if not 0.0 <= beta <= 1.0:
        raise ContractViolation(f"beta must lie in [0, 1], got {beta}")

    if buffer.strategy is Strategy.NONE:
        idx = np.zeros(n, dtype=np.int64)
        return buffer._gather(idx, np.ones(n))
    if buffer.strategy is Strategy.UNIFORM:
        idx = rng.integers(buffer.size, size=n)
        return buffer._gather(idx, np.ones(n))

    tree = buffer.tree
    total = tree.total
    segment = total / n
    points = (np.arange(n) + rng.random(n)) * segment
    points = np.minimum(points, np.nextafter(total, 0.0))
    idx = np.minimum(tree.find(points), buffer.size - 1)
    probs = tree.nodes[idx + tree.n_leaves] / total
    weights = is_weights(probs, buffer.size, beta)
    return buffer._gather(idx, weights)


def is_weights(probs: np.ndarray, size: int, beta: float) -> np.ndarray:
    """Importance-sampling weights ``(1 / (size * P))**beta`` scaled so the batch max is 1."""
    raw = (1.0 / (size * np.asarray(probs, dtype=np.float64))) ** beta
    return raw / raw.max()


def update_priorities(buffer: ReplayBuffer, indices, td_errors) -> None:
    if buffer.tree is None:
        raise ContractViolation(f"priorities are undefined for strategy {buffer.strategy.value!r}")
    indices = np.asarray(indices, dtype=np.int64)
    td_errors = np.asarray(td_errors, dtype=np.float64)
    if indices.shape != td_errors.shape:
        raise ContractViolation("indices and td_errors must have equal length")
    if indices.size and (indices.min() < 0 or indices.max() >= buffer.size):
        raise ContractViolation("priority index outside the filled buffer")
    buffer.tree.update(indices, (np.abs(td_errors) + PRIORITY_EPS) ** buffer.alpha)


def anneal_beta(beta0: float, t: int, t_final: int) -> float:
    if not 0.0 < beta0 <= 1.0:
        raise ContractViolation(f"beta0 must lie in (0, 1], got {beta0}")
    if t_final < 1:
        raise ContractViolation(f"t_final must be >= 1, got {t_final}")
    return min(1.0, beta0 + (1.0 - beta0) * t / t_final)

