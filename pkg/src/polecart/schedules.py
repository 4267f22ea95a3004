"""Epsilon decay schedules and epsilon-greedy action selection."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from polecart import ContractViolation

KINDS = ("exponential", "linear", "logarithmic", "inverse", "sinusoidal")


@dataclass(frozen=True)
class Schedule:
    """An epsilon schedule over the global environment-step counter.

    Only the parameter belonging to ``kind`` is read:

    - exponential: ``beta ** t``
    - linear: ``max(0, 1 - t / horizon)``
    - logarithmic: ``max(0, 1 - scale * ln(t + 1))``
    - inverse: ``1 / (1 + rate * t)``
    - sinusoidal: ``beta ** t * |sin(t / 2)|``
    """

    kind: str = "exponential"
    beta: float = 0.9999
    horizon: float = 25000.0
    scale: float = 0.1
    rate: float = 0.003
    floor: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown schedule kind {self.kind!r}; expected one of {KINDS}")
        if not 0.0 <= self.floor <= 1.0:
            raise ValueError(f"floor must lie in [0, 1], got {self.floor}")

    def __call__(self, t: int) -> float:
        return epsilon_at(self, t)


def epsilon_at(schedule: Schedule, t: int) -> float:
    if t < 0:
        raise ContractViolation(f"step counter must be non-negative, got {t}")
    kind = schedule.kind
    if kind == "exponential":
        eps = schedule.beta**t
    elif kind == "linear":
        eps = max(0.0, 1.0 - t / schedule.horizon)
    elif kind == "logarithmic":
        eps = max(0.0, 1.0 - schedule.scale * math.log(t + 1))
    elif kind == "inverse":
        eps = 1.0 / (1.0 + schedule.rate * t)
    else:
        eps = schedule.beta**t * abs(math.sin(0.5 * t))
    return min(1.0, max(schedule.floor, eps))


class ExplorationDecision(NamedTuple):
    explore: bool
    action: int


def greedy_action(q_values: Sequence[float], rng: np.random.Generator) -> int:
    """Argmax with uniform tie-breaking among maximal entries."""
    q = np.asarray(q_values, dtype=np.float64)
    best = np.flatnonzero(q == q.max())
    if best.size == 1:
        return int(best[0])
    return int(best[rng.integers(best.size)])


def select_action(
    q_values: Sequence[float], epsilon: float, rng: np.random.Generator
) -> ExplorationDecision:
    n = len(q_values)
    if n == 0:
        raise ContractViolation("q_values must be non-empty")
    if rng.random() < epsilon:
        return ExplorationDecision(True, int(rng.integers(n)))
    return ExplorationDecision(False, greedy_action(q_values, rng))
