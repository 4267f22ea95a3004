"""Q-learning over a discretized cart-pole state space."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from polecart.env import CartPoleEnv, CartState
from polecart.records import Clock, EpisodeRecord, perf_clock
from polecart.schedules import Schedule, epsilon_at, select_action

N_ACTIONS = 2


@dataclass(frozen=True)
class Discretizer:
    bins: tuple[int, ...] = (8, 8, 12, 12)
    ranges: tuple[tuple[float, float], ...] = (
        (-2.4, 2.4),
        (-3.0, 3.0),
        (-0.2095, 0.2095),
        (-3.5, 3.5),
    )
    _radix: tuple[int, ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if len(self.bins) != 4 or len(self.ranges) != 4:
            raise ValueError("discretizer needs exactly 4 bin counts and 4 ranges")
        if any(b < 1 for b in self.bins):
            raise ValueError(f"bin counts must be positive, got {self.bins}")
        if any(hi <= lo for lo, hi in self.ranges):
            raise ValueError(f"ranges must satisfy lo < hi, got {self.ranges}")
        object.__setattr__(self, "bins", tuple(int(b) for b in self.bins))
        object.__setattr__(
            self, "ranges", tuple((float(lo), float(hi)) for lo, hi in self.ranges)
        )
        radix = []
        acc = 1
        for b in reversed(self.bins):
            radix.append(acc)
            acc *= b
        object.__setattr__(self, "_radix", tuple(reversed(radix)))

    @property
    def n_states(self) -> int:
        return int(np.prod(self.bins))

    def cell(self, component: int, value: float) -> int:
        lo, hi = self.ranges[component]
        bins = self.bins[component]
        value = min(max(value, lo), hi)
        return min(int(bins * (value - lo) / (hi - lo)), bins - 1)

    def index(self, state: Sequence[float]) -> int:
        return sum(self.cell(i, float(c)) * self._radix[i] for i, c in enumerate(state))


def discretize(d: Discretizer, s: CartState | Sequence[float]) -> int:
    return d.index(s)


def new_table(n_states: int, n_actions: int = N_ACTIONS) -> np.ndarray:
    return np.zeros((n_states, n_actions), dtype=np.float64)


def q_update(
    table: np.ndarray,
    s: int,
    a: int,
    r: float,
    s_next: int,
    terminal: bool,
    alpha: float,
    gamma: float,
) -> np.ndarray:
    """In-place one-step Q-learning update; returns ``table``."""
    bootstrap = 0.0 if terminal else gamma * table[s_next].max()
    q = table[s, a]
    table[s, a] = q + alpha * (r + bootstrap - q)
    return table


def train_tabular(
    env: CartPoleEnv,
    schedule: Schedule,
    episodes: int,
    alpha: float = 0.1,
    gamma: float = 0.99,
    rng: np.random.Generator | None = None,
    discretizer: Discretizer | None = None,
    clock: Clock = perf_clock,
    on_episode: Callable[[EpisodeRecord], None] | None = None,
) -> tuple[np.ndarray, list[EpisodeRecord]]:
    if episodes < 1:
        raise ValueError(f"episodes must be >= 1, got {episodes}")
    rng = rng if rng is not None else np.random.default_rng()
    d = discretizer or Discretizer()
    table = new_table(d.n_states)
    records: list[EpisodeRecord] = []
    global_step = 0

    for ep in range(episodes):
        start = clock()
        s = d.index(env.reset())
        ret = 0.0
        length = 0
        done = False
        while not done:
            eps = epsilon_at(schedule, global_step)
            a = select_action(table[s], eps, rng).action
            obs, r, terminated, truncated = env.step(a)
            s_next = d.index(obs)
            q_update(table, s, a, r, s_next, terminated, alpha, gamma)
            s = s_next
            ret += r
            length += 1
            global_step += 1
            done = terminated or truncated
        rec = EpisodeRecord(
            episode=ep,
            ret=ret,
            length=length,
            epsilon=epsilon_at(schedule, global_step),
            wall_ms=(clock() - start) * 1000.0,
            global_step=global_step,
        )
        records.append(rec)
        if on_episode is not None:
            on_episode(rec)
    return table, records
