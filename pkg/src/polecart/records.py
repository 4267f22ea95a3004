"""Per-episode metric rows shared by every learner."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable

Clock = Callable[[], float]

perf_clock: Clock = time.perf_counter


def null_clock() -> float:
    return 0.0


@dataclass(frozen=True)
class EpisodeRecord:
    episode: int
    ret: float
    length: int
    epsilon: float
    wall_ms: float
    global_step: int
