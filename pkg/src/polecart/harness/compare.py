"""Compare two groups of runs on final performance, speed to threshold and wall time."""

from __future__ import annotations

from dataclasses import dataclass
from statistics import median
from typing import Sequence

import numpy as np

from polecart.harness.runner import RunSummary, moving_average


@dataclass(frozen=True)
class GroupStats:
    n_runs: int
    median_final_average: float
    episodes_to_threshold: tuple[int | None, ...]
    median_episodes_to_threshold: float | None
    wall_ms_per_episode: float | None


@dataclass(frozen=True)
class Comparison:
    a: GroupStats
    b: GroupStats
    final_average_delta: float
    episodes_to_threshold_delta: float | None
    wall_time_ratio: float | None
    threshold: float
    window: int

    def lines(self) -> list[str]:
        def fmt(x):
            return "absent" if x is None else f"{x:.6g}"

        return [
            f"window={self.window} threshold={self.threshold:g}",
            f"median_final_average a={fmt(self.a.median_final_average)} b={fmt(self.b.median_final_average)} delta={fmt(self.final_average_delta)}",
            f"median_episodes_to_threshold a={fmt(self.a.median_episodes_to_threshold)} b={fmt(self.b.median_episodes_to_threshold)} delta={fmt(self.episodes_to_threshold_delta)}",
            f"wall_ms_per_episode a={fmt(self.a.wall_ms_per_episode)} b={fmt(self.b.wall_ms_per_episode)} ratio={fmt(self.wall_time_ratio)}",
        ]


def episodes_to_threshold(returns: Sequence[float], threshold: float, window: int) -> int | None:
    """First episode index whose trailing average reaches ``threshold``; None if never."""
    ma = np.asarray(moving_average(returns, window))
    hits = np.flatnonzero(ma >= threshold)
    return int(hits[0]) if hits.size else None


def final_average(returns: Sequence[float], window: int) -> float:
    x = np.asarray(returns, dtype=np.float64)
    return float(x[-window:].mean()) if x.size else float("nan")


def group_stats(runs: Sequence[RunSummary], threshold: float, window: int) -> GroupStats:
    finals = [final_average(r.returns, window) for r in runs]
    reach = tuple(episodes_to_threshold(r.returns, threshold, window) for r in runs)
    reached = [e for e in reach if e is not None]
    n_ep = sum(len(r.records) for r in runs)
    wall = sum(rec.wall_ms for r in runs for rec in r.records)
    return GroupStats(
        n_runs=len(runs),
        median_final_average=float(median(finals)),
        episodes_to_threshold=reach,
        # median over the runs that reached it; absent only if none did
        median_episodes_to_threshold=float(median(reached)) if reached else None,
        wall_ms_per_episode=wall / n_ep if n_ep and wall > 0 else None,
    )


def compare_runs(
    a: Sequence[RunSummary], b: Sequence[RunSummary], threshold: float = 200.0, window: int = 100
) -> Comparison:
    if not a or not b:
        raise ValueError("both run groups must be non-empty")
    sa, sb = group_stats(a, threshold, window), group_stats(b, threshold, window)
    ett = None
    if sa.median_episodes_to_threshold is not None and sb.median_episodes_to_threshold is not None:
        ett = sa.median_episodes_to_threshold - sb.median_episodes_to_threshold
    ratio = None
    if sa.wall_ms_per_episode is not None and sb.wall_ms_per_episode is not None:
        ratio = sa.wall_ms_per_episode / sb.wall_ms_per_episode
    return Comparison(
        a=sa,
        b=sb,
        final_average_delta=sa.median_final_average - sb.median_final_average,
        episodes_to_threshold_delta=ett,
        wall_time_ratio=ratio,
        threshold=threshold,
        window=window,
    )
