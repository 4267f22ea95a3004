"""Seeded experiment runs."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from polecart import ContractViolation
from polecart.dqn import DqnAgent, train_dqn
from polecart.env import CartPoleEnv
from polecart.harness.config import ExperimentConfig
from polecart.records import EpisodeRecord, null_clock, perf_clock
from polecart.replay import ReplayBuffer
from polecart.schedules import Schedule
from polecart.tabular import Discretizer, train_tabular

log = logging.getLogger(__name__)


class RunAborted(RuntimeError):
    def __init__(self, failures: dict[int, str]):
        detail = "; ".join(f"seed {s}: {msg}" for s, msg in failures.items())
        super().__init__(f"{len(failures)} run(s) aborted ({detail})")
        self.failures = failures


@dataclass
class RunSummary:
    seed: int
    records: list[EpisodeRecord]
    moving_average: list[float]
    fingerprint: str
    total_wall_s: float
    aborted: str | None = None

    @property
    def returns(self) -> np.ndarray:
        return np.array([r.ret for r in self.records], dtype=np.float64)


def moving_average(returns: Sequence[float], window: int) -> list[float]:
    """Trailing mean; the window is clamped at the start of the sequence."""
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    x = np.asarray(returns, dtype=np.float64)
    if x.size == 0:
        return []
    csum = np.concatenate(([0.0], np.cumsum(x)))
    i = np.arange(x.size)
    lo = np.maximum(0, i - window + 1)
    return list((csum[i + 1] - csum[lo]) / (i + 1 - lo))


def schedule_from(config: ExperimentConfig) -> Schedule:
    s = config.schedule
    return Schedule(s.kind, s.beta, s.horizon, s.scale, s.rate, s.floor)


def seed_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator, np.random.Generator]:
    """Independent PCG64 streams for the environment, network init and acting/sampling."""
    env_ss, init_ss, act_ss = np.random.SeedSequence(seed).spawn(3)
    return (
        np.random.Generator(np.random.PCG64(env_ss)),
        np.random.Generator(np.random.PCG64(init_ss)),
        np.random.Generator(np.random.PCG64(act_ss)),
    )


def run_seed(config: ExperimentConfig, seed: int, timing: bool | None = None) -> RunSummary:
    timing = config.output.record_timing if timing is None else timing
    clock = perf_clock if timing else null_clock
    env_rng, init_rng, act_rng = seed_streams(seed)
    env = CartPoleEnv(env_rng, reward_on_termination=config.env.reward_on_termination)
    schedule = schedule_from(config)
    records: list[EpisodeRecord] = []
    aborted = None
    start = clock()
    try:
        if config.algorithm == "tabular":
            t = config.tabular
            train_tabular(
                env,
                schedule,
                config.episodes,
                alpha=t.alpha,
                gamma=t.gamma,
                rng=act_rng,
                discretizer=Discretizer(t.bins, t.ranges),
                clock=clock,
                on_episode=records.append,
            )
        else:
            d, r = config.dqn, config.replay
            buffer = ReplayBuffer(r.capacity, r.strategy, alpha=r.per_alpha)
            agent = DqnAgent.create(
                d.widths,
                buffer,
                init_rng,
                schedule=schedule,
                gamma=d.gamma,
                target_sync_every=d.target_sync_every,
                batch_size=d.batch_size,
                warmup=d.warmup,
                beta0=r.beta0,
                beta_steps=r.beta_steps,
                optimizer=d.optimizer,
            )
            train_dqn(env, agent, config.episodes, lr=d.lr, rng=act_rng, clock=clock, on_episode=records.append)
    except (FloatingPointError, ContractViolation) as exc:
        aborted = f"{type(exc).__name__}: {exc}"
        log.error("seed %d aborted after %d episodes: %s", seed, len(records), aborted)
    total = clock() - start
    returns = [rec.ret for rec in records]
    return RunSummary(
        seed=seed,
        records=records,
        moving_average=moving_average(returns, config.output.ma_window),
        fingerprint=config.fingerprint(),
        total_wall_s=total,
        aborted=aborted,
    )


def _run_one(args) -> RunSummary:
    config, seed, timing = args
    return run_seed(config, seed, timing)


def run_experiment(
    config: ExperimentConfig,
    out_dir: str | Path | None = None,
    jobs: int = 1,
    timing: bool | None = None,
) -> list[RunSummary]:
    """Run every seed, optionally writing CSVs, manifest and plot to ``out_dir``.

    Raises ``RunAborted`` after outputs are written if any seed aborted.
    """
    from polecart.harness.io import write_csv
    from polecart.harness.plot import emit_plot

    tasks = [(config, seed, timing) for seed in config.seeds]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            summaries = list(pool.map(_run_one, tasks))
    else:
        summaries = [_run_one(t) for t in tasks]

    if out_dir is not None:
        out_dir = Path(out_dir)
        write_csv(summaries, out_dir, config)
        if any(s.records for s in summaries):
            emit_plot(summaries, out_dir / "returns.svg")
    failures = {s.seed: s.aborted for s in summaries if s.aborted}
    if failures:
        raise RunAborted(failures)
    return summaries
