"""Preset configurations for each reproduced figure."""

from __future__ import annotations

from polecart.harness.config import ExperimentConfig

DQN_EPISODES = 600
TABULAR_EPISODES = 10000
EXPONENTIAL_SWEEP = (0.99, 0.999, 0.9999)

_GRID = {"a": "linear", "b": "logarithmic", "c": "inverse", "d": "sinusoidal"}

FIGURES = ("3", "4a", "4b", "4c", "4d", "5", "6", "7", "8a", "8b", "8c", "8d", "10")


def figure_configs(
    figure: str, episodes: int | None = None, seeds: tuple[int, ...] | None = None
) -> dict[str, ExperimentConfig]:
    """Label -> config for one figure; sweep figures yield one config per beta."""
    if figure not in FIGURES:
        raise ValueError(f"unknown figure {figure!r}; expected one of {', '.join(FIGURES)}")
    overrides: dict = {}
    if seeds is not None:
        overrides["seeds"] = tuple(seeds)

    def make(**kw) -> ExperimentConfig:
        algo = kw.get("algorithm", "dqn")
        kw.setdefault("episodes", episodes or (TABULAR_EPISODES if algo == "tabular" else DQN_EPISODES))
        return ExperimentConfig().replace(**kw, **overrides)

    if figure in ("3", "10"):
        return {"tabular": make(algorithm="tabular", schedule__kind="exponential", schedule__beta=0.9999)}
    if figure == "6":
        return {"no_replay": make(replay__strategy="none", schedule__kind="exponential", schedule__beta=0.9999)}
    if figure in ("5", "7"):
        strategy = "uniform" if figure == "5" else "prioritized"
        return {
            f"beta_{b}": make(replay__strategy=strategy, schedule__kind="exponential", schedule__beta=b)
            for b in EXPONENTIAL_SWEEP
        }
    strategy = "uniform" if figure.startswith("4") else "prioritized"
    kind = _GRID[figure[1]]
    return {kind: make(replay__strategy=strategy, schedule__kind=kind, schedule__beta=0.9999)}
