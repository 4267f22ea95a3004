"""Experiment configuration and its flat ``dotted.key = value`` text format.

Values are JSON literals; bare words are accepted as strings. Example::

    algorithm = "dqn"
    episodes = 600
    seeds = [1, 2, 3]
    schedule.kind = "exponential"
    schedule.beta = 0.9999
    replay.strategy = "prioritized"
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any

from polecart.schedules import KINDS


class ConfigError(ValueError):
    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass
class EnvConfig:
    reward_on_termination: bool = False


@dataclass
class ScheduleConfig:
    kind: str = "exponential"
    beta: float = 0.9999
    horizon: float = 25000.0
    scale: float = 0.1
    rate: float = 0.003
    floor: float = 0.0
    # recorded for auditability; only the natural log is implemented
    log_base: str = "e"


@dataclass
class TabularConfig:
    alpha: float = 0.1
    gamma: float = 0.99
    bins: tuple = (8, 8, 12, 12)
    ranges: tuple = ((-2.4, 2.4), (-3.0, 3.0), (-0.2095, 0.2095), (-3.5, 3.5))


@dataclass
class DqnConfig:
    gamma: float = 0.99
    lr: float = 1e-3
    widths: tuple = (4, 8, 8, 2)
    optimizer: str = "adam"
    target_sync_every: int = 100
    batch_size: int = 64
    warmup: int = 500


@dataclass
class ReplayConfig:
    strategy: str = "uniform"
    capacity: int = 10000
    per_alpha: float = 0.6
    beta0: float = 0.4
    beta_steps: int = 50000


@dataclass
class OutputConfig:
    ma_window: int = 100
    threshold: float = 200.0
    # measured wall times make CSVs differ run to run
    record_timing: bool = False


@dataclass
class ExperimentConfig:
    algorithm: str = "dqn"
    episodes: int = 600
    seeds: tuple = (1, 2, 3, 4, 5)
    env: EnvConfig = field(default_factory=EnvConfig)
    schedule: ScheduleConfig = field(default_factory=ScheduleConfig)
    tabular: TabularConfig = field(default_factory=TabularConfig)
    dqn: DqnConfig = field(default_factory=DqnConfig)
    replay: ReplayConfig = field(default_factory=ReplayConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    def replace(self, **changes) -> "ExperimentConfig":
        """Copy with dotted-key overrides, e.g. ``replace(**{"replay.strategy": "none"})``."""
        flat = flatten(self)
        for key, value in changes.items():
            flat[key.replace("__", ".")] = value
        return from_flat(flat)

    def fingerprint(self) -> str:
        return hashlib.sha256(dump_config(self).encode()).hexdigest()[:16]


SECTIONS = {f.name: f.default_factory for f in fields(ExperimentConfig) if dataclasses.is_dataclass(f.default_factory)}


def _to_json_value(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_to_json_value(v) for v in value]
    return value


def _to_tuple(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(_to_tuple(v) for v in value)
    return value


def flatten(config: ExperimentConfig) -> dict[str, Any]:
    flat = {}
    for f in fields(config):
        value = getattr(config, f.name)
        if f.name in SECTIONS:
            for sf in fields(value):
                flat[f"{f.name}.{sf.name}"] = getattr(value, sf.name)
        else:
            flat[f.name] = value
    return flat


def _coerce(key: str, value: Any, default: Any) -> Any:
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(key, f"expected true/false, got {value!r}")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(key, f"expected an integer, got {value!r}")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(key, f"expected a number, got {value!r}")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(key, f"expected a string, got {value!r}")
        return value
    if isinstance(default, tuple):
        if not isinstance(value, (list, tuple)):
            raise ConfigError(key, f"expected a list, got {value!r}")
        return _to_tuple(list(value))
    return value


def from_flat(flat: dict[str, Any]) -> ExperimentConfig:
    top = {}
    sections: dict[str, dict[str, Any]] = {name: {} for name in SECTIONS}
    defaults = flatten(ExperimentConfig())
    for key, value in flat.items():
        if key not in defaults:
            raise ConfigError(key, "unknown configuration key")
        value = _coerce(key, value, defaults[key])
        if "." in key:
            section, name = key.split(".", 1)
            sections[section][name] = value
        else:
            top[key] = value
    config = ExperimentConfig(**top, **{name: SECTIONS[name](**kw) for name, kw in sections.items()})
    validate(config)
    return config


def validate(config: ExperimentConfig) -> None:
    def check(ok: bool, key: str, message: str):
        if not ok:
            raise ConfigError(key, message)

    check(config.algorithm in ("tabular", "dqn"), "algorithm", f"must be 'tabular' or 'dqn', got {config.algorithm!r}")
    check(config.episodes >= 1, "episodes", "must be >= 1")
    check(len(config.seeds) >= 1, "seeds", "at least one seed is required")
    check(all(isinstance(s, int) and s >= 0 for s in config.seeds), "seeds", "seeds must be non-negative integers")
    check(len(set(config.seeds)) == len(config.seeds), "seeds", "seeds must be distinct")

    s = config.schedule
    check(s.kind in KINDS, "schedule.kind", f"must be one of {KINDS}, got {s.kind!r}")
    check(0.0 <= s.beta <= 1.0, "schedule.beta", "must lie in [0, 1]")
    check(s.horizon > 0, "schedule.horizon", "must be positive")
    check(s.scale >= 0, "schedule.scale", "must be non-negative")
    check(s.rate >= 0, "schedule.rate", "must be non-negative")
    check(0.0 <= s.floor <= 1.0, "schedule.floor", "must lie in [0, 1]")
    check(s.log_base == "e", "schedule.log_base", "only the natural log ('e') is supported")

    t = config.tabular
    check(0.0 < t.alpha <= 1.0, "tabular.alpha", "must lie in (0, 1]")
    check(0.0 < t.gamma <= 1.0, "tabular.gamma", "must lie in (0, 1]")
    check(len(t.bins) == 4 and all(isinstance(b, int) and b >= 1 for b in t.bins), "tabular.bins", "need 4 positive integers")
    check(
        len(t.ranges) == 4 and all(len(r) == 2 and r[0] < r[1] for r in t.ranges),
        "tabular.ranges",
        "need 4 [lo, hi] pairs with lo < hi",
    )

    d = config.dqn
    check(0.0 < d.gamma <= 1.0, "dqn.gamma", "must lie in (0, 1]")
    check(d.lr > 0, "dqn.lr", "must be positive")
    check(
        len(d.widths) >= 2 and d.widths[0] == 4 and d.widths[-1] == 2 and all(isinstance(w, int) and w >= 1 for w in d.widths),
        "dqn.widths",
        "must start with 4, end with 2 and be positive",
    )
    check(d.optimizer in ("adam", "sgd"), "dqn.optimizer", "must be 'adam' or 'sgd'")
    check(d.target_sync_every >= 1, "dqn.target_sync_every", "must be >= 1")
    check(d.batch_size >= 1, "dqn.batch_size", "must be >= 1")
    check(d.warmup >= 0, "dqn.warmup", "must be >= 0")

    r = config.replay
    check(r.strategy in ("none", "uniform", "prioritized"), "replay.strategy", f"must be none/uniform/prioritized, got {r.strategy!r}")
    check(r.capacity >= 1, "replay.capacity", "must be >= 1")
    check(r.per_alpha >= 0, "replay.per_alpha", "must be non-negative")
    check(0.0 < r.beta0 <= 1.0, "replay.beta0", "must lie in (0, 1]")
    check(r.beta_steps >= 1, "replay.beta_steps", "must be >= 1")

    o = config.output
    check(o.ma_window >= 1, "output.ma_window", "must be >= 1")


def dump_config(config: ExperimentConfig) -> str:
    return "".join(f"{k} = {json.dumps(_to_json_value(v))}\n" for k, v in flatten(config).items())


def parse_config(text: str) -> ExperimentConfig:
    flat = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}", f"expected 'key = value', got {raw!r}")
        value = value.strip()
        try:
            parsed = json.loads(value)
        except json.JSONDecodeError:
            parsed = value
        if key in flat:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        flat[key] = parsed
    return from_flat(flat)


def load_config(path: str | Path) -> ExperimentConfig:
    return parse_config(Path(path).read_text())


def save_config(config: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(config))
