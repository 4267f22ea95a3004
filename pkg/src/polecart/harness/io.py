"""CSV metrics and run manifests."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Sequence

from polecart import PRNG_ALGORITHM, __version__
from polecart.harness.config import ExperimentConfig, dump_config, parse_config
from polecart.records import EpisodeRecord

HEADER = ("episode", "return", "length", "epsilon", "wall_ms", "global_step")
MANIFEST = "manifest.json"


def csv_name(seed: int) -> str:
    return f"seed_{seed}.csv"


def _num(x: float) -> str:
    return format(float(x), ".17g")


def format_rows(records: Sequence[EpisodeRecord]) -> str:
    lines = [",".join(HEADER)]
    for r in records:
        lines.append(
            f"{r.episode},{_num(r.ret)},{r.length},{_num(r.epsilon)},{_num(r.wall_ms)},{r.global_step}"
        )
    return "\n".join(lines) + "\n"


def write_records(records: Sequence[EpisodeRecord], path: str | Path) -> None:
    path = Path(path)
    try:
        path.write_text(format_rows(records))
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_records(path: str | Path) -> list[EpisodeRecord]:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = tuple(next(reader, ()))
        if header != HEADER:
            raise ValueError(f"{path}: unexpected CSV header {header}")
        return [
            EpisodeRecord(int(ep), float(ret), int(length), float(eps), float(wall), int(step))
            for ep, ret, length, eps, wall, step in reader
        ]


def write_csv(summaries, out_dir: str | Path, config: ExperimentConfig | None = None) -> None:
    """One ``seed_<n>.csv`` per summary plus ``manifest.json``."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out_dir}: {exc.strerror or exc}") from exc
    for s in summaries:
        write_records(s.records, out_dir / csv_name(s.seed))

    manifest = {
        "polecart_version": __version__,
        "prng": PRNG_ALGORITHM,
        "seed_derivation": "SeedSequence(seed).spawn(3) -> env, init, act",
        "fingerprint": config.fingerprint() if config is not None else None,
        "config": dump_config(config) if config is not None else None,
        "runs": [
            {
                "seed": s.seed,
                "csv": csv_name(s.seed),
                "episodes": len(s.records),
                "total_wall_s": s.total_wall_s,
                "aborted": s.aborted,
            }
            for s in summaries
        ],
    }
    path = out_dir / MANIFEST
    try:
        path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def read_run_dir(run_dir: str | Path):
    """Load ``(config, summaries)`` from a directory written by ``write_csv``."""
    from polecart.harness.runner import RunSummary, moving_average

    run_dir = Path(run_dir)
    manifest_path = run_dir / MANIFEST
    if not manifest_path.exists():
        raise FileNotFoundError(f"{manifest_path}: no manifest in run directory")
    manifest = json.loads(manifest_path.read_text())
    config = parse_config(manifest["config"]) if manifest.get("config") else ExperimentConfig()
    summaries = []
    for run in manifest["runs"]:
        records = read_records(run_dir / run["csv"])
        summaries.append(
            RunSummary(
                seed=run["seed"],
                records=records,
                moving_average=moving_average([r.ret for r in records], config.output.ma_window),
                fingerprint=manifest.get("fingerprint") or "",
                total_wall_s=run["total_wall_s"],
                aborted=run.get("aborted"),
            )
        )
    return config, summaries
