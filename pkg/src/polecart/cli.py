"""Command-line entry point: ``polecart {run,plot,compare,replicate}``."""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from polecart.harness.compare import compare_runs
from polecart.harness.config import load_config, save_config
from polecart.harness.figures import FIGURES, figure_configs
from polecart.harness.io import read_run_dir
from polecart.harness.plot import emit_plot
from polecart.harness.runner import run_experiment

log = logging.getLogger("polecart")


class CliError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CliError(message)


def _default_out() -> Path:
    return Path(os.environ.get("POLECART_OUT", "runs"))


def _seeds(text: str) -> tuple[int, ...]:
    try:
        seeds = tuple(int(s) for s in text.split(",") if s.strip())
    except ValueError:
        raise CliError(f"--seeds: expected comma-separated integers, got {text!r}") from None
    if not seeds:
        raise CliError("--seeds: no seeds given")
    return seeds


def cmd_run(args) -> None:
    config = load_config(args.config)
    if args.seeds:
        config = config.replace(seeds=_seeds(args.seeds))
    if args.timing:
        config = config.replace(**{"output.record_timing": True})
    out = Path(args.out) if args.out else _default_out()
    summaries = run_experiment(config, out, jobs=args.jobs)
    for s in summaries:
        print(f"seed={s.seed} episodes={len(s.records)} final_avg={s.moving_average[-1]:.6g}")
    print(f"wrote {out}")


def cmd_plot(args) -> None:
    _, summaries = read_run_dir(args.in_dir)
    emit_plot(summaries, args.out)
    print(f"wrote {args.out}")


def cmd_compare(args) -> None:
    config_a, a = read_run_dir(args.a)
    _, b = read_run_dir(args.b)
    threshold = args.threshold if args.threshold is not None else config_a.output.threshold
    window = args.window if args.window is not None else config_a.output.ma_window
    for line in compare_runs(a, b, threshold, window).lines():
        print(line)


def cmd_replicate(args) -> None:
    seeds = _seeds(args.seeds) if args.seeds else None
    configs = figure_configs(args.figure, args.episodes, seeds)
    out = (Path(args.out) if args.out else _default_out()) / f"figure_{args.figure}"
    for label, config in configs.items():
        run_dir = out / label
        run_dir.mkdir(parents=True, exist_ok=True)
        save_config(config, run_dir / "config.txt")
        if args.dry_run:
            print(f"wrote {run_dir / 'config.txt'}")
            continue
        run_experiment(config, run_dir, jobs=args.jobs)
        print(f"wrote {run_dir}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="polecart", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="run a config for each seed")
    r.add_argument("--config", required=True)
    r.add_argument("--seeds", help="comma-separated seeds overriding the config")
    r.add_argument("--out", help="output directory (default $POLECART_OUT or ./runs)")
    r.add_argument("--jobs", type=int, default=1)
    r.add_argument("--timing", action="store_true", help="record wall times (outputs stop being byte-reproducible)")
    r.set_defaults(func=cmd_run)

    pl = sub.add_parser("plot", help="plot a run directory to SVG")
    pl.add_argument("--in", dest="in_dir", required=True)
    pl.add_argument("--out", required=True)
    pl.set_defaults(func=cmd_plot)

    c = sub.add_parser("compare", help="compare two run directories")
    c.add_argument("--a", required=True)
    c.add_argument("--b", required=True)
    c.add_argument("--threshold", type=float)
    c.add_argument("--window", type=int)
    c.set_defaults(func=cmd_compare)

    rep = sub.add_parser("replicate", help="materialize and run a figure's configuration")
    rep.add_argument("--figure", required=True, choices=FIGURES)
    rep.add_argument("--episodes", type=int)
    rep.add_argument("--seeds")
    rep.add_argument("--out")
    rep.add_argument("--jobs", type=int, default=1)
    rep.add_argument("--dry-run", action="store_true", help="write configs without running")
    rep.set_defaults(func=cmd_replicate)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
        args.func(args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes one machine-readable line
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return 2 if isinstance(exc, CliError) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
