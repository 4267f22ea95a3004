"""Timed PER vs uniform replay comparison at equal episodes and seeds."""

import argparse

from polecart.harness.compare import compare_runs
from polecart.harness.config import ExperimentConfig
from polecart.harness.runner import run_experiment


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--episodes", type=int, default=600)
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--beta", type=float, default=0.9999, help="exponential epsilon decay base")
    ap.add_argument("--out", help="write both groups under this directory")
    args = ap.parse_args()

    seeds = tuple(int(s) for s in args.seeds.split(","))
    base = ExperimentConfig().replace(episodes=args.episodes, seeds=seeds, **{"schedule.beta": args.beta})
    groups = {}
    for strategy in ("prioritized", "uniform"):
        cfg = base.replace(**{"replay.strategy": strategy})
        out = f"{args.out}/{strategy}" if args.out else None
        groups[strategy] = run_experiment(cfg, out, timing=True)
        print(f"{strategy}: done", flush=True)

    cmp = compare_runs(groups["prioritized"], groups["uniform"])
    print("a = prioritized, b = uniform")
    for line in cmp.lines():
        print(line)
    print(f"episodes_to_threshold a={cmp.a.episodes_to_threshold} b={cmp.b.episodes_to_threshold}")


if __name__ == "__main__":
    main()
