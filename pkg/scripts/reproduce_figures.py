"""Run every figure preset (or a chosen subset) into one output tree.

    python scripts/reproduce_figures.py --figures 6 7 10 --seeds 1,2,3 --out runs/
"""

import argparse
import sys

from polecart import cli
from polecart.harness.figures import FIGURES


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--figures", nargs="+", default=list(FIGURES), choices=FIGURES)
    ap.add_argument("--episodes", type=int)
    ap.add_argument("--seeds", default="1,2,3,4,5")
    ap.add_argument("--out", default="runs")
    args = ap.parse_args()

    for fig in args.figures:
        argv = ["replicate", "--figure", fig, "--seeds", args.seeds, "--out", args.out]
        if args.episodes:
            argv += ["--episodes", str(args.episodes)]
        print(f"== figure {fig}", flush=True)
        if cli.main(argv) != 0:
            sys.exit(1)


if __name__ == "__main__":
    main()
