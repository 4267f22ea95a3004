"""Print epsilon(t) for every schedule kind as CSV (the decay curves behind the schedule figures)."""

import argparse
import csv
import sys

from polecart.schedules import KINDS, Schedule, epsilon_at


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--steps", type=int, default=60000)
    ap.add_argument("--stride", type=int, default=500)
    args = ap.parse_args()

    schedules = {k: Schedule(k) for k in KINDS}
    w = csv.writer(sys.stdout)
    w.writerow(["t", *KINDS])
    for t in range(0, args.steps + 1, args.stride):
        w.writerow([t, *(f"{epsilon_at(s, t):.6g}" for s in schedules.values())])


if __name__ == "__main__":
    main()
