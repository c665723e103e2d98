"""Sweep p_L over p_e for all three scenarios and locate the case iii crossing.

    python scripts/run_sweeps.py --trials 100000 --out results/sweeps.csv
"""

import argparse
import csv
import sys

from clusterft import montecarlo as mc
from clusterft.cli import parse_grid
from clusterft.cluster import SCENARIOS


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--pe", default="0.005:0.05:8log")
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=2024)
    ap.add_argument("--cases", nargs="+", default=list(SCENARIOS), choices=SCENARIOS)
    ap.add_argument("--out", default="-")
    args = ap.parse_args(argv)

    grid = parse_grid(args.pe)
    fh = sys.stdout if args.out == "-" else open(args.out, "w", newline="")
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["scenario", "p_e", "p_L", "ci_low", "ci_high", "n_trials", "n_accepted"])
    sweeps = {}
    for case in args.cases:
        sweeps[case] = mc.sweep(case, grid, args.trials, args.seed)
        for r in sweeps[case]:
            e = r.estimate
            w.writerow([case, r.p_e, e.point, e.ci_low, e.ci_high, e.n_trials, e.n_accepted])
        fh.flush()
    if fh is not sys.stdout:
        fh.close()
    if "iii" in sweeps:
        try:
            th = mc.find_threshold(sweeps["iii"])
            print(f"case iii crossing: p_th = {th.p_th:.4f} (bracket {th.bracket[0]:.4g}, {th.bracket[1]:.4g})",
                  file=sys.stderr)
        except mc.NoThresholdError:
            print("case iii: no p_L = p_e crossing on this grid", file=sys.stderr)


if __name__ == "__main__":
    main()
