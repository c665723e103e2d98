"""p_v and f of the star sub-cluster at a few noise strengths."""

import argparse

from clusterft.montecarlo import estimate_pv_f
from clusterft.noise import NoiseParams


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pe", type=float, nargs="+", default=[0.0, 0.001, 0.003, 0.01, 0.02])
    ap.add_argument("--branches", type=int, default=4)
    ap.add_argument("--trials", type=int, default=20_000)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    print(f"{'p_e':>8} {'p_v':>7} {'p_v 95% CI':>17} {'f':>8} {'preps':>7} {'gates':>7} {'meas':>7}")
    for i, p in enumerate(args.pe):
        pv, f = estimate_pv_f(NoiseParams(p), args.branches, args.trials, args.seed, point=i)
        preps, gates, meas = f.breakdown
        print(f"{p:8.4g} {pv.point:7.4f} [{pv.ci_low:.4f}, {pv.ci_high:.4f}] {f.mean:8.1f} "
              f"{preps:7.1f} {gates:7.1f} {meas:7.1f}")


if __name__ == "__main__":
    main()
