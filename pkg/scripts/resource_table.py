"""Physical cost of a K x Q cluster for several sub-cluster tilings."""

import argparse

from clusterft.resources import ResourceQuery, log10_resource, optimize_subcluster, trials_needed


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--K", type=int, default=100)
    ap.add_argument("--Q", type=int, default=1000)
    ap.add_argument("--f", type=float, default=500)
    ap.add_argument("--pv", type=float, default=0.7)
    ap.add_argument("--N", type=float, default=10)
    ap.add_argument("--tiles", default="1x1,1x5,3x3,5x5,6x4,10x10")
    args = ap.parse_args(argv)

    print(f"{'k x q':>8} {'log10 cost':>11} {'attempts/tile':>14}")
    for tile in args.tiles.split(","):
        k, q = (int(v) for v in tile.split("x"))
        rq = ResourceQuery(args.K, args.Q, k, q, args.f, args.pv, args.N)
        print(f"{tile:>8} {log10_resource(rq):11.3f} {trials_needed(k, q, args.pv, args.N).trials:14d}")
    best = optimize_subcluster(args.K, args.Q, args.f, args.pv, args.N)
    print(f"cheapest tiling: {best.k} x {best.q}, cost {best.resource:.4g}")


if __name__ == "__main__":
    main()
