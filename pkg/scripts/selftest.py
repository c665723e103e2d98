"""Exhaustive single-fault injection over every pipeline and scenario."""

import sys

from clusterft.soundness import run_all


def main():
    reports = run_all(progress=lambda r: print(r.line(), flush=True))
    sys.exit(0 if all(r.ok for r in reports) else 1)


if __name__ == "__main__":
    main()
