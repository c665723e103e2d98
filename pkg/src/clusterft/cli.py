"""Command-line experiment runner.

Subcommands: sweep, point, pvf, resource, threshold, selftest.  Settings
come from flags and optionally a JSON config file (``--config``); flags
given explicitly win over the file.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from .cluster import SCENARIOS
from .montecarlo import (DEFAULT_ATTEMPT_CAP, NoThresholdError, PointResult, UndefinedEstimateError,
                         estimate_point, estimate_pv_f, find_threshold)
from .noise import ONE_QUBIT_MODES, NoiseParams
from .resources import InfiniteResourceError, ResourceQuery, optimize_subcluster, resource, trials_needed

CSV_HEADER = ("p_e", "trials", "accepted", "p_v_hat", "f_hat", "p_L_hat", "ci_low", "ci_high")
METRICS = ("raw-weight", "decoder-failure")
EXIT_OK, EXIT_CONFIG, EXIT_NO_THRESHOLD = 0, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    scenario: str = "iii"
    pe_grid: list = field(default_factory=lambda: [0.01])
    trials: int = 100_000
    seed: int = 0
    metric: str = "raw-weight"
    noise_interpretation: str = "total-4pe5"
    threads: int | str = 1
    attempt_cap: int = DEFAULT_ATTEMPT_CAP
    pv_trials: int = 20_000
    adaptive: bool = True

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"scenario must be one of {SCENARIOS}")
        if not self.pe_grid:
            raise ConfigError("empty p_e grid")
        if any(not 0 < p < 1 for p in self.pe_grid):
            raise ConfigError("grid values must lie in (0, 1)")
        if any(b <= a for a, b in zip(self.pe_grid, self.pe_grid[1:])):
            raise ConfigError("grid must be strictly increasing")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.pv_trials < 0:
            raise ConfigError("pv_trials must be >= 0")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.metric not in METRICS:
            raise ConfigError(f"metric must be one of {METRICS}")
        if self.noise_interpretation not in ONE_QUBIT_MODES:
            raise ConfigError(f"noise interpretation must be one of {ONE_QUBIT_MODES}")
        if self.attempt_cap < 1:
            raise ConfigError("attempt cap must be >= 1")
        if self.threads != "auto" and (not isinstance(self.threads, int) or self.threads < 1):
            raise ConfigError("threads must be a positive integer or 'auto'")
        return self

    def n_threads(self) -> int:
        if self.threads == "auto":
            return os.cpu_count() or 1
        return int(self.threads)

    def noise(self, p: float) -> NoiseParams:
        return NoiseParams(p, one_qubit_mode=self.noise_interpretation)


def parse_grid(text: str) -> list:
    """``lo:hi:N[log|lin]`` (log is the default) or a comma list."""
    text = text.strip()
    try:
        if ":" not in text:
            return [float(v) for v in text.split(",") if v.strip()]
        lo, hi, spec = text.split(":")
        lo, hi = float(lo), float(hi)
        scale = "log"
        for suffix in ("log", "lin"):
            if spec.endswith(suffix):
                scale, spec = suffix, spec[: -len(suffix)]
        n = int(spec)
    except ValueError as e:
        raise ConfigError(f"bad grid {text!r}: {e}") from None
    if n < 1:
        raise ConfigError("grid needs at least one point")
    if n == 1:
        return [lo]
    if scale == "log":
        if lo <= 0 or hi <= 0:
            raise ConfigError("log grid needs positive bounds")
        a, b = math.log(lo), math.log(hi)
        return [math.exp(a + (b - a) * i / (n - 1)) for i in range(n)]
    return [lo + (hi - lo) * i / (n - 1) for i in range(n)]


# ------------------------------------------------------------- parsing

def _common(p: argparse.ArgumentParser, grid_flag: str) -> None:
    # defaults are None so that a config file can fill in what was not given
    p.add_argument("--config", help="JSON file with ExperimentConfig fields")
    p.add_argument("--scenario", choices=SCENARIOS)
    p.add_argument(grid_flag, dest="pe", help="grid lo:hi:N[log|lin] or comma list")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--metric", choices=METRICS)
    p.add_argument("--noise-interpretation", choices=ONE_QUBIT_MODES)
    p.add_argument("--threads")
    p.add_argument("--attempt-cap", type=int)
    p.add_argument("--pv-trials", type=int)
    p.add_argument("--no-adaptive", action="store_true", default=None)
    p.add_argument("--out", default=".", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="clusterft", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    sw = sub.add_parser("sweep", help="p_L over a grid of p_e")
    _common(sw, "--pe")
    sw.add_argument("--threshold", action="store_true",
                    help="extract the p_L = p_e crossing; exit 3 if there is none")

    pt = sub.add_parser("point", help="p_L at a single p_e")
    _common(pt, "--pe")

    pv = sub.add_parser("pvf", help="p_v and f of a star sub-cluster")
    pv.add_argument("--pe", type=float, required=True)
    pv.add_argument("--branches", type=int, default=4)
    pv.add_argument("--trials", type=int, default=20_000)
    pv.add_argument("--seed", type=int, default=0)
    pv.add_argument("--attempt-cap", type=int, default=DEFAULT_ATTEMPT_CAP)
    pv.add_argument("--noise-interpretation", choices=ONE_QUBIT_MODES, default="total-4pe5")

    rs = sub.add_parser("resource", help="N f / p_v^(kq) K Q")
    for name in ("K", "Q"):
        rs.add_argument(f"--{name}", type=int, required=True)
    rs.add_argument("--k", type=int)
    rs.add_argument("--q", type=int)
    rs.add_argument("--f", type=float, required=True)
    rs.add_argument("--pv", type=float, required=True)
    rs.add_argument("--N", type=float, default=10)
    rs.add_argument("--optimize", action="store_true", help="search k | K, q | Q")

    th = sub.add_parser("threshold", help="threshold from a sweep CSV")
    th.add_argument("csv", help="sweep.csv written by the sweep command")

    st = sub.add_parser("selftest", help="exhaustive single-fault checks")
    st.add_argument("--quick", action="store_true", help="skip scenario ii")
    return parser


def config_from_args(args) -> ExperimentConfig:
    data: dict = {}
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            raise ConfigError(f"cannot read config {args.config}: {e}") from None
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
        unknown = set(data) - set(ExperimentConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(data.get("pe_grid"), str):
            data["pe_grid"] = parse_grid(data["pe_grid"])
    flags = {
        "scenario": args.scenario,
        "pe_grid": parse_grid(args.pe) if args.pe is not None else None,
        "trials": args.trials,
        "seed": args.seed,
        "metric": args.metric,
        "noise_interpretation": args.noise_interpretation,
        "threads": args.threads,
        "attempt_cap": args.attempt_cap,
        "pv_trials": args.pv_trials,
        "adaptive": False if args.no_adaptive else None,
    }
    data.update({k: v for k, v in flags.items() if v is not None})
    if isinstance(data.get("threads"), str) and data["threads"] != "auto":
        try:
            data["threads"] = int(data["threads"])
        except ValueError:
            raise ConfigError("threads must be a positive integer or 'auto'") from None
    try:
        cfg = ExperimentConfig(**data)
        cfg.pe_grid = [float(p) for p in cfg.pe_grid]
    except (TypeError, ValueError) as e:
        raise ConfigError(str(e)) from None
    return cfg.validate()


# -------------------------------------------------------------- running

@dataclass(frozen=True)
class SweepRow:
    result: PointResult
    p_v: float
    f: float

    def csv_row(self) -> list:
        e = self.result.estimate
        return [repr(self.result.p_e), e.n_trials, e.n_accepted, repr(self.p_v), repr(self.f),
                repr(e.point), repr(e.ci_low), repr(e.ci_high)]


def run_sweep(cfg: ExperimentConfig) -> list:
    rows = []
    for i, p in enumerate(cfg.pe_grid):
        noise = cfg.noise(p)
        res = estimate_point(cfg.scenario, noise, cfg.trials, cfg.seed, point=i, metric=cfg.metric,
                             attempt_cap=cfg.attempt_cap, threads=cfg.n_threads(),
                             adaptive=cfg.adaptive)
        if cfg.pv_trials:
            pv, f = estimate_pv_f(noise, 4, cfg.pv_trials, cfg.seed, cfg.attempt_cap, point=i)
            rows.append(SweepRow(res, pv.point, f.mean))
        else:
            rows.append(SweepRow(res, math.nan, math.nan))
        print(f"p_e={p:.5g} trials={res.estimate.n_trials} p_L={res.estimate.point:.4g} "
              f"[{res.estimate.ci_low:.3g}, {res.estimate.ci_high:.3g}]", file=sys.stderr)
    return rows


def render_csv(rows: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for r in rows:
        w.writerow(r.csv_row())
    return buf.getvalue()


def read_csv_points(path) -> list:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.DictReader(fh))
    return [(float(r["p_e"]), float(r["p_L_hat"])) for r in rows]


def _threshold_dict(points) -> dict:
    try:
        th = find_threshold(points)
    except NoThresholdError:
        return {"p_th": None, "bracket": None}
    return {"p_th": th.p_th, "bracket": list(th.bracket)}


def _write_outputs(cfg: ExperimentConfig, rows: list, out: Path, name: str) -> dict:
    out.mkdir(parents=True, exist_ok=True)
    (out / f"{name}.csv").write_text(render_csv(rows), encoding="utf-8", newline="")
    summary = {
        "version": __version__,
        "config": asdict(cfg),
        "threshold": _threshold_dict([(r.result.p_e, r.result.estimate.point) for r in rows]),
        "points": [{"p_e": r.result.p_e, "p_L": r.result.estimate.point,
                    "ci": [r.result.estimate.ci_low, r.result.estimate.ci_high],
                    "trials": r.result.estimate.n_trials, "accepted": r.result.estimate.n_accepted,
                    "errors": r.result.estimate.n_errors, "p_v": r.p_v, "f": r.f,
                    "cost_per_trial": dict(zip(("preps", "gates", "measurements"), r.result.mean_cost))}
                   for r in rows],
    }
    (out / "summary.json").write_text(json.dumps(summary, indent=2, allow_nan=True) + "\n",
                                      encoding="utf-8")
    return summary


def cmd_sweep(args) -> int:
    cfg = config_from_args(args)
    summary = _write_outputs(cfg, run_sweep(cfg), Path(args.out), "sweep")
    th = summary["threshold"]
    if th["p_th"] is not None:
        print(f"threshold {th['p_th']:.4g} in {th['bracket']}")
    if args.threshold and th["p_th"] is None:
        print("no p_L = p_e crossing inside the grid", file=sys.stderr)
        return EXIT_NO_THRESHOLD
    return EXIT_OK


def cmd_point(args) -> int:
    cfg = config_from_args(args)
    if len(cfg.pe_grid) != 1:
        raise ConfigError("point takes a single p_e")
    rows = run_sweep(cfg)
    _write_outputs(cfg, rows, Path(args.out), "point")
    e = rows[0].result.estimate
    print(f"p_L = {e.point:.6g}  95% CI [{e.ci_low:.6g}, {e.ci_high:.6g}]  "
          f"({e.n_errors}/{e.n_accepted} accepted, {e.n_trials} trials)")
    return EXIT_OK


def cmd_pvf(args) -> int:
    if args.trials < 1 or args.branches < 0 or not 0 <= args.pe < 1:
        raise ConfigError("need trials >= 1, branches >= 0 and 0 <= pe < 1")
    noise = NoiseParams(args.pe, one_qubit_mode=args.noise_interpretation)
    pv, f = estimate_pv_f(noise, args.branches, args.trials, args.seed, args.attempt_cap)
    preps, gates, meas = f.breakdown
    print(f"p_v = {pv.point:.4f}  95% CI [{pv.ci_low:.4f}, {pv.ci_high:.4f}]")
    print(f"f = {f.mean:.1f} +- {f.stderr:.1f}  (preps {preps:.1f}, gates {gates:.1f}, "
          f"measurements {meas:.1f})")
    return EXIT_OK


def cmd_resource(args) -> int:
    try:
        if args.optimize:
            ch = optimize_subcluster(args.K, args.Q, args.f, args.pv, args.N)
            print(f"k={ch.k} q={ch.q} resource={ch.resource:.4g}")
            return EXIT_OK
        if args.k is None or args.q is None:
            raise ConfigError("--k and --q are required without --optimize")
        rq = ResourceQuery(args.K, args.Q, args.k, args.q, args.f, args.pv, args.N)
    except InfiniteResourceError as e:
        raise ConfigError(str(e)) from None
    except ValueError as e:
        raise ConfigError(str(e)) from None
    tn = trials_needed(args.k, args.q, args.pv, args.N)
    print(f"{resource(rq):.4g}")
    print(f"trials per sub-cluster: {tn.trials} (success >= {tn.success_bound:.6f})", file=sys.stderr)
    return EXIT_OK


def cmd_threshold(args) -> int:
    try:
        points = read_csv_points(args.csv)
    except (OSError, KeyError, ValueError) as e:
        raise ConfigError(f"cannot read {args.csv}: {e}") from None
    try:
        th = find_threshold(points)
    except NoThresholdError as e:
        print(f"no threshold: {e}", file=sys.stderr)
        return EXIT_NO_THRESHOLD
    print(f"{th.p_th:.6g} in [{th.bracket[0]:.6g}, {th.bracket[1]:.6g}]")
    return EXIT_OK


def cmd_selftest(args) -> int:
    from . import soundness
    reports = [soundness.check_pipeline(name) for name in soundness.PIPELINES]
    for case in SCENARIOS:
        if args.quick and case == "ii":
            continue
        reports.append(soundness.check_scenario(case))
    for r in reports:
        print(r.line())
    return EXIT_OK if all(r.ok for r in reports) else 1


COMMANDS = {"sweep": cmd_sweep, "point": cmd_point, "pvf": cmd_pvf, "resource": cmd_resource,
            "threshold": cmd_threshold, "selftest": cmd_selftest}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CONFIG if e.code not in (0, None) else EXIT_OK
    try:
        return COMMANDS[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except UndefinedEstimateError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
