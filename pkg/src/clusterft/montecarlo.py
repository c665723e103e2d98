"""Monte Carlo estimation of p_L, p_v and f, sweeps and threshold extraction.

Trials are simulated in fixed-size chunks.  Chunk ``c`` of a run keyed by
``(seed, point)`` draws all of its randomness from its own Philox stream,
so results do not depend on how chunks are spread over workers.  Within a
chunk, preparation pools retry rejected attempts; a trial is the
measurement of one accepted scenario preparation.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from statistics import NormalDist

import numpy as np

from . import batch
from .cluster import ClusterGraph, scenario_layout, subcluster_stage, SCENARIOS
from .noise import NoiseParams, sample_fault_positions

CHUNK = 4096
DEFAULT_ATTEMPT_CAP = 1000
Z95 = NormalDist().inv_cdf(0.975)


class UndefinedEstimateError(ValueError):
    pass


class NoThresholdError(ValueError):
    pass


@dataclass(frozen=True)
class TrialResult:
    accepted: bool
    logical_error: bool
    consumed_qubits: int
    consumed_gates: int
    consumed_measurements: int = 0


@dataclass(frozen=True)
class Estimate:
    point: float
    ci_low: float
    ci_high: float
    n_trials: int
    n_accepted: int
    n_errors: int = 0

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2


def wilson(successes: int, n: int, z: float = Z95) -> tuple:
    if n <= 0:
        raise UndefinedEstimateError("no trials in the denominator")
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo, hi = max(0.0, centre - half), min(1.0, centre + half)
    # guard against rounding pushing the point outside its own interval
    return p, min(lo, p), max(hi, p)


def make_estimate(errors: int, accepted: int, trials: int) -> Estimate:
    if accepted <= 0:
        raise UndefinedEstimateError("no accepted trials")
    p, lo, hi = wilson(errors, accepted)
    return Estimate(p, lo, hi, trials, accepted, errors)


# -------------------------------------------------------------- chunks

@dataclass
class ChunkResult:
    accepted: np.ndarray      # (CHUNK,) bool
    errors: np.ndarray        # (CHUNK,) bool
    cost: np.ndarray          # (CHUNK, 3)

    def head(self, m: int) -> "ChunkResult":
        return ChunkResult(self.accepted[:m], self.errors[:m], self.cost[:m])


def chunk_rng(seed: int, point: int, chunk: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, point, chunk])))


def _measure(xm, zm, s_mask, noise: NoiseParams, rng):
    """Transversal rotation (S where ``s_mask``) and X-basis readout.

    Returns the measured flip words.
    """
    T = xm.shape[1]
    if noise.p_e > 0 and s_mask.any():
        per = noise.per_pauli("one-qubit-gate")
        pos = sample_fault_positions(rng, 7 * T, 3 * per)
        q, t = pos // T, pos % T
        codes = rng.integers(1, 4, size=pos.size)
        keep = s_mask[t]
        q, t, codes = q[keep], t[keep], codes[keep]
        xm[q, t] ^= (codes & 1).astype(bool)
        zm[q, t] ^= (codes >> 1 & 1).astype(bool)
    zm[:, s_mask] ^= xm[:, s_mask]
    if noise.p_e > 0:
        pos = sample_fault_positions(rng, 7 * T, noise.per_pauli("measure"))
        zm[pos // T, pos % T] ^= True
    return batch.pack(zm)


def run_chunk(case: str, noise: NoiseParams, seed: int, point: int, chunk: int,
              metric: str = "raw-weight", attempt_cap: int = DEFAULT_ATTEMPT_CAP,
              size: int = CHUNK) -> ChunkResult:
    """Simulate one chunk of ``size`` trials of scenario ``case``."""
    if case not in SCENARIOS:
        raise ValueError(f"scenario must be one of {SCENARIOS}")
    rng = chunk_rng(seed, point, chunk)
    layout = scenario_layout(case)
    keep = layout.measured + sum(layout.neighbors, ())
    pools = batch.PoolSet(noise, rng, attempt_cap)
    items = pools.draw(layout.stage, size, keep=keep)
    xm = items.x[:7].copy()
    zm = items.z[:7].copy()
    # a logical X left on a |+_L> neighbour is a stabilizer once it carries
    # its C-Z partner Z_L on the measured block; divide that pair out
    for j in range(len(layout.neighbors)):
        xn = items.x[7 * (j + 1):7 * (j + 2)]
        zm ^= batch.logical_x_content(batch.pack(xn))[None, :]
    s_mask = rng.random(size) < 0.5 if case == "ii" else np.zeros(size, dtype=bool)
    words = _measure(xm, zm, s_mask, noise, rng)
    accepted = ~items.exhausted
    errors = batch.logical_errors(words, metric) & accepted
    cost = items.cost.copy()
    cost[:, 1] += 7 * s_mask
    cost[:, 2] += 7
    return ChunkResult(accepted, errors, cost)


def _chunk_job(args):
    return run_chunk(*args)


def run_chunks(case: str, noise: NoiseParams, seed: int, point: int, chunks: range,
               metric: str, attempt_cap: int, threads: int = 1) -> list:
    jobs = [(case, noise, seed, point, c, metric, attempt_cap) for c in chunks]
    if threads <= 1 or len(jobs) <= 1:
        return [_chunk_job(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(_chunk_job, jobs))


def run_trial(case: str, noise: NoiseParams, master_seed: int, trial_index: int,
              metric: str = "raw-weight", attempt_cap: int = DEFAULT_ATTEMPT_CAP,
              point: int = 0) -> TrialResult:
    """Trial ``trial_index`` of the run keyed by ``master_seed``.

    Simulates the trial's whole chunk, so it agrees with bulk estimates.
    """
    chunk, i = divmod(trial_index, CHUNK)
    r = run_chunk(case, noise, master_seed, point, chunk, metric, attempt_cap)
    return TrialResult(bool(r.accepted[i]), bool(r.errors[i]), int(r.cost[i, 0]),
                       int(r.cost[i, 1]), int(r.cost[i, 2]))


# ---------------------------------------------------------- estimates

@dataclass(frozen=True)
class PointResult:
    p_e: float
    estimate: Estimate
    mean_cost: tuple          # preps, gates, measurements per trial


def _combine(results: list, n: int) -> tuple:
    acc = err = 0
    cost = np.zeros(3)
    left = n
    for r in results:
        if left <= 0:
            break
        r = r.head(min(left, r.accepted.size))
        acc += int(r.accepted.sum())
        err += int(r.errors.sum())
        cost += r.cost.sum(0)
        left -= r.accepted.size
    return acc, err, cost / max(n, 1)


def estimate_point(case: str, noise: NoiseParams, n_trials: int, seed: int, point: int = 0,
                   metric: str = "raw-weight", attempt_cap: int = DEFAULT_ATTEMPT_CAP,
                   threads: int = 1, adaptive: bool = True, rel_half_width: float = 0.2,
                   max_trials: int | None = None) -> PointResult:
    """p_L at one noise level, topped up until the CI is tight enough."""
    if n_trials < 1:
        raise ValueError("n_trials must be >= 1")
    max_trials = max(n_trials, max_trials if max_trials is not None else 4 * n_trials)
    n = n_trials
    results: list = []
    while True:
        need = math.ceil(n / CHUNK)
        results += run_chunks(case, noise, seed, point, range(len(results), need),
                              metric, attempt_cap, threads)
        acc, err, cost = _combine(results, n)
        if acc == 0:
            raise UndefinedEstimateError("no accepted trials")
        est = make_estimate(err, acc, n)
        if not adaptive or n >= max_trials:
            break
        if est.point > 0 and est.half_width < rel_half_width * est.point:
            break
        if est.point > 0:
            grow = (est.half_width / (rel_half_width * est.point)) ** 2 * 1.1
            target = math.ceil(n * grow)
        else:
            target = 2 * n
        n = min(max_trials, max(target, n + CHUNK))
    return PointResult(noise.p_e, est, tuple(float(c) for c in cost))


def estimate_pL(case: str, noise: NoiseParams, n_trials: int, seed: int, **kw) -> Estimate:
    return estimate_point(case, noise, n_trials, seed, **kw).estimate


def sweep(case: str, grid, n_trials: int, seed: int, noise_factory=None, **kw) -> list:
    """Independent estimates per grid point; point ``i`` uses stream ``(seed, i)``."""
    grid = [float(p) for p in grid]
    if not grid:
        raise ValueError("empty grid")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("grid must be strictly increasing")
    make = noise_factory or (lambda p: NoiseParams(p))
    return [estimate_point(case, make(p), n_trials, seed, point=i, **kw)
            for i, p in enumerate(grid)]


# ------------------------------------------------------------ p_v and f

@dataclass(frozen=True)
class CostEstimate:
    """Mean physical cost per logical qubit with its standard error.

    ``mean`` counts preps, gates and measurements; ``breakdown`` splits it
    into those three fields.
    """

    mean: float
    stderr: float
    breakdown: tuple
    n: int


def estimate_pv_f(noise: NoiseParams, branch_count: int = 4, n_trials: int = 20_000,
                  seed: int = 0, attempt_cap: int = DEFAULT_ATTEMPT_CAP, point: int = 0):
    """Verification statistics per logical qubit of a star sub-cluster.

    One attempt prepares a centre joined to ``branch_count`` leaves, each C-Z
    followed by its Box 3 checks.  With ``s = branch_count + 1`` qubits, p_v is
    the s-th root of the attempt acceptance, so that p_v ** s is the chance the
    whole sub-cluster survives.  f is the attempt's physical cost divided by
    s, including everything discarded while preparing its inputs.  Returns
    ``(p_v Estimate, CostEstimate)``; the Estimate's counts refer to attempts.
    """
    if branch_count < 0:
        raise ValueError("branch_count must be >= 0")
    stage = subcluster_stage(ClusterGraph.star(branch_count, "plus"))
    size_s = branch_count + 1
    passed = total = 0
    costs = []
    for c in range(math.ceil(n_trials / CHUNK)):
        size = min(CHUNK, n_trials - c * CHUNK)
        pools = batch.PoolSet(noise, chunk_rng(seed, point, c), attempt_cap)
        ab = pools.attempt(stage, size)
        ok = ~ab.exhausted
        passed += int((ab.checks.all(0) & ok).sum())
        total += int(ok.sum())
        costs.append(ab.cost[ok])
    if total == 0:
        raise UndefinedEstimateError("every attempt exhausted its inputs")
    acc, lo, hi = wilson(passed, total)
    root = 1.0 / size_s
    pv = Estimate(acc ** root, lo ** root, hi ** root, n_trials, total, passed)
    per = np.concatenate(costs)
    tot = per.sum(1)           # integers, so a constant cost has stderr 0
    se = float(tot.std(ddof=1) / math.sqrt(tot.size)) / size_s if tot.size > 1 else 0.0
    breakdown = tuple(float(v) / size_s for v in per.sum(0) / tot.size)
    return pv, CostEstimate(float(tot.sum() / tot.size) / size_s, se, breakdown, int(tot.size))


# ------------------------------------------------------------ threshold

@dataclass(frozen=True)
class Threshold:
    p_th: float
    bracket: tuple


def find_threshold(points) -> Threshold:
    """First crossing of p_L = p_e, interpolating log p_L linearly in log p_e.

    ``points`` holds ``(p_e, p_L)`` pairs or PointResults, in increasing p_e.
    """
    pairs = []
    for pt in points:
        if isinstance(pt, PointResult):
            pairs.append((pt.p_e, pt.estimate.point))
        else:
            p, est = pt
            pairs.append((float(p), est.point if isinstance(est, Estimate) else float(est)))
    for (p0, l0), (p1, l1) in zip(pairs, pairs[1:]):
        if l0 <= 0 or l1 <= 0:
            continue
        g0, g1 = math.log(l0 / p0), math.log(l1 / p1)
        if g0 < 0 <= g1 or g0 >= 0 > g1:
            x0, x1 = math.log(p0), math.log(p1)
            y0, y1 = math.log(l0), math.log(l1)
            s = (y1 - y0) / (x1 - x0)
            if s == 1:
                raise NoThresholdError("parallel to the diagonal")
            x = (y0 - s * x0) / (1 - s)
            return Threshold(math.exp(x), (p0, p1))
    raise NoThresholdError("p_L does not cross p_e inside the grid")
