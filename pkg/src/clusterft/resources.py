"""Physical resource model for building a K x Q logical cluster from
post-selected k x q sub-clusters.

Each sub-cluster of ``k * q`` logical qubits survives verification with
probability ``p_v ** (k * q)``; making ``N / p_v ** (k * q)`` attempts in
parallel leaves at least one survivor with probability ``>= 1 - exp(-N)``.
The total cost is ``N * f / p_v ** (k * q) * K * Q``.

Arithmetic is exact (``fractions.Fraction``) so decimal inputs such as 0.7
give the same answer on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction


class InfiniteResourceError(ValueError):
    """p_v = 0: no sub-cluster ever survives."""


def _exact(v) -> Fraction:
    # str() keeps 0.7 as 7/10 rather than its binary approximation
    return v if isinstance(v, Fraction) else Fraction(str(v))


@dataclass(frozen=True)
class ResourceQuery:
    K: int
    Q: int
    k: int
    q: int
    f: float
    p_v: float
    N: float = 10

    def __post_init__(self):
        if not (1 <= self.k <= self.K and 1 <= self.q <= self.Q):
            raise ValueError("need 1 <= k <= K and 1 <= q <= Q")
        if self.p_v == 0:
            raise InfiniteResourceError("p_v = 0 makes every sub-cluster fail")
        if not 0 < self.p_v <= 1:
            raise ValueError("p_v must lie in (0, 1]")
        if self.N < 1:
            raise ValueError("N must be >= 1")
        if self.f < 0:
            raise ValueError("f must be >= 0")


def resource_exact(rq: ResourceQuery) -> Fraction:
    pv = _exact(rq.p_v)
    return _exact(rq.N) * _exact(rq.f) * rq.K * rq.Q / pv ** (rq.k * rq.q)


def resource(K, Q=None, k=None, q=None, f=None, p_v=None, N=10) -> float:
    """N f / p_v^(kq) K Q.  Accepts a ResourceQuery or the seven numbers.

    Values beyond the float range come back as ``inf``; use
    ``log10_resource`` to compare those.
    """
    rq = K if isinstance(K, ResourceQuery) else ResourceQuery(K, Q, k, q, f, p_v, N)
    try:
        return float(resource_exact(rq))
    except OverflowError:
        return math.inf


def log10_resource(rq: ResourceQuery) -> float:
    return (math.log10(rq.N) + math.log10(rq.f) + math.log10(rq.K) + math.log10(rq.Q)
            - rq.k * rq.q * math.log10(rq.p_v))


@dataclass(frozen=True)
class TrialCount:
    trials: int
    success_bound: float      # lower bound on P(at least one survivor)


def trials_needed(k: int, q: int, p_v: float, N: float = 10) -> TrialCount:
    if not 0 < p_v <= 1:
        raise ValueError("p_v must lie in (0, 1]")
    if k < 1 or q < 1 or N < 1:
        raise ValueError("k, q and N must be >= 1")
    x = _exact(N) / _exact(p_v) ** (k * q)
    return TrialCount(math.ceil(x), 1 - math.exp(-N))


def _divisors(n: int) -> list:
    return [d for d in range(1, n + 1) if n % d == 0]


@dataclass(frozen=True)
class SubclusterChoice:
    k: int
    q: int
    resource: float
    log10_resource: float


def optimize_subcluster(K: int, Q: int, f: float, p_v: float, N: float = 10) -> SubclusterChoice:
    """Cheapest (k, q) with k | K and q | Q; ties go to the smaller k*q, then k.

    The cost depends on (k, q) only through p_v^(kq), so any p_v < 1 picks
    the smallest tile and p_v = 1 makes every tile tie.
    """
    best = None
    for k in _divisors(K):
        for q in _divisors(Q):
            rq = ResourceQuery(K, Q, k, q, f, p_v, N)
            key = (resource_exact(rq), k * q, k)
            if best is None or key < best[0]:
                best = (key, rq)
    rq = best[1]
    return SubclusterChoice(rq.k, rq.q, resource(rq), log10_resource(rq))
