"""Depolarizing noise per physical operation and fault sampling."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pauli import PauliString

SITE_CLASSES = ("one-qubit-gate", "two-qubit-gate", "prep", "measure", "wait")
ONE_QUBIT_MODES = ("total-4pe5", "per-pauli-4pe5")


@dataclass(frozen=True)
class NoiseParams:
    """Error probability ``p_e`` per operation, memory error ``p_m`` per step.

    ``one_qubit_mode`` picks how "4p_e/5 for each of the 3 Pauli errors" is
    read: ``total-4pe5`` gives 4p_e/15 per Pauli, ``per-pauli-4pe5`` gives
    4p_e/5 per Pauli.
    """

    p_e: float = 0.0
    p_m: float = 0.0
    include_memory: bool = False
    one_qubit_mode: str = "total-4pe5"

    def __post_init__(self):
        if not 0 <= self.p_e < 1:
            raise ValueError("p_e must lie in [0, 1)")
        if not 0 <= self.p_m <= self.p_e:
            raise ValueError("p_m must lie in [0, p_e]")
        if self.one_qubit_mode not in ONE_QUBIT_MODES:
            raise ValueError(f"one_qubit_mode must be one of {ONE_QUBIT_MODES}")
        if self.one_qubit_mode == "per-pauli-4pe5" and 12 * self.p_e / 5 > 1:
            raise ValueError("per-pauli reading needs p_e <= 5/12")

    def per_pauli(self, site_class: str) -> float:
        """Probability of each individual nontrivial fault at a site."""
        p = self.p_e
        if site_class == "two-qubit-gate":
            return p / 15
        if site_class == "one-qubit-gate":
            return 4 * p / 15 if self.one_qubit_mode == "total-4pe5" else 4 * p / 5
        if site_class in ("prep", "measure"):
            return 4 * p / 15
        if site_class == "wait":
            return self.p_m / 3 if self.include_memory else 0.0
        raise ValueError(f"unknown site class {site_class!r}")

    def total(self, site_class: str) -> float:
        return self.per_pauli(site_class) * n_outcomes(site_class)


def n_outcomes(site_class: str) -> int:
    return {"two-qubit-gate": 15, "one-qubit-gate": 3, "wait": 3,
            "prep": 1, "measure": 1}[site_class]


def sample_fault(site_class: str, params: NoiseParams, rng: np.random.Generator):
    """One draw from the site's fault distribution.

    Returns None (no fault), True (prep/measure flip), or a PauliString on the
    site's own qubits (1 or 2 qubits, never the identity).
    """
    k = n_outcomes(site_class)
    q = params.per_pauli(site_class)
    if q <= 0:
        return None
    u = rng.random()
    if u >= q * k:
        return None
    if site_class in ("prep", "measure"):
        return True
    idx = min(int(u / q), k - 1) + 1
    if site_class == "two-qubit-gate":
        return PauliString(2, (idx & 1) | ((idx >> 2 & 1) << 1),
                           (idx >> 1 & 1) | ((idx >> 3 & 1) << 1))
    return PauliString(1, idx & 1, idx >> 1)


def memory_budget_ok(q: int, m: int, params: NoiseParams) -> bool:
    """Memory noise negligible when both widths stay below p_e / p_m."""
    if params.p_m == 0:
        return True
    ratio = params.p_e / params.p_m
    return q < ratio and m < ratio


def sample_fault_positions(rng: np.random.Generator, size: int, prob: float) -> np.ndarray:
    """Indices in ``range(size)`` hit by independent Bernoulli(prob) events.

    Uses geometric gaps, so the cost scales with the number of hits.
    """
    if prob <= 0 or size <= 0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1:
        return np.arange(size, dtype=np.int64)
    expect = size * prob
    chunks = []
    pos = -1
    while True:
        k = int(expect + 6 * np.sqrt(expect) + 16)
        # clipping keeps the cumulative sum from overflowing for tiny prob
        gaps = np.minimum(rng.geometric(prob, size=k), size + 1)
        idx = pos + np.cumsum(gaps)
        if idx[-1] >= size:
            chunks.append(idx[idx < size])
            break
        chunks.append(idx)
        pos = int(idx[-1])
    return np.concatenate(chunks)
