import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from clusterft.noise import (NoiseParams, memory_budget_ok, n_outcomes, sample_fault,
                             sample_fault_positions)
from clusterft.pauli import PauliString


def test_per_site_rates():
    n = NoiseParams(0.015)
    assert n.total("two-qubit-gate") == pytest.approx(0.015)
    assert n.total("one-qubit-gate") == pytest.approx(0.012)     # 4 p / 5 in all
    assert n.total("prep") == pytest.approx(0.004)
    per = NoiseParams(0.015, one_qubit_mode="per-pauli-4pe5")
    assert per.total("one-qubit-gate") == pytest.approx(0.036)   # 4 p / 5 each


def test_validation():
    with pytest.raises(ValueError):
        NoiseParams(-0.1)
    with pytest.raises(ValueError):
        NoiseParams(0.01, p_m=0.02)
    with pytest.raises(ValueError):
        NoiseParams(0.01, one_qubit_mode="other")


def test_zero_noise_never_faults(rng):
    n = NoiseParams(0.0)
    for cls in ("one-qubit-gate", "two-qubit-gate", "prep", "measure", "wait"):
        assert all(sample_fault(cls, n, rng) is None for _ in range(200))


def test_two_qubit_faults_are_uniform(rng):
    n = NoiseParams(0.9)
    counts = {}
    draws = 30000
    for _ in range(draws):
        f = sample_fault("two-qubit-gate", n, rng)
        if f is not None:
            assert isinstance(f, PauliString) and f.n == 2 and not f.is_identity()
            counts[(f.x, f.z)] = counts.get((f.x, f.z), 0) + 1
    assert len(counts) == 15
    hits = sum(counts.values())
    assert abs(hits / draws - 0.9) < 0.01
    assert max(counts.values()) / min(counts.values()) < 1.25


def test_memory_budget():
    assert memory_budget_ok(10, 10, NoiseParams(0.01))
    n = NoiseParams(0.01, p_m=0.001, include_memory=True)
    assert memory_budget_ok(9, 9, n) and not memory_budget_ok(11, 3, n)


@settings(deadline=None, max_examples=30)
@given(st.integers(1, 5000), st.floats(0.0, 1.0), st.integers(0, 2 ** 32))
def test_positions_are_sorted_and_in_range(size, p, seed):
    pos = sample_fault_positions(np.random.default_rng(seed), size, p)
    assert np.all(np.diff(pos) > 0)
    assert pos.size == 0 or (pos[0] >= 0 and pos[-1] < size)


def test_positions_have_the_right_rate(rng):
    size, p = 200_000, 0.003
    hits = sum(sample_fault_positions(rng, size, p).size for _ in range(20))
    expect = 20 * size * p
    assert abs(hits - expect) < 5 * np.sqrt(expect)


def test_outcome_counts():
    assert [n_outcomes(c) for c in ("two-qubit-gate", "one-qubit-gate", "prep")] == [15, 3, 1]
