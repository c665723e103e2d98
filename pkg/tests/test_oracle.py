"""Frame propagation against the dense simulator."""

import numpy as np
import pytest

from clusterft import oracle, oracle_checks
from clusterft.pauli import CliffordGate, PauliString, conjugate, propagate_frame


def test_hadamard():
    s = oracle.apply(CliffordGate("H", (0,)), oracle.DenseState.zeros(1))
    assert np.allclose(s.vector(), [2 ** -0.5, 2 ** -0.5])


def test_capacity():
    with pytest.raises(oracle.CapacityError):
        oracle.DenseState.zeros(17)


def test_fidelity_basics():
    zero = oracle.DenseState.zeros(1)
    one = zero.copy()
    one.apply_pauli(PauliString.from_str("X"))
    assert oracle.fidelity(zero, zero) == pytest.approx(1)
    assert oracle.fidelity(zero, one) == pytest.approx(0)


@pytest.mark.parametrize("kind", ["H", "S", "SDG", "X", "Z", "CNOT", "CZ"])
def test_clifford_conjugation_matches_exact(kind):
    k = 1 if kind in ("H", "S", "SDG", "X", "Z") else 2
    g = CliffordGate(kind, tuple(range(k)))
    for code in range(1, 4 ** k):
        x = sum((code >> (2 * i) & 1) << i for i in range(k))
        z = sum((code >> (2 * i + 1) & 1) << i for i in range(k))
        p = PauliString(k, x, z)
        terms = oracle.conjugate_exact(g, p)
        assert len(terms) == 1
        q, c = terms[0]
        assert abs(abs(c) - 1) < 1e-12
        assert q == conjugate(g, p)


def test_ch_expansion_is_normalised():
    g = CliffordGate("CH", (0, 1))
    for code in range(16):
        p = PauliString(2, (code & 1) | ((code >> 2 & 1) << 1), (code >> 1 & 1) | ((code >> 3 & 1) << 1))
        total = sum(abs(c) ** 2 for _, c in oracle.conjugate_exact(g, p))
        assert abs(total - 1) < 1e-12


def test_norm_is_preserved(rng):
    s = oracle.DenseState.zeros(4)
    for _ in range(40):
        kind = rng.choice(["H", "S", "CNOT", "CZ", "CH"])
        qs = rng.choice(4, 2 if kind in ("CNOT", "CZ", "CH") else 1, replace=False)
        s.apply_gate(CliffordGate(str(kind), tuple(int(q) for q in qs)))
        assert abs(s.norm() - 1) < 1e-12


def test_random_clifford_circuits_with_faults():
    good, total = oracle_checks.random_circuit_agreement(200, seed=7)
    assert good == total == 200


def test_random_faults_are_not_vacuous():
    # most sampled faults must actually change the readout
    rng = np.random.default_rng(7)
    visible = 0
    for _ in range(100):
        circ, _, _ = oracle_checks.random_clifford_circuit(rng, int(rng.integers(1, 7)))
        sites = [loc for loc in circ.locations if loc.site_class]
        loc = sites[int(rng.integers(len(sites)))]
        visible += bool(propagate_frame(circ, None, {loc.site_id: True if loc.op in ("PREP", "MEAS")
                                                     else PauliString(len(loc.qubits), 1, 1)})
                        .flipped_measurements)
    assert visible > 30


def test_encoders_on_oracle():
    assert max(oracle_checks.encoder_errors().values()) < 1e-10


def test_pi8_encoder_and_identity():
    assert oracle_checks.pi8_encoder_infidelity() < 1e-8
    assert oracle_checks.pi8_identity_infidelity() < 1e-8


def test_boxes_act_as_identity():
    res = oracle_checks.box_identity_infidelities()
    assert {k[0] for k in res} == {1, 2, 3, 4}
    assert max(res.values()) < 1e-8, res
