import numpy as np
import pytest
from hypothesis import given, strategies as st

from clusterft.pauli import (CircuitBuilder, CliffordGate, DimensionError, PauliFrame, PauliString,
                             UnsupportedGateError, ch_cumulative, ch_table, compose, conjugate,
                             enumerate_single_faults, propagate_frame, single_fault_effects, weight)

N = 5


def paulis(n=N):
    full = (1 << n) - 1
    return st.builds(lambda x, z: PauliString(n, x, z),
                     st.integers(0, full), st.integers(0, full))


def gates(n=N):
    one = st.tuples(st.sampled_from(["H", "S", "SDG", "X", "Z"]), st.integers(0, n - 1))
    two = st.tuples(st.sampled_from(["CNOT", "CZ"]),
                    st.lists(st.integers(0, n - 1), min_size=2, max_size=2, unique=True))
    return st.one_of(one.map(lambda t: CliffordGate(t[0], (t[1],))),
                     two.map(lambda t: CliffordGate(t[0], tuple(t[1]))))


def test_cnot_rules():
    g = CliffordGate("CNOT", (0, 1))
    assert str(conjugate(g, PauliString.from_str("XI"))) == "XX"
    assert str(conjugate(g, PauliString.from_str("IZ"))) == "ZZ"
    assert str(conjugate(g, PauliString.from_str("ZI"))) == "ZI"


def test_cz_and_h_rules():
    assert str(conjugate(CliffordGate("CZ", (0, 1)), PauliString.from_str("XI"))) == "XZ"
    assert str(conjugate(CliffordGate("H", (0,)), PauliString.from_str("X"))) == "Z"
    assert str(conjugate(CliffordGate("S", (0,)), PauliString.from_str("X"))) == "Y"


def test_ch_is_not_conjugated():
    with pytest.raises(UnsupportedGateError):
        conjugate(CliffordGate("CH", (0, 1)), PauliString.from_str("XI"))


def test_dimension_errors():
    with pytest.raises(DimensionError):
        compose(PauliString(2), PauliString(3))
    with pytest.raises(DimensionError):
        PauliString(2, 4, 0)
    with pytest.raises(DimensionError):
        conjugate(CliffordGate("H", (3,)), PauliString(2))


@given(paulis(), paulis())
def test_compose_is_a_group(a, b):
    assert compose(a, b) == compose(b, a)
    assert compose(compose(a, b), b) == a
    assert compose(a, a).is_identity()


@given(gates(), paulis(), paulis())
def test_conjugation_is_a_homomorphism(g, a, b):
    assert conjugate(g, a * b) == conjugate(g, a) * conjugate(g, b)
    assert conjugate(g, a).commutes(conjugate(g, b)) == a.commutes(b)


@given(gates(), paulis())
def test_self_inverse_gates(g, p):
    inv = {"S": "SDG", "SDG": "S"}.get(g.kind, g.kind)
    assert conjugate(CliffordGate(inv, g.qubits), conjugate(g, p)) == p


@given(paulis(7), st.lists(st.integers(0, 6), min_size=3, max_size=3, unique=True))
def test_restrict_embed_roundtrip(p, qs):
    small = p.restrict(qs)
    assert small.embed(7, qs).restrict(qs) == small
    assert weight(small) <= weight(p)


def test_ch_table_rows_are_distributions():
    for row in ch_table():
        assert abs(sum(pr for _, pr in row) - 1) < 1e-12
    assert np.all(ch_cumulative()[:, -1] == 1.0)
    # the identity is untouched and Z on the control commutes with CH
    assert ch_table()[0] == ((0, 1.0),)
    assert ch_table()[2] == ((2, 1.0),)


def test_scheduler_is_asap_and_rejects_clashes():
    b = CircuitBuilder(3)
    b.prep(0)
    b.prep(1)
    b.cnot(0, 1)
    b.h(2)
    c = b.build()
    steps = {loc.op: loc.time_step for loc in c.locations}
    assert steps["CNOT"] == 1 and steps["H"] == 0
    assert c.count() == {"preps": 2, "gates": 2, "measurements": 0}


def test_propagation_flags_measurements():
    b = CircuitBuilder(2)
    b.prep(0, "X")
    b.prep(1, "Z")
    b.cnot(0, 1)
    r0 = b.measure(0, "X")
    r1 = b.measure(1, "Z")
    c = b.build()
    prep1 = next(loc for loc in c.locations if loc.op == "PREP" and loc.qubits == (1,))
    f = propagate_frame(c, None, {prep1.site_id: True})
    assert f.flipped_measurements == {r1}
    cx = next(loc for loc in c.locations if loc.op == "CNOT")
    f = propagate_frame(c, None, {cx.site_id: PauliString.from_str("ZI")})
    assert f.flipped_measurements == {r0}
    with pytest.raises(KeyError):
        propagate_frame(c, None, {999: True})


def test_frame_width_checked():
    b = CircuitBuilder(2)
    b.h(0)
    with pytest.raises(DimensionError):
        propagate_frame(b.build(), PauliFrame.clean(3))


def test_fast_and_slow_enumerators_agree():
    from clusterft.boxes import plus2
    from clusterft.cluster import pi8_stage
    from clusterft.stages import flatten
    for stage in (plus2(), pi8_stage()):
        fs = flatten(stage)
        c = fs.circuit
        slow = []
        for loc, fault, outs in enumerate_single_faults(c):
            d = {}
            for (x, z, f), pr in outs.items():
                p = PauliString(c.n, x, z).restrict(fs.output).embed(c.n, fs.output)
                d[(p.x, p.z, f)] = d.get((p.x, p.z, f), 0) + pr
            slow.append((loc.site_id, str(fault), d))
        fast = [(loc.site_id, str(fault), outs) for loc, fault, outs in single_fault_effects(c, fs.output)]
        assert len(slow) == len(fast)
        for (s1, f1, d1), (s2, f2, d2) in zip(slow, fast):
            assert (s1, f1) == (s2, f2)
            assert d1.keys() == d2.keys()
            for k in d1:
                assert abs(d1[k] - d2[k]) < 1e-12
