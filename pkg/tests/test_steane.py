import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from clusterft import oracle, steane
from clusterft.pauli import PauliString

W7 = st.integers(0, 127)


def test_check_matrix_columns_are_binary_indices():
    h = steane.STEANE.hx
    for j in range(7):
        assert sum(int(h[r, j]) << r for r in range(3)) == j + 1


def test_single_errors_are_located():
    for j in range(7):
        assert steane.decode_single(steane.syndrome(1 << j)) == j
    assert steane.decode_single(steane.syndrome(0)) is None


def test_codewords():
    cw = steane.hamming_codewords()
    assert len(cw) == 16 and len(steane.even_codewords()) == 8
    assert sorted(bin(w).count("1") for w in steane.even_codewords()) == [0] + [4] * 7
    assert steane.ALL_ONES in cw


@pytest.mark.parametrize("word,raw,dec", [(0, False, False), (0b1, False, False),
                                          (0b11, True, True), (0b111, True, True), (0b1011, True, False),
                                          (127, True, True)])
def test_logical_error_metrics(word, raw, dec):
    assert steane.is_logical_error(word, "raw-weight") is raw
    assert steane.is_logical_error(word, "decoder-failure") is dec


def test_unknown_metric():
    with pytest.raises(ValueError):
        steane.is_logical_error(0, "majority")


@given(W7, st.sampled_from(range(8)))
def test_reduction_ignores_stabilizers(w, k):
    s = steane.even_codewords()[k]
    assert steane.reduce_flips(w ^ s) == steane.reduce_flips(w)


@given(W7)
def test_metrics_agree_after_reduction(w):
    # after dividing out stabilizers, weight >= 2 is exactly a decoding failure
    r = steane.reduce_flips(w)
    assert steane.is_logical_error(r, "raw-weight") == steane.is_logical_error(w, "decoder-failure")


@given(W7)
def test_reduction_array_matches_scalar(w):
    assert steane.reduce_flips_array(np.array([w]))[0] == steane.reduce_flips(w)


def test_effective_weight():
    two_z = PauliString(7, 0, 0b11)
    assert steane.effective_weight(two_z, "code") == 2
    # on |0_L> a Z pair is a single Z times logical Z times a stabilizer
    assert steane.effective_weight(two_z, "zero") == 1
    assert steane.effective_weight(PauliString(7, steane.ROW_MASKS[0], 0), "code") == 0


def _stabilizer_expectations(state):
    out = []
    for m in steane.ROW_MASKS:
        out.append(state.expectation(PauliString(7, m, 0)))
        out.append(state.expectation(PauliString(7, 0, m)))
    return out


@pytest.mark.parametrize("enc,logical", [(steane.encode_zero, PauliString(7, 0, 127)),
                                         (steane.encode_plus, PauliString(7, 127, 0))])
def test_encoders(enc, logical):
    s = oracle.apply(enc(), oracle.DenseState.zeros(7))
    assert np.allclose(_stabilizer_expectations(s), 1, atol=1e-10)
    assert abs(s.expectation(logical) - 1) < 1e-10


def test_encoder_depth_and_size():
    c = steane.encode_zero()
    assert c.count() == {"preps": 7, "gates": 9, "measurements": 0}
    assert c.depth == 4


def _pi8_target():
    z = oracle.apply(steane.encode_zero(), oracle.DenseState.zeros(7))
    one = z.copy()
    one.apply_pauli(PauliString(7, 127, 0))
    v = np.cos(np.pi / 8) * z.vector() + np.sin(np.pi / 8) * one.vector()
    return oracle.DenseState.from_vector(v)


def test_pi8_encoder_on_oracle():
    rng = np.random.default_rng(3)
    target = _pi8_target()
    c = steane.encode_pi8()
    seen = set()
    for _ in range(24):
        st_ = oracle.DenseState.zeros(14)
        out = {}
        oracle.apply(c, st_, rng, outcomes=out)
        flips = sum(v << r for r, v in out.items())
        assert c.accepts(flips)            # noiseless runs always agree
        seen.add(sum(out[r] for r in range(7)) % 2)
        assert abs(oracle.subsystem_fidelity(st_, target, range(7)) - 1) < 1e-8
    assert seen == {0, 1}                  # both branches were exercised


def test_pi8_identity():
    # HS on the pi/8 state is Z(-pi/4)|+_L> up to a global phase
    target = _pi8_target()
    s = target.copy()
    for q in range(7):
        s.apply_matrix(oracle.ONE_QUBIT["SDG"], (q,))      # logical S
    for q in range(7):
        s.apply_matrix(oracle.ONE_QUBIT["H"], (q,))
    plus = oracle.apply(steane.encode_plus(), oracle.DenseState.zeros(7))
    minus = plus.copy()
    minus.apply_pauli(PauliString(7, 0, 127))
    # Z(theta) = exp(-i theta Z / 2) on the logical qubit
    th = -np.pi / 4
    v = (np.exp(-1j * th / 2) * (plus.vector() + minus.vector())
         + np.exp(1j * th / 2) * (plus.vector() - minus.vector())) / 2
    ref = oracle.DenseState.from_vector(v)
    assert abs(oracle.fidelity(s, ref) - 1) < 1e-8


def test_transversal_sdg_is_logical_s():
    z = oracle.apply(steane.encode_zero(), oracle.DenseState.zeros(7))
    plus = oracle.apply(steane.encode_plus(), oracle.DenseState.zeros(7))
    s = plus.copy()
    for q in range(7):
        s.apply_matrix(oracle.ONE_QUBIT["SDG"], (q,))
    one = z.copy()
    one.apply_pauli(PauliString(7, 127, 0))
    ref = oracle.DenseState.from_vector((z.vector() + 1j * one.vector()) / np.sqrt(2))
    assert abs(oracle.fidelity(s, ref) - 1) < 1e-10
