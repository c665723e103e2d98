"""Checks of the frame simulator and the encoders against the dense oracle.

Each function returns plain numbers so that tests and scripts can apply
their own tolerances.
"""

from __future__ import annotations

import numpy as np

from . import boxes, oracle, steane
from .pauli import Circuit, CircuitBuilder, PauliString, propagate_frame, site_faults

_ONE = ("H", "S", "SDG", "X", "Z")
_TWO = ("CNOT", "CZ")


def random_clifford_circuit(rng: np.random.Generator, n: int, max_gates: int = 16):
    """Random preps, Clifford gates and a final readout of every qubit.

    Returns ``(circuit, bases, registers)``.
    """
    b = CircuitBuilder(n)
    for q in range(n):
        b.prep(q, str(rng.choice(["X", "Z"])))
    kinds = _ONE + (_TWO if n > 1 else ())
    for _ in range(int(rng.integers(3, max_gates))):
        kind = str(rng.choice(kinds))
        if kind in _TWO:
            a, c = rng.choice(n, 2, replace=False)
            b.gate(kind, int(a), int(c))
        else:
            b.gate(kind, int(rng.integers(n)))
    bases = [str(rng.choice(["X", "Z"])) for _ in range(n)]
    regs = [b.measure(q, bases[q]) for q in range(n)]
    return b.build(), bases, regs


def _before_readout(circ: Circuit, injected: dict) -> oracle.DenseState:
    body = Circuit(circ.n, tuple(loc for loc in circ.locations if loc.op != "MEAS"))
    return oracle.apply(body, oracle.DenseState.zeros(circ.n), injected=injected)


def frame_matches_oracle(circ: Circuit, bases, regs, loc, fault, atol: float = 1e-10) -> bool:
    """True when the propagated frame reproduces the faulty circuit exactly:
    the faulty state is the frame's Pauli applied to the ideal state, and the
    readout distribution is the ideal one shifted by the predicted flips."""
    frame = propagate_frame(circ, None, {loc.site_id: fault})
    ideal = _before_readout(circ, {})
    noisy = _before_readout(circ, {} if loc.op == "MEAS" else {loc.site_id: fault})
    moved = ideal.copy()
    moved.apply_pauli(frame.pauli)
    if abs(oracle.fidelity(moved, noisy) - 1) > atol:
        return False
    n = circ.n
    qs = list(range(n))
    p_ideal = oracle.outcome_distribution(ideal, qs, bases)
    p_noisy = oracle.outcome_distribution(noisy, qs, bases)
    if loc.op == "MEAS":
        # the state is untouched, only the record flips
        bit = 1 << loc.qubits[0]
        p_noisy = np.array([p_noisy[i ^ bit] for i in range(2 ** n)])
    flips = sum(1 << q for q in qs if regs[q] in frame.flipped_measurements)
    expect = np.array([p_ideal[i ^ flips] for i in range(2 ** n)])
    return bool(np.allclose(p_noisy, expect, atol=atol))


def random_circuit_agreement(count: int = 200, seed: int = 7, max_qubits: int = 6) -> tuple:
    """``(agreeing, count)`` over random circuits with one random fault each."""
    rng = np.random.default_rng(seed)
    good = 0
    for _ in range(count):
        n = int(rng.integers(1, max_qubits + 1))
        circ, bases, regs = random_clifford_circuit(rng, n)
        sites = [loc for loc in circ.locations if loc.site_class]
        loc = sites[int(rng.integers(len(sites)))]
        opts = site_faults(loc)
        good += frame_matches_oracle(circ, bases, regs, loc, opts[int(rng.integers(len(opts)))])
    return good, count


def _encoded(kind: str) -> oracle.DenseState:
    enc = steane.encode_zero() if kind == "zero" else steane.encode_plus()
    return oracle.apply(enc, oracle.DenseState.zeros(7))


def encoder_errors() -> dict:
    """Largest deviation of a stabilizer or logical expectation from +1."""
    out = {}
    for kind, logical in (("zero", PauliString(7, 0, steane.ALL_ONES)),
                          ("plus", PauliString(7, steane.ALL_ONES, 0))):
        s = _encoded(kind)
        ops = [PauliString(7, m, 0) for m in steane.ROW_MASKS]
        ops += [PauliString(7, 0, m) for m in steane.ROW_MASKS] + [logical]
        out[kind] = max(abs(s.expectation(p) - 1) for p in ops)
    return out


def pi8_target() -> oracle.DenseState:
    z = _encoded("zero")
    one = z.copy()
    one.apply_pauli(PauliString(7, steane.ALL_ONES, 0))
    return oracle.DenseState.from_vector(np.cos(np.pi / 8) * z.vector() + np.sin(np.pi / 8) * one.vector())


def pi8_encoder_infidelity(runs: int = 16, seed: int = 3) -> float:
    """Worst ``1 - F`` of the noiseless pi/8 encoder over random cat outcomes."""
    rng = np.random.default_rng(seed)
    target = pi8_target()
    c = steane.encode_pi8()
    worst = 0.0
    for _ in range(runs):
        s = oracle.DenseState.zeros(c.n)
        out: dict = {}
        oracle.apply(c, s, rng, outcomes=out)
        if not c.accepts(sum(v << r for r, v in out.items())):
            return 1.0
        worst = max(worst, 1 - oracle.subsystem_fidelity(s, target, range(7)))
    return worst


def pi8_identity_infidelity() -> float:
    """``1 - F`` between HS|pi/8_L> and Z(-pi/4)|+_L> (logical S is
    transversal S-dagger, Z(t) = exp(-i t Z / 2))."""
    s = pi8_target()
    for gate in ("SDG", "H"):
        for q in range(7):
            s.apply_matrix(oracle.ONE_QUBIT[gate], (q,))
    plus = _encoded("plus")
    minus = plus.copy()
    minus.apply_pauli(PauliString(7, 0, steane.ALL_ONES))
    th = -np.pi / 4
    v = (np.exp(-1j * th / 2) * (plus.vector() + minus.vector())
         + np.exp(1j * th / 2) * (plus.vector() - minus.vector())) / 2
    return 1 - oracle.fidelity(s, oracle.DenseState.from_vector(v))


def _coupling_circuit(a: str, ancilla: str, data_state: str) -> Circuit:
    # a |+_L> ancilla also checks the logical parity, as in Box 2
    b = CircuitBuilder(14)
    data, anc = tuple(range(7)), tuple(range(7, 14))
    (steane.append_encode_zero if data_state == "zero" else steane.append_encode_plus)(b, data)
    (steane.append_encode_zero if ancilla == "zero" else steane.append_encode_plus)(b, anc)
    for j in range(7):
        if a == "X":
            b.cnot(anc[j], data[j])
        else:
            b.cz(anc[j], data[j])
    regs = [b.measure(q, "X") for q in anc]
    for m in steane.ROW_MASKS:
        b.check([regs[j] for j in range(7) if m >> j & 1])
    if ancilla == "plus":
        b.check(regs)
    return b.build()


def box_identity_infidelities(runs: int = 3, seed: int = 12) -> dict:
    """Worst ``1 - F`` on the data block after each ideal box, keyed by
    ``(kind, A, data state)``.

    Box 1 is run as built (its ancilla encoder is part of the circuit).
    Boxes 2-4 differ from a plain coupling only in how their ancilla was
    verified, which is invisible without noise, so the coupling is run with
    an ideally encoded ancilla: |+_L> for Box 2, |0_L> for Boxes 3 and 4.
    Box 2 reads the data's logical A, so it is only an identity on A
    eigenstates.  A rejected run scores 1.
    """
    rng = np.random.default_rng(seed)
    out = {}
    for a in ("X", "Z"):
        for data_state in ("zero", "plus"):
            target = _encoded(data_state)
            circuits = {1: boxes.build_box1(a).circuit}
            if (a, data_state) in (("X", "plus"), ("Z", "zero")):
                circuits[2] = _coupling_circuit(a, "plus", data_state)
            for kind in (3, 4):
                circuits[kind] = _coupling_circuit(a, "zero", data_state)
            for kind, circ in circuits.items():
                worst = 0.0
                for _ in range(runs):
                    s = oracle.DenseState.zeros(14)
                    if kind == 1:
                        enc = steane.encode_zero() if data_state == "zero" else steane.encode_plus()
                        oracle.apply(enc, s)
                    regs: dict = {}
                    oracle.apply(circ, s, rng, outcomes=regs)
                    ok = circ.accepts(sum(v << r for r, v in regs.items()))
                    f = oracle.subsystem_fidelity(s, target, range(7))
                    worst = max(worst, 1.0 if not ok else 1 - f)
                out[(kind, a, data_state)] = worst
    return out
