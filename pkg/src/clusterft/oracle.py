"""Dense statevector oracle (at most 16 qubits).

Used by the test-suite and to derive the CH twirl table.  Amplitudes are
stored as a tensor with one axis per qubit; axis ``q`` is qubit ``q``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .pauli import Circuit, CliffordGate, DimensionError, Location, PauliString

MAX_QUBITS = 16

_I = np.eye(2, dtype=complex)
_X = np.array([[0, 1], [1, 0]], dtype=complex)
_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
_S = np.diag([1, 1j])
_SDG = np.diag([1, -1j])
PAULI_MATRICES = (_I, _X, _Z, _Y)  # indexed by the 2-bit code x + 2z

ONE_QUBIT = {"H": _H, "S": _S, "SDG": _SDG, "X": _X, "Z": _Z}
_CONTROLLED = {"CNOT": _X, "CZ": _Z, "CH": _H}


class CapacityError(ValueError):
    pass


def gate_matrix(kind: str) -> np.ndarray:
    """Unitary of a gate on its own qubits, little-endian (index = b0 + 2*b1)."""
    if kind in ONE_QUBIT:
        return ONE_QUBIT[kind]
    g = _CONTROLLED[kind]
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    # kron(op on qubit 1, op on qubit 0) matches the little-endian index
    return np.kron(_I, p0) + np.kron(g, p1)


def pauli_matrix(p: PauliString) -> np.ndarray:
    m = np.eye(1, dtype=complex)
    for q in range(p.n):
        m = np.kron(PAULI_MATRICES[p.code(q)], m)
    return m


@dataclass
class DenseState:
    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n > MAX_QUBITS:
            raise CapacityError(f"{self.n} qubits exceeds oracle cap of {MAX_QUBITS}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex).reshape((2,) * self.n)

    @classmethod
    def zeros(cls, n: int) -> "DenseState":
        if n > MAX_QUBITS:
            raise CapacityError(f"{n} qubits exceeds oracle cap of {MAX_QUBITS}")
        a = np.zeros((2,) * n, dtype=complex)
        a[(0,) * n] = 1.0
        return cls(n, a)

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "DenseState":
        """Build from a little-endian vector (index bit q = qubit q)."""
        vec = np.asarray(vec, dtype=complex)
        n = int(round(np.log2(vec.size)))
        # reshape gives big-endian axes; reverse them
        return cls(n, vec.reshape((2,) * n).transpose(tuple(reversed(range(n)))))

    def vector(self) -> np.ndarray:
        return self.amplitudes.transpose(tuple(reversed(range(self.n)))).reshape(-1)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def copy(self) -> "DenseState":
        return DenseState(self.n, self.amplitudes.copy())

    # -- unitary action
    def apply_matrix(self, m: np.ndarray, qubits: Sequence[int]) -> None:
        k = len(qubits)
        for q in qubits:
            if not 0 <= q < self.n:
                raise DimensionError(f"qubit {q} outside {self.n}-qubit state")
        # m is little-endian over `qubits`; as a tensor its axes are reversed
        t = m.reshape((2,) * (2 * k))
        out_axes = tuple(reversed(range(k)))
        in_axes = tuple(k + i for i in reversed(range(k)))
        t = t.transpose(out_axes + in_axes)
        a = np.tensordot(t, self.amplitudes, axes=(list(range(k, 2 * k)), list(qubits)))
        self.amplitudes = np.moveaxis(a, list(range(k)), list(qubits))

    def apply_gate(self, gate: CliffordGate) -> None:
        self.apply_matrix(gate_matrix(gate.kind), gate.qubits)

    def apply_pauli(self, p: PauliString) -> None:
        for q in range(p.n):
            c = p.code(q)
            if c:
                self.apply_matrix(PAULI_MATRICES[c], (q,))

    # -- measurement
    def prob_one(self, q: int, basis: str = "Z") -> float:
        a = self.amplitudes
        if basis == "X":
            s = self.copy()
            s.apply_matrix(_H, (q,))
            a = s.amplitudes
        sl = [slice(None)] * self.n
        sl[q] = 1
        return float(np.sum(np.abs(a[tuple(sl)]) ** 2))

    def measure(self, q: int, basis: str = "Z", rng=None, outcome: int | None = None) -> int:
        if basis == "X":
            self.apply_matrix(_H, (q,))
        sl1 = [slice(None)] * self.n
        sl1[q] = 1
        p1 = float(np.sum(np.abs(self.amplitudes[tuple(sl1)]) ** 2))
        if outcome is None:
            rng = rng if rng is not None else np.random.default_rng()
            outcome = int(rng.random() < p1)
        p = p1 if outcome else 1 - p1
        if p < 1e-14:
            raise ValueError("forced outcome has zero probability")
        keep = [slice(None)] * self.n
        kill = [slice(None)] * self.n
        keep[q] = outcome
        kill[q] = 1 - outcome
        self.amplitudes[tuple(kill)] = 0
        self.amplitudes /= np.sqrt(p)
        if basis == "X":
            self.apply_matrix(_H, (q,))
        return outcome

    def reset(self, q: int, basis: str = "Z", rng=None) -> None:
        if self.measure(q, "Z", rng):
            self.apply_matrix(_X, (q,))
        if basis == "X":
            self.apply_matrix(_H, (q,))

    def expectation(self, p: PauliString) -> float:
        s = self.copy()
        s.apply_pauli(p)
        val = np.vdot(self.amplitudes.reshape(-1), s.amplitudes.reshape(-1))
        return float(val.real)


def apply(op, state: DenseState, rng=None, injected: Mapping | None = None,
          outcomes: dict | None = None) -> DenseState:
    """Apply a gate or a whole Circuit to ``state`` in place and return it.

    For circuits, measurement outcomes are written to ``outcomes`` (register
    id -> bit).  ``injected`` uses the same conventions as ``propagate_frame``.
    """
    if isinstance(op, CliffordGate):
        state.apply_gate(op)
        return state
    circuit: Circuit = op
    if circuit.n > state.n:
        raise DimensionError("circuit wider than state")
    injected = injected or {}
    outcomes = {} if outcomes is None else outcomes
    for loc in circuit.locations:
        fault = injected.get(loc.site_id)
        if loc.op == "PREP":
            state.reset(loc.qubits[0], loc.basis, rng)
            if fault is not None:
                _apply_fault(state, loc, fault)
        elif loc.op == "MEAS":
            m = state.measure(loc.qubits[0], loc.basis, rng)
            if fault is True:
                m ^= 1
            outcomes[loc.register] = m
        elif loc.op == "CORRECT":
            par = sum(outcomes[r] for r in loc.cond) & 1
            if par == loc.when:
                state.apply_pauli(loc.pauli.embed(state.n, loc.qubits))
        elif loc.op == "CANON":
            continue
        elif loc.op == "WAIT":
            if fault is not None:
                _apply_fault(state, loc, fault)
        else:
            if fault is not None:
                _apply_fault(state, loc, fault)
            state.apply_gate(loc.gate)
    return state


def _apply_fault(state: DenseState, loc: Location, fault) -> None:
    if isinstance(fault, PauliString):
        p = fault if fault.n == state.n else fault.embed(state.n, loc.qubits)
        state.apply_pauli(p)
    elif fault and loc.op == "PREP":
        state.apply_matrix(_X if loc.basis == "Z" else _Z, loc.qubits)


def conjugate_exact(gate: CliffordGate, pauli: PauliString) -> list:
    """Pauli-basis expansion of ``G P G^dagger``.

    ``pauli`` acts on the gate's own qubits in gate order (qubit 0 is the
    first gate qubit).  Returns ``[(PauliString, coefficient), ...]`` with
    nonzero coefficients only.
    """
    k = len(gate.qubits)
    if pauli.n != k:
        raise DimensionError("Pauli must be on the gate's own qubits")
    u = gate_matrix(gate.kind)
    m = u @ pauli_matrix(pauli) @ u.conj().T
    d = 2 ** k
    out = []
    for codes in itertools.product(range(4), repeat=k):
        x = sum((c & 1) << i for i, c in enumerate(codes))
        z = sum((c >> 1) << i for i, c in enumerate(codes))
        q = PauliString(k, x, z)
        coeff = np.trace(pauli_matrix(q) @ m) / d
        if abs(coeff) > 1e-12:
            out.append((q, complex(coeff)))
    return out


def fidelity(a: DenseState, b: DenseState) -> float:
    if a.n != b.n:
        raise DimensionError("states have different sizes")
    return float(abs(np.vdot(a.amplitudes.reshape(-1), b.amplitudes.reshape(-1))) ** 2)


def subsystem_fidelity(state: DenseState, target: DenseState, qubits: Sequence[int]) -> float:
    """``<t| rho_A |t>`` where A is ``qubits`` of ``state`` and t is ``target``."""
    rest = [q for q in range(state.n) if q not in qubits]
    a = np.transpose(state.amplitudes, list(qubits) + rest).reshape(2 ** len(qubits), -1)
    t = np.transpose(target.amplitudes, list(range(target.n))).reshape(-1)
    proj = t.conj() @ a
    return float(np.sum(np.abs(proj) ** 2))


def outcome_distribution(state: DenseState, qubits: Sequence[int], bases: Sequence[str]) -> np.ndarray:
    """Joint probabilities of measuring ``qubits`` in ``bases``.

    Index bit i of the result is the outcome on ``qubits[i]``.
    """
    s = state.copy()
    for q, b in zip(qubits, bases):
        if b == "X":
            s.apply_matrix(_H, (q,))
    rest = [q for q in range(s.n) if q not in qubits]
    a = np.abs(np.transpose(s.amplitudes, list(reversed(qubits)) + rest)) ** 2
    return a.reshape(2 ** len(qubits), -1).sum(axis=1)
