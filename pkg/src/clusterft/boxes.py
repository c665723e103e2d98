"""Verification boxes 1-4 and the level-1/level-2 block preparations.

Every box couples a fresh ancilla block (control) to the data block
(target) with a transversal C-A gate, A in {X, Z}, and reads the ancilla
out bitwise in the X basis.  Ideally the coupling acts as the identity on
the data: ancillas are |0_L> except in Box 2, where a |+_L> ancilla also
reads out the data's logical A.  An X error on the data flips the ancilla
outcomes through C-Z; a Z error on the data does so through C-X.

Ancilla quality per box:
    Box 1   unverified |0_L>
    Box 2   level-1 |+_L>   (checked against X errors, the ones that spread)
    Box 3   level-2 |0_L>
    Box 4   level-2 |0_L> passed through Box 3_Z first
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .noise import NoiseParams, sample_fault
from .pauli import Circuit, CircuitBuilder, PauliFrame, PauliString, propagate_frame
from .stages import Stage, flatten
from .steane import ROW_MASKS, append_encode_plus, append_encode_zero

BOX_KINDS = (1, 2, 3, 4)


def append_box(b: CircuitBuilder, kind: int, a: str, data: Sequence[int],
               inputs: list, label: str, tag: str = "") -> list:
    """Append Box ``kind`` of type ``a`` acting on ``data``.

    Ancillas that come from other stages are appended to ``inputs``.
    Returns the ancilla's measurement registers.
    """
    if a not in ("X", "Z"):
        raise ValueError("box type must be 'X' or 'Z'")
    anc = b.alloc(7)
    if kind == 1:
        append_encode_zero(b, anc)
    else:
        inputs.append((ancilla_stage(kind), anc, label))
    for j in range(7):
        if a == "X":
            b.cnot(anc[j], data[j])
        else:
            b.cz(anc[j], data[j])
    regs = [b.measure(q, "X") for q in anc]
    tag = tag or f"box{kind}{a}"
    for m in ROW_MASKS:
        b.check([regs[j] for j in range(7) if m >> j & 1], tag)
    if kind == 2:
        b.check(regs, tag)
    return regs


def ancilla_stage(kind: int) -> Stage:
    return {2: plus1, 3: zero2, 4: zero3}[kind]()


@functools.lru_cache(maxsize=None)
def plus1() -> Stage:
    """|+_L> checked against X errors by Box 1_Z."""
    b = CircuitBuilder()
    data = b.alloc(7)
    append_encode_plus(b, data)
    inputs: list = []
    append_box(b, 1, "Z", data, inputs, "box1")
    return Stage("plus1", b.build(), tuple(inputs), data, "plus")


@functools.lru_cache(maxsize=None)
def zero1() -> Stage:
    """|0_L> checked against Z errors by Box 1_X."""
    b = CircuitBuilder()
    data = b.alloc(7)
    append_encode_zero(b, data)
    inputs: list = []
    append_box(b, 1, "X", data, inputs, "box1")
    return Stage("zero1", b.build(), tuple(inputs), data, "zero")


def _verified(name: str, source: Callable[[], Stage], boxes, state: str) -> Stage:
    b = CircuitBuilder()
    data = b.alloc(7)
    inputs: list = [(source(), data, "data")]
    for kind, a in boxes:
        append_box(b, kind, a, data, inputs, f"box{kind}{a}")
    return Stage(name, b.build(), tuple(inputs), data, state)


@functools.lru_cache(maxsize=None)
def plus2() -> Stage:
    """Level-2 |+_L>: level-1 |+_L> followed by Box 2_X."""
    return _verified("plus2", plus1, [(2, "X")], "plus")


@functools.lru_cache(maxsize=None)
def zero2() -> Stage:
    """Level-2 |0_L>: level-1 |0_L> followed by Box 2_Z."""
    return _verified("zero2", zero1, [(2, "Z")], "zero")


@functools.lru_cache(maxsize=None)
def zero3() -> Stage:
    """Box 4's ancilla: level-2 |0_L> with residual X errors screened by Box 3_Z."""
    return _verified("zero3", zero2, [(3, "Z")], "zero")


@functools.lru_cache(maxsize=None)
def plus4() -> Stage:
    """Boundary qubit: level-2 |+_L> checked by Box 4_Z then Box 4_X."""
    return _verified("plus4", plus2, [(4, "Z"), (4, "X")], "plus")


# ------------------------------------------------------------ box specs

@dataclass(frozen=True)
class BoxSpec:
    """A box as a self-contained circuit.

    Data block is qubits 0-6 and is never prepared or measured here; the
    circuit includes the full (flattened) preparation of the internal
    ancillas.
    """

    kind: int
    a_type: str
    circuit: Circuit

    @property
    def data(self) -> tuple:
        return tuple(range(7))

    def accept_predicate(self, flips: int) -> bool:
        return self.circuit.accepts(flips)


@dataclass(frozen=True)
class VerificationOutcome:
    accepted: bool
    consumed_qubits: int
    consumed_gates: int
    consumed_measurements: int = 0


@functools.lru_cache(maxsize=None)
def box_stage(kind: int, a: str) -> Stage:
    b = CircuitBuilder()
    data = b.alloc(7)
    inputs: list = []
    append_box(b, kind, a, data, inputs, f"box{kind}{a}")
    return Stage(f"box{kind}{a}", b.build(), tuple(inputs), data, "code")


def _build(kind: int, a: str) -> BoxSpec:
    if kind not in BOX_KINDS:
        raise ValueError(f"no Box {kind}")
    return BoxSpec(kind, a, flatten(box_stage(kind, a)).circuit)


def build_box1(a: str) -> BoxSpec:
    return _build(1, a)


def build_box2(a: str) -> BoxSpec:
    return _build(2, a)


def build_box3(a: str) -> BoxSpec:
    return _build(3, a)


def build_box4(a: str) -> BoxSpec:
    return _build(4, a)


# ------------------------------------------------------ single attempts

def sample_circuit_faults(circuit: Circuit, noise: NoiseParams, rng: np.random.Generator) -> dict:
    faults = {}
    for loc in circuit.locations:
        cls = loc.site_class
        if cls is None:
            continue
        f = sample_fault(cls, noise, rng)
        if f is not None:
            faults[loc.site_id] = f
    return faults


def run_once(stage: Stage, noise: NoiseParams, rng: np.random.Generator):
    """One flattened attempt of ``stage``: (output frame, outcome, full frame)."""
    fs = flatten(stage)
    circ = fs.circuit
    frame = propagate_frame(circ, None, sample_circuit_faults(circ, noise, rng), rng)
    c = circ.count()
    outcome = VerificationOutcome(circ.accepts(frame.flip_mask), c["preps"], c["gates"],
                                  c["measurements"])
    return frame.pauli.restrict(fs.output), outcome, frame


def prepare_level2_plus(noise: NoiseParams, rng: np.random.Generator):
    block, outcome, _ = run_once(plus2(), noise, rng)
    return block, outcome


def prepare_level2_zero(noise: NoiseParams, rng: np.random.Generator):
    block, outcome, _ = run_once(zero2(), noise, rng)
    return block, outcome
