"""Logical cluster states, the pi/8 qubit, layer connection and the three
measured scenarios (H gate, pi/8 gate, teleport across a non-verified C-Z)."""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .boxes import append_box, plus2, plus4, sample_circuit_faults, zero2
from .noise import NoiseParams, sample_fault
from .pauli import CircuitBuilder, PauliFrame, PauliString, conjugate, CliffordGate, propagate_frame
from .stages import Stage, flatten
from .steane import append_encode_pi8, is_logical_error

ROTATIONS = ("I", "H", "S", "SH")
SCENARIOS = ("i", "ii", "iii")


@dataclass(frozen=True)
class ClusterGraph:
    """Logical qubits (``kinds``: "plus" or "pi8") joined by C-Z edges.

    ``edges`` holds ``(u, v, kind)`` with kind "verified" or "non-verified";
    ``levels`` gives each node's verification level (2 or 4).
    """

    kinds: tuple
    edges: tuple = ()
    levels: tuple = ()

    def __post_init__(self):
        if not self.levels:
            object.__setattr__(self, "levels", (2,) * len(self.kinds))
        n = len(self.kinds)
        seen = set()
        for u, v, kind in self.edges:
            if u == v:
                raise ValueError("self-loop")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError("edge endpoint out of range")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise ValueError("multi-edge")
            seen.add(key)
            if kind == "non-verified" and (self.levels[u] < 4 or self.levels[v] < 4):
                raise ValueError("non-verified edges join level-4 nodes only")
            if kind not in ("verified", "non-verified"):
                raise ValueError(f"bad edge kind {kind!r}")
        for k in self.kinds:
            if k not in ("plus", "pi8"):
                raise ValueError(f"bad node kind {k!r}")

    @classmethod
    def star(cls, branches: int, center: str = "plus") -> "ClusterGraph":
        return cls((center,) + ("plus",) * branches,
                   tuple((0, i, "verified") for i in range(1, branches + 1)))

    def neighbors(self, v: int) -> list:
        return sorted({b if a == v else a for a, b, _ in self.edges if v in (a, b)})


@dataclass(frozen=True)
class ScenarioSpec:
    case: str
    p_e: float = 0.0
    trials: int = 100_000
    metric: str = "raw-weight"

    def __post_init__(self):
        if self.case not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}")


@functools.lru_cache(maxsize=None)
def pi8_stage() -> Stage:
    """Z(-pi/4)|+_L>: |pi/8_L> from a level-2 |0_L>, Box 3_X, logical HS, Box 3_X.

    Logical S is transversal S-dagger on this code.  The |0_L> input must be
    checked for X errors first: a weight-2 X error there is a logical X times
    a single error, which the twirled C-H turns into an undetected logical
    error on the output.
    """
    b = CircuitBuilder()
    block = b.alloc(7)
    cat = b.alloc(7)
    append_encode_pi8(b, block, cat, encode=False)
    inputs: list = [(zero2(), block, "zero")]
    append_box(b, 3, "X", block, inputs, "box3X.1")
    for q in block:
        b.sdg(q)
    for q in block:
        b.h(q)
    append_box(b, 3, "X", block, inputs, "box3X.2")
    return Stage("pi8", b.build(), tuple(inputs), block, "code")


def _node_stage(kind: str) -> Stage:
    return plus2() if kind == "plus" else pi8_stage()


@functools.lru_cache(maxsize=None)
def subcluster_stage(graph: ClusterGraph, measured: int = 0) -> Stage:
    """Verified sub-cluster: each C-Z edge (sorted) is followed by Box 3_X on
    its lower then its higher endpoint.  Emits the ``measured`` node's block."""
    if any(k != "verified" for _, _, k in graph.edges):
        raise ValueError("sub-clusters use verified edges only")
    b = CircuitBuilder()
    blocks = [b.alloc(7) for _ in graph.kinds]
    inputs: list = [(_node_stage(k), blocks[v], f"node{v}") for v, k in enumerate(graph.kinds)]
    for u, v, _ in sorted((min(u, v), max(u, v), k) for u, v, k in graph.edges):
        for j in range(7):
            b.cz(blocks[u][j], blocks[v][j])
        for w in (u, v):
            append_box(b, 3, "X", blocks[w], inputs, f"box3:{w}:{u}-{v}", tag=f"node{w}")
    name = f"subcluster{graph.kinds}{graph.edges}@{measured}"
    return Stage(name, b.build(), tuple(inputs), blocks[measured], "code")


@functools.lru_cache(maxsize=None)
def connection_stage() -> Stage:
    """Two level-4 boundary qubits joined by a non-verified transversal C-Z;
    emits the left block."""
    b = CircuitBuilder()
    left, right = b.alloc(7), b.alloc(7)
    for j in range(7):
        b.cz(left[j], right[j])
    inputs = ((plus4(), left, "left"), (plus4(), right, "right"))
    return Stage("connection", b.build(), inputs, left, "code")


def scenario_stage(case: str) -> Stage:
    if case == "i":
        return subcluster_stage(ClusterGraph.star(4, "plus"))
    if case == "ii":
        return subcluster_stage(ClusterGraph.star(4, "pi8"))
    if case == "iii":
        return connection_stage()
    raise ValueError(f"scenario must be one of {SCENARIOS}")


def scenario_rotations(case: str) -> tuple:
    """Rotations a scenario's final measurement may use (chosen uniformly)."""
    return ("I", "S") if case == "ii" else ("I",)


@dataclass(frozen=True)
class ExecutableScenario:
    case: str
    stage: Stage
    rotations: tuple


def scenario_circuit(case: str) -> ExecutableScenario:
    return ExecutableScenario(case, scenario_stage(case), scenario_rotations(case))


def append_transversal_measure(b: CircuitBuilder, block, rotation: str) -> list:
    """Rotate each qubit then read it out in the X basis."""
    if rotation not in ROTATIONS:
        raise ValueError(f"rotation must be one of {ROTATIONS}")
    for gate in {"I": (), "H": ("H",), "S": ("SDG",), "SH": ("H", "SDG")}[rotation]:
        for q in block:
            b.gate(gate, q)
    return [b.measure(q, "X") for q in block]


@functools.lru_cache(maxsize=None)
def measured_scenario(case: str, rotation: str = "I"):
    """Flattened scenario plus its final transversal measurement.

    Returns ``(circuit, flip_registers)``.
    """
    fs = flatten(scenario_stage(case))
    b = CircuitBuilder.extend(fs.circuit)
    regs = append_transversal_measure(b, fs.output, rotation)
    return b.build(), tuple(regs)


# ------------------------------------------------------ scalar operations

def _graph_flat(graph: ClusterGraph):
    return flatten(subcluster_stage(graph, 0))


def prepare_subcluster(graph: ClusterGraph, noise: NoiseParams, rng: np.random.Generator):
    """One attempt at a verified sub-cluster.

    Returns ``(frames, accepted, consumption)``; ``frames[v]`` is node v's
    7-qubit residual Pauli.
    """
    fs = _graph_flat(graph)
    circ = fs.circuit
    frame = propagate_frame(circ, None, sample_circuit_faults(circ, noise, rng), rng)
    blocks = dict(fs.blocks)
    frames = [frame.pauli.restrict(blocks[f"node{v}"]) for v in range(len(graph.kinds))]
    return frames, circ.accepts(frame.flip_mask), circ.count()


def prepare_pi8_qubit(noise: NoiseParams, rng: np.random.Generator):
    fs = flatten(pi8_stage())
    circ = fs.circuit
    frame = propagate_frame(circ, None, sample_circuit_faults(circ, noise, rng), rng)
    return frame.pauli.restrict(fs.output), circ.accepts(frame.flip_mask), circ.count()


def _noisy_gate(kind: str, qubits, p: PauliString, noise: NoiseParams, rng) -> PauliString:
    cls = "two-qubit-gate" if len(qubits) == 2 else "one-qubit-gate"
    f = sample_fault(cls, noise, rng)
    if f is not None:
        p = p * f.embed(p.n, qubits)
    return conjugate(CliffordGate(kind, qubits), p)


def connect_nonverified(left: PauliString, right: PauliString, noise: NoiseParams,
                        rng: np.random.Generator):
    """Transversal C-Z between two blocks; nothing is checked afterwards."""
    p = PauliString(14, left.x | (right.x << 7), left.z | (right.z << 7))
    for j in range(7):
        p = _noisy_gate("CZ", (j, 7 + j), p, noise, rng)
    return p.restrict(range(7)), p.restrict(range(7, 14))


def transversal_measure(block: PauliString, rotation: str, noise: NoiseParams,
                        rng: np.random.Generator):
    """Returns ``(outcome flips as a list of 7 bits, flip word as a mask)``."""
    if rotation not in ROTATIONS:
        raise ValueError(f"rotation must be one of {ROTATIONS}")
    p = block
    for gate in {"I": (), "H": ("H",), "S": ("SDG",), "SH": ("H", "SDG")}[rotation]:
        for q in range(7):
            p = _noisy_gate(gate, (q,), p, noise, rng)
    bits = []
    for q in range(7):
        bit = (p.z >> q) & 1
        if sample_fault("measure", noise, rng):
            bit ^= 1
        bits.append(bit)
    return bits, sum(b << q for q, b in enumerate(bits))


def score(flip_word: int, metric: str = "raw-weight") -> bool:
    return is_logical_error(flip_word, metric)


@dataclass(frozen=True)
class ScenarioLayout:
    """Where the measured block and its |+_L> neighbours sit in the top stage."""

    stage: Stage
    measured: tuple
    neighbors: tuple        # tuple of 7-qubit blocks


def scenario_layout(case: str) -> ScenarioLayout:
    stage = scenario_stage(case)
    labelled = {label: qubits for _, qubits, label in stage.inputs}
    if case == "iii":
        return ScenarioLayout(stage, tuple(labelled["left"]), (tuple(labelled["right"]),))
    nbs = tuple(tuple(labelled[f"node{v}"]) for v in range(1, 5))
    return ScenarioLayout(stage, tuple(labelled["node0"]), nbs)
