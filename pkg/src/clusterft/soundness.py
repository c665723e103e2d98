"""Exhaustive single-fault checks.

Every site of a circuit gets every one of its faults, one at a time; an
accepted outcome must leave at most one effective error on the output.
For the measured scenarios the criterion is applied to the final flip
word, after the same stabilizer reduction and neighbour fold that the
Monte Carlo scoring uses.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from . import boxes, cluster, steane
from .pauli import PauliString, single_fault_effects
from .stages import Stage, flatten

PIPELINES = ("plus2", "zero2", "zero3", "plus4", "pi8")


@dataclass
class SoundnessReport:
    name: str
    faults: int = 0                 # (site, fault) pairs tried
    accepted_outcomes: int = 0
    counterexamples: list = field(default_factory=list)
    seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def line(self) -> str:
        verdict = "PASS" if self.ok else "FAIL"
        return (f"{verdict} {self.name}: {self.faults} faults, {self.accepted_outcomes} accepted "
                f"outcomes, {len(self.counterexamples)} counterexamples ({self.seconds:.1f}s)")


def pipeline_stage(name: str) -> Stage:
    if name == "pi8":
        return cluster.pi8_stage()
    return getattr(boxes, name)()


def check_pipeline(name: str, keep: int = 10) -> SoundnessReport:
    """Single faults anywhere in a preparation, including all of its inputs."""
    t0 = time.perf_counter()
    stage = pipeline_stage(name)
    fs = flatten(stage)
    circ = fs.circuit
    rep = SoundnessReport(name)
    for loc, fault, outs in single_fault_effects(circ, fs.output):
        rep.faults += 1
        for (x, z, f), _ in outs.items():
            if not circ.accepts(f):
                continue
            rep.accepted_outcomes += 1
            p = PauliString(circ.n, x, z).restrict(fs.output)
            if steane.effective_weight(p, stage.output_state) > 1 and len(rep.counterexamples) < keep:
                rep.counterexamples.append((loc, fault, p))
    rep.seconds = time.perf_counter() - t0
    return rep


def _bits(v: int, qubits) -> int:
    return sum(((v >> q) & 1) << j for j, q in enumerate(qubits))


def check_scenario(case: str, keep: int = 10) -> SoundnessReport:
    """Single faults in a scenario's preparation, scored on the measurement.

    The final rotation and readout are noiseless here; one fault there flips
    a single outcome and cannot matter.
    """
    t0 = time.perf_counter()
    fs = flatten(cluster.scenario_stage(case))
    circ = fs.circuit
    blocks = dict(fs.blocks)
    nbs = [blocks["right"]] if case == "iii" else [blocks[f"node{v}"] for v in range(1, 5)]
    out = tuple(fs.output) + sum(nbs, ())
    rotations = cluster.scenario_rotations(case)
    rep = SoundnessReport(f"scenario {case}")
    for loc, fault, outs in single_fault_effects(circ, out):
        rep.faults += 1
        for (x, z, f), _ in outs.items():
            if not circ.accepts(f):
                continue
            rep.accepted_outcomes += 1
            zm = _bits(z, fs.output)
            xm = _bits(x, fs.output)
            for nb in nbs:
                if steane.is_logical_error(_bits(x, nb), "decoder-failure"):
                    zm ^= steane.ALL_ONES
            for rot in rotations:
                w = zm ^ (xm if rot == "S" else 0)
                if steane.is_logical_error(steane.reduce_flips(w)) and len(rep.counterexamples) < keep:
                    rep.counterexamples.append((loc, fault, rot, w))
    rep.seconds = time.perf_counter() - t0
    return rep


def run_all(progress=None) -> list:
    reports = []
    for name in PIPELINES:
        reports.append(check_pipeline(name))
        if progress:
            progress(reports[-1])
    for case in cluster.SCENARIOS:
        reports.append(check_scenario(case))
        if progress:
            progress(reports[-1])
    return reports
