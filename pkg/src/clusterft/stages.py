"""Preparation stages: circuit fragments fed by other post-selected stages.

A stage's circuit leaves its input blocks unprepared; their initial frames
are accepted outputs of the input stages.  ``flatten`` inlines the whole
dependency tree into one circuit, which is what a single attempt with no
intermediate retries looks like.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

from .pauli import Circuit, Location


@dataclass(frozen=True, eq=False)
class Stage:
    """``inputs`` holds ``(stage, qubits, label)`` triples; ``output`` is the
    emitted block (empty for stages consumed whole, such as scenarios).
    ``output_state`` names the ideal state of the output block."""

    name: str
    circuit: Circuit
    inputs: tuple = ()
    output: tuple = ()
    output_state: str = "code"

    def own_cost(self) -> dict:
        return self.circuit.count()

    def dependencies(self) -> list:
        """Every stage reachable from this one, inputs before users."""
        seen: dict = {}

        def visit(s):
            for sub, _, _ in s.inputs:
                visit(sub)
            seen.setdefault(s.name, s)

        visit(self)
        return list(seen.values())


@dataclass(frozen=True)
class FlatStage:
    circuit: Circuit
    output: tuple
    # (label path, qubits) of every block that came from an input stage
    blocks: tuple


@functools.lru_cache(maxsize=None)
def flatten(stage: Stage) -> FlatStage:
    locs: list[Location] = []
    checks: list = []
    tags: list = []
    blocks: list = []
    n_q = stage.circuit.n
    n_r = stage.circuit.n_registers
    t0 = 0
    subs = []
    for sub, qubits, label in stage.inputs:
        fs = flatten(sub)
        qmap = {}
        for j, q in enumerate(fs.output):
            qmap[q] = qubits[j]
        for q in range(fs.circuit.n):
            if q not in qmap:
                qmap[q] = n_q
                n_q += 1
        subs.append((fs, qmap, n_r, label))
        n_r += fs.circuit.n_registers
        t0 = max(t0, fs.circuit.depth)
    site = 0
    for fs, qmap, r_off, label in subs:
        for loc in fs.circuit.locations:
            locs.append(_relabel(loc, qmap, r_off, site, 0))
            site += 1
        checks.extend(tuple(r + r_off for r in c) for c in fs.circuit.checks)
        tags.extend(f"{label}/{t}" if t else label for t in fs.circuit.check_tags)
        blocks.append((label, tuple(qmap[q] for q in fs.output)))
        blocks.extend((f"{label}/{lab}", tuple(qmap[q] for q in qs)) for lab, qs in fs.blocks)
    ident = {q: q for q in range(stage.circuit.n)}
    for loc in stage.circuit.locations:
        locs.append(_relabel(loc, ident, 0, site, t0))
        site += 1
    checks.extend(stage.circuit.checks)
    tags.extend(stage.circuit.check_tags)
    locs.sort(key=lambda l: (l.time_step, l.site_id))
    circ = Circuit(n_q, tuple(locs), n_r, tuple(checks), tuple(tags))
    return FlatStage(circ, stage.output, tuple(blocks))


def _relabel(loc: Location, qmap: dict, r_off: int, site: int, t_off: int) -> Location:
    return Location(
        op=loc.op,
        qubits=tuple(qmap[q] for q in loc.qubits),
        site_id=site,
        time_step=loc.time_step + t_off,
        basis=loc.basis,
        register=None if loc.register is None else loc.register + r_off,
        cond=tuple(r + r_off for r in loc.cond),
        when=loc.when,
        pauli=loc.pauli,
    )
