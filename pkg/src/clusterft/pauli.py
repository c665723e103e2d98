"""Phaseless Pauli algebra, circuits, and error-frame propagation.

A Pauli on ``n`` qubits is stored as two integer bitmasks: bit ``q`` of ``x``
is set when qubit ``q`` carries an X component, bit ``q`` of ``z`` when it
carries a Z component (both set means Y).  Phases are dropped everywhere.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

ONE_QUBIT_GATES = frozenset({"H", "S", "SDG", "X", "Z"})
TWO_QUBIT_GATES = frozenset({"CZ", "CNOT", "CH"})
GATE_KINDS = ONE_QUBIT_GATES | TWO_QUBIT_GATES
SELF_INVERSE = frozenset({"H", "X", "Z", "CZ", "CNOT"})


class DimensionError(ValueError):
    pass


class UnsupportedGateError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    n: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        full = (1 << self.n) - 1
        if self.n < 0 or self.x & ~full or self.z & ~full:
            raise DimensionError(f"masks do not fit in {self.n} qubits")

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n)

    @classmethod
    def single(cls, n: int, q: int, kind: str) -> "PauliString":
        bit = 1 << q
        x = bit if kind in "XY" else 0
        z = bit if kind in "ZY" else 0
        return cls(n, x, z)

    @classmethod
    def from_str(cls, s: str) -> "PauliString":
        """Parse ``"XIZY"``; character ``i`` acts on qubit ``i``."""
        x = z = 0
        for q, c in enumerate(s):
            if c not in "IXYZ_":
                raise ValueError(f"bad Pauli character {c!r}")
            if c in "XY":
                x |= 1 << q
            if c in "ZY":
                z |= 1 << q
        return cls(len(s), x, z)

    def __str__(self) -> str:
        return "".join("IXZY"[self.code(q)] for q in range(self.n))

    def __mul__(self, other: "PauliString") -> "PauliString":
        return compose(self, other)

    def code(self, q: int) -> int:
        """2-bit code of qubit ``q``: 0=I, 1=X, 2=Z, 3=Y."""
        return ((self.x >> q) & 1) | (((self.z >> q) & 1) << 1)

    def is_identity(self) -> bool:
        return not (self.x or self.z)

    def commutes(self, other: "PauliString") -> bool:
        return _parity((self.x & other.z) ^ (self.z & other.x)) == 0

    def restrict(self, qubits: Sequence[int]) -> "PauliString":
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x >> q) & 1) << i
            z |= ((self.z >> q) & 1) << i
        return PauliString(len(qubits), x, z)

    def embed(self, n: int, qubits: Sequence[int]) -> "PauliString":
        """Place this (len(qubits)-qubit) Pauli on ``qubits`` of an n-qubit register."""
        if len(qubits) != self.n:
            raise DimensionError("qubit list does not match Pauli size")
        x = z = 0
        for i, q in enumerate(qubits):
            x |= ((self.x >> i) & 1) << q
            z |= ((self.z >> i) & 1) << q
        return PauliString(n, x, z)


def _parity(v: int) -> int:
    return bin(v).count("1") & 1


def compose(a: PauliString, b: PauliString) -> PauliString:
    if a.n != b.n:
        raise DimensionError(f"cannot compose {a.n}- and {b.n}-qubit Paulis")
    return PauliString(a.n, a.x ^ b.x, a.z ^ b.z)


def weight(p: PauliString) -> int:
    return bin(p.x | p.z).count("1")


@dataclass(frozen=True)
class CliffordGate:
    """A gate from the transversal set.  ``CH`` is the one non-Clifford kind."""

    kind: str
    qubits: tuple

    def __post_init__(self):
        object.__setattr__(self, "qubits", tuple(int(q) for q in self.qubits))
        if self.kind not in GATE_KINDS:
            raise ValueError(f"unknown gate {self.kind!r}")
        arity = 1 if self.kind in ONE_QUBIT_GATES else 2
        if len(self.qubits) != arity:
            raise ValueError(f"{self.kind} takes {arity} qubit(s)")
        if arity == 2 and self.qubits[0] == self.qubits[1]:
            raise ValueError("two-qubit gate needs distinct qubits")

    @property
    def is_clifford(self) -> bool:
        return self.kind != "CH"


def _conj_codes(kind: str, a: int, b: int = 0) -> tuple[int, int]:
    """Conjugate 2-bit codes (a on first qubit, b on second) through a gate."""
    xa, za, xb, zb = a & 1, a >> 1, b & 1, b >> 1
    if kind == "H":
        xa, za = za, xa
    elif kind in ("S", "SDG"):
        za ^= xa
    elif kind == "CNOT":
        xb ^= xa
        za ^= zb
    elif kind == "CZ":
        za ^= xb
        zb ^= xa
    return xa | (za << 1), xb | (zb << 1)


def conjugate(gate: CliffordGate, p: PauliString) -> PauliString:
    """Return ``G P G^dagger`` up to phase."""
    if gate.kind == "CH":
        raise UnsupportedGateError("CH is not Clifford; use ch_twirl")
    for q in gate.qubits:
        if q >= p.n:
            raise DimensionError(f"gate qubit {q} outside {p.n}-qubit Pauli")
    qa = gate.qubits[0]
    qb = gate.qubits[1] if len(gate.qubits) == 2 else None
    a = p.code(qa)
    b = p.code(qb) if qb is not None else 0
    na, nb = _conj_codes(gate.kind, a, b)
    x, z = p.x, p.z
    x = (x & ~(1 << qa)) | ((na & 1) << qa)
    z = (z & ~(1 << qa)) | ((na >> 1) << qa)
    if qb is not None:
        x = (x & ~(1 << qb)) | ((nb & 1) << qb)
        z = (z & ~(1 << qb)) | ((nb >> 1) << qb)
    return PauliString(p.n, x, z)


@functools.lru_cache(maxsize=None)
def ch_table() -> tuple:
    """Pauli-transfer table of controlled-H.

    Entry ``c`` (2-qubit code ``control + 4*target``) lists ``(out_code, prob)``
    pairs from the Pauli-basis expansion of ``CH P CH^dagger``.
    """
    from .oracle import conjugate_exact

    table = []
    for code in range(16):
        p = PauliString(2, (code & 1) | (((code >> 2) & 1) << 1),
                        ((code >> 1) & 1) | (((code >> 3) & 1) << 1))
        terms = conjugate_exact(CliffordGate("CH", (0, 1)), p)
        row = []
        for q, coeff in terms:
            prob = abs(coeff) ** 2
            if prob > 1e-12:
                row.append((q.code(0) + 4 * q.code(1), prob))
        total = sum(pr for _, pr in row)
        table.append(tuple((c, pr / total) for c, pr in row))
    return tuple(table)


@functools.lru_cache(maxsize=None)
def ch_cumulative() -> np.ndarray:
    """Cumulative twirl probabilities, shape (16 inputs, 16 outputs)."""
    cum = np.zeros((16, 16))
    for i, row in enumerate(ch_table()):
        probs = np.zeros(16)
        for c, pr in row:
            probs[c] = pr
        cum[i] = np.cumsum(probs)
    cum[:, -1] = 1.0
    return cum


def ch_twirl(p: PauliString, rng: np.random.Generator,
             qubits: tuple[int, int] = (0, 1)) -> PauliString:
    """Sample a Pauli from the twirled conjugation of ``p`` by CH on ``qubits``."""
    c, t = qubits
    code = p.code(c) + 4 * p.code(t)
    row = ch_table()[code]
    if len(row) == 1:
        out = row[0][0]
    else:
        u = rng.random()
        acc = 0.0
        out = row[-1][0]
        for c_out, pr in row:
            acc += pr
            if u < acc:
                out = c_out
                break
    return _set_codes(p, c, out & 3, t, out >> 2)


def _set_codes(p: PauliString, qa: int, ca: int, qb: int, cb: int) -> PauliString:
    x, z = p.x, p.z
    for q, c in ((qa, ca), (qb, cb)):
        x = (x & ~(1 << q)) | ((c & 1) << q)
        z = (z & ~(1 << q)) | ((c >> 1) << q)
    return PauliString(p.n, x, z)


# ---------------------------------------------------------------- circuits

@dataclass(frozen=True)
class Location:
    """One fault site.

    ``op`` is a gate kind, ``"PREP"``, ``"MEAS"``, ``"WAIT"``, ``"CORRECT"``
    or ``"CANON"``.  ``CORRECT`` applies ``pauli`` when the XOR of the
    outcomes in ``cond`` equals ``when``; it is classical feed-forward and
    carries no fault.  ``CANON`` does nothing to the state: it rewrites the
    frame on a 7-qubit block to its lightest form up to code stabilizers
    (and logical Z when ``basis`` is "Z", for a block holding |0_L>; cat
    stabilizers when it is "cat"), which matters only ahead of a twirled CH
    gate.
    """

    op: str
    qubits: tuple
    site_id: int
    time_step: int
    basis: str | None = None
    register: int | None = None
    cond: tuple = ()
    when: int = 1
    pauli: PauliString | None = None

    @property
    def gate(self) -> CliffordGate:
        return CliffordGate(self.op, self.qubits)

    @property
    def site_class(self) -> str | None:
        if self.op in ONE_QUBIT_GATES:
            return "one-qubit-gate"
        if self.op in TWO_QUBIT_GATES:
            return "two-qubit-gate"
        return {"PREP": "prep", "MEAS": "measure", "WAIT": "wait"}.get(self.op)


@dataclass(frozen=True)
class Circuit:
    """Time-ordered locations plus post-selection checks.

    Each check is a tuple of register ids whose outcome flips must XOR to 0
    for the run to be accepted.  Check tags name the box a check belongs to.
    """

    n: int
    locations: tuple
    n_registers: int = 0
    checks: tuple = ()
    check_tags: tuple = ()

    def __post_init__(self):
        seen_sites = set()
        busy = set()
        for loc in self.locations:
            if loc.site_id in seen_sites:
                raise ValueError(f"duplicate site_id {loc.site_id}")
            seen_sites.add(loc.site_id)
            for q in loc.qubits:
                if not 0 <= q < self.n:
                    raise DimensionError(f"qubit {q} outside circuit of {self.n}")
                if loc.op not in ("CORRECT", "CANON"):
                    key = (q, loc.time_step)
                    if key in busy:
                        raise ValueError(f"qubit {q} used twice at t={loc.time_step}")
                    busy.add(key)
        if not self.check_tags:
            object.__setattr__(self, "check_tags", ("",) * len(self.checks))

    def accepts(self, flips: int) -> bool:
        """Acceptance predicate over a register flip bitmask."""
        return all(not _parity(flips & _reg_mask(c)) for c in self.checks)

    def count(self) -> dict:
        """Physical resource tally: preps, gates and measurements."""
        out = {"preps": 0, "gates": 0, "measurements": 0}
        for loc in self.locations:
            if loc.op == "PREP":
                out["preps"] += 1
            elif loc.op == "MEAS":
                out["measurements"] += 1
            elif loc.op in GATE_KINDS:
                out["gates"] += 1
        return out

    @property
    def depth(self) -> int:
        return 1 + max((loc.time_step for loc in self.locations), default=-1)


@functools.lru_cache(maxsize=4096)
def _reg_mask(regs: tuple) -> int:
    m = 0
    for r in regs:
        m |= 1 << r
    return m


class CircuitBuilder:
    """ASAP-scheduling circuit builder."""

    def __init__(self, n: int = 0):
        self.n = n
        self._locs: list[Location] = []
        self._free: dict[int, int] = {}
        self._reg_time: dict[int, int] = {}
        self.n_registers = 0
        self.checks: list[tuple] = []
        self.check_tags: list[str] = []

    @classmethod
    def extend(cls, circuit: Circuit) -> "CircuitBuilder":
        """Continue building after the last location of ``circuit``."""
        b = cls(circuit.n)
        for loc in circuit.locations:
            b._locs.append(loc)
            for q in loc.qubits:
                b._free[q] = max(b._free.get(q, 0), loc.time_step + 1)
            if loc.register is not None:
                b._reg_time[loc.register] = loc.time_step
        b.n_registers = circuit.n_registers
        b.checks = list(circuit.checks)
        b.check_tags = list(circuit.check_tags)
        return b

    def alloc(self, k: int) -> tuple:
        qs = tuple(range(self.n, self.n + k))
        self.n += k
        return qs

    def barrier(self, qubits: Iterable[int] = None) -> None:
        """Force later ops on ``qubits`` (default: all) after everything so
        far on those qubits."""
        qs = list(range(self.n) if qubits is None else qubits)
        t = max((self._free.get(q, 0) for q in qs), default=0)
        for q in qs:
            self._free[q] = t

    def _place(self, op, qubits, **kw) -> Location:
        t = max((self._free.get(q, 0) for q in qubits), default=0)
        for r in kw.get("cond", ()):
            t = max(t, self._reg_time[r] + 1)
        loc = Location(op, tuple(qubits), len(self._locs), t, **kw)
        self._locs.append(loc)
        for q in qubits:
            self._free[q] = t + 1
        return loc

    def gate(self, kind: str, *qubits: int) -> None:
        CliffordGate(kind, qubits)
        self._place(kind, qubits)

    def h(self, q):
        self.gate("H", q)

    def s(self, q):
        self.gate("S", q)

    def sdg(self, q):
        self.gate("SDG", q)

    def cnot(self, c, t):
        self.gate("CNOT", c, t)

    def cz(self, a, b):
        self.gate("CZ", a, b)

    def ch(self, c, t):
        self.gate("CH", c, t)

    def prep(self, q: int, basis: str = "Z") -> None:
        self._place("PREP", (q,), basis=basis)

    def measure(self, q: int, basis: str = "X") -> int:
        r = self.n_registers
        self.n_registers += 1
        loc = self._place("MEAS", (q,), basis=basis, register=r)
        self._reg_time[r] = loc.time_step
        return r

    def wait(self, q: int) -> None:
        self._place("WAIT", (q,))

    def correct(self, pauli: PauliString, cond: Sequence[int], when: int = 1) -> None:
        qs = tuple(q for q in range(pauli.n) if (pauli.x | pauli.z) >> q & 1)
        self._place("CORRECT", qs, cond=tuple(cond), when=when,
                    pauli=pauli.restrict(qs))

    def canonicalize(self, block: Sequence[int], basis: str | None = None) -> None:
        t = max(self._free.get(q, 0) for q in block)
        self._locs.append(Location("CANON", tuple(block), len(self._locs), t, basis=basis))

    def check(self, regs: Sequence[int], tag: str = "") -> None:
        self.checks.append(tuple(regs))
        self.check_tags.append(tag)

    def build(self) -> Circuit:
        locs = sorted(self._locs, key=lambda l: (l.time_step, l.site_id))
        return Circuit(self.n, tuple(locs), self.n_registers,
                       tuple(self.checks), tuple(self.check_tags))


# ------------------------------------------------------------ frames

@dataclass
class PauliFrame:
    pauli: PauliString
    flipped_measurements: set = field(default_factory=set)

    @classmethod
    def clean(cls, n: int) -> "PauliFrame":
        return cls(PauliString.identity(n), set())

    @property
    def flip_mask(self) -> int:
        return _reg_mask(tuple(sorted(self.flipped_measurements)))


def _location_pauli(loc: Location, n: int) -> PauliString:
    """Embed a CORRECT location's Pauli into n qubits."""
    return loc.pauli.embed(n, loc.qubits)


def _fault_as_pauli(loc: Location, fault, n: int) -> PauliString | None:
    """Turn an injected fault into an n-qubit Pauli (None for measurement flips)."""
    if isinstance(fault, PauliString):
        if fault.n == n:
            return fault
        return fault.embed(n, loc.qubits)
    if loc.op == "PREP" and fault:
        kind = "X" if loc.basis == "Z" else "Z"
        return PauliString.single(n, loc.qubits[0], kind)
    return None


def propagate_frame(circuit: Circuit, frame: PauliFrame | None = None,
                    injected: Mapping | None = None,
                    rng: np.random.Generator | None = None) -> PauliFrame:
    """Push an error frame through ``circuit``.

    ``injected`` maps site_id to a PauliString (gate/prep/wait sites, either
    full-width or on the site's own qubits) or to ``True`` (flip of a prep or
    measurement).  Faults are composed before the location acts.
    """
    injected = injected or {}
    if frame is None:
        frame = PauliFrame.clean(circuit.n)
    if frame.pauli.n != circuit.n:
        raise DimensionError("frame width does not match circuit")
    valid = {loc.site_id for loc in circuit.locations}
    for k in injected:
        if k not in valid:
            raise KeyError(f"no site {k} in circuit")
    x, z = frame.pauli.x, frame.pauli.z
    flips = set(frame.flipped_measurements)
    for loc in circuit.locations:
        fault = injected.get(loc.site_id)
        op = loc.op
        if op == "PREP":
            q = loc.qubits[0]
            x &= ~(1 << q)
            z &= ~(1 << q)
        if fault is not None and op != "MEAS":
            fp = _fault_as_pauli(loc, fault, circuit.n)
            if fp is not None:
                x ^= fp.x
                z ^= fp.z
        if op == "MEAS":
            q = loc.qubits[0]
            bit = (z >> q) & 1 if loc.basis == "X" else (x >> q) & 1
            if fault is True or (fault is not None and not isinstance(fault, PauliString) and fault):
                bit ^= 1
            if bit:
                flips.add(loc.register)
        elif op == "CORRECT":
            par = sum(1 for r in loc.cond if r in flips) & 1
            if par:
                p = _location_pauli(loc, circuit.n)
                x ^= p.x
                z ^= p.z
        elif op == "CANON":
            x, z = _canon(x, z, loc.qubits, loc.basis)
        elif op == "CH":
            if rng is None:
                rng = np.random.default_rng()
            p = ch_twirl(PauliString(circuit.n, x, z), rng, loc.qubits)
            x, z = p.x, p.z
        elif op in GATE_KINDS:
            p = conjugate(loc.gate, PauliString(circuit.n, x, z))
            x, z = p.x, p.z
    return PauliFrame(PauliString(circuit.n, x, z), flips)


# --------------------------------------------------- exhaustive enumeration

def site_faults(loc: Location) -> list:
    """Every single fault the noise model can place at ``loc``."""
    if loc.op in ONE_QUBIT_GATES or loc.op == "WAIT":
        return [PauliString(1, c & 1, c >> 1) for c in (1, 2, 3)]
    if loc.op in TWO_QUBIT_GATES:
        return [PauliString(2, (c & 1) | ((c >> 2 & 1) << 1),
                            (c >> 1 & 1) | ((c >> 3 & 1) << 1)) for c in range(1, 16)]
    if loc.op in ("PREP", "MEAS"):
        return [True]
    return []


def _compile(circuit: Circuit) -> list:
    prog = []
    for loc in circuit.locations:
        if loc.op == "CORRECT":
            p = _location_pauli(loc, circuit.n)
            prog.append(("CORRECT", _reg_mask(loc.cond), p.x, p.z))
        elif loc.op == "MEAS":
            prog.append(("MX" if loc.basis == "X" else "MZ", loc.qubits[0], 1 << loc.register))
        elif loc.op == "CANON":
            prog.append(("CANON", loc.basis) + loc.qubits)
        else:
            prog.append((loc.op,) + loc.qubits)
    return prog


def _run_branching(prog, start: int, states: dict, n: int) -> dict:
    """Deterministic propagation over a distribution of (x, z, flips) states.

    Branches at CH gates according to the twirl table; probabilities of
    identical states are merged.
    """
    table = ch_table()
    for step in prog[start:]:
        op = step[0]
        if op == "CH":
            c, t = step[1], step[2]
            new: dict = {}
            for (x, z, f), pr in states.items():
                code = ((x >> c) & 1) | (((z >> c) & 1) << 1) | \
                       (((x >> t) & 1) << 2) | (((z >> t) & 1) << 3)
                for out, po in table[code]:
                    nx = (x & ~((1 << c) | (1 << t))) | ((out & 1) << c) | (((out >> 2) & 1) << t)
                    nz = (z & ~((1 << c) | (1 << t))) | (((out >> 1) & 1) << c) | (((out >> 3) & 1) << t)
                    key = (nx, nz, f)
                    new[key] = new.get(key, 0.0) + pr * po
            states = new
            continue
        new = {}
        for (x, z, f), pr in states.items():
            x, z, f = _step(step, x, z, f)
            key = (x, z, f)
            new[key] = new.get(key, 0.0) + pr
        states = new
    return states


def _canon(x: int, z: int, block, basis=None) -> tuple:
    from .steane import reduce_flips

    bx = bz = 0
    for j, q in enumerate(block):
        bx |= (x >> q & 1) << j
        bz |= (z >> q & 1) << j
    if basis == "cat":
        # stabilizers of a 7-qubit cat: X on all, Z on any pair
        if bin(bx).count("1") > 3:
            bx ^= 0x7F
        bz = _parity(bz)
    else:
        bx = reduce_flips(bx)
        bz = reduce_flips(bz, with_logical=basis == "Z")
    for j, q in enumerate(block):
        x = (x & ~(1 << q)) | ((bx >> j & 1) << q)
        z = (z & ~(1 << q)) | ((bz >> j & 1) << q)
    return x, z


def _step(step, x, z, f):
    op = step[0]
    if op == "CANON":
        x, z = _canon(x, z, step[2:], step[1])
    elif op == "CNOT":
        c, t = step[1], step[2]
        x ^= ((x >> c) & 1) << t
        z ^= ((z >> t) & 1) << c
    elif op == "CZ":
        a, b = step[1], step[2]
        za = ((x >> b) & 1) << a
        zb = ((x >> a) & 1) << b
        z ^= za ^ zb
    elif op == "H":
        q = step[1]
        bx, bz = (x >> q) & 1, (z >> q) & 1
        x = (x & ~(1 << q)) | (bz << q)
        z = (z & ~(1 << q)) | (bx << q)
    elif op == "S" or op == "SDG":
        q = step[1]
        z ^= ((x >> q) & 1) << q
    elif op == "PREP":
        q = step[1]
        x &= ~(1 << q)
        z &= ~(1 << q)
    elif op == "MX":
        if (z >> step[1]) & 1:
            f ^= step[2]
    elif op == "MZ":
        if (x >> step[1]) & 1:
            f ^= step[2]
    elif op == "CORRECT":
        if _parity(f & step[1]):
            x ^= step[2]
            z ^= step[3]
    return x, z, f


def enumerate_single_faults(circuit: Circuit):
    """Yield ``(location, fault, outcomes)`` for every single fault.

    ``outcomes`` maps ``(x, z, flip_mask)`` to probability; it has more than
    one entry only when the fault reaches a CH gate.
    """
    prog = _compile(circuit)
    for i, loc in enumerate(circuit.locations):
        for fault in site_faults(loc):
            x = z = f = 0
            if loc.op == "MEAS":
                f = 1 << loc.register
                x, z, f = 0, 0, f
                # measurement itself is noiseless apart from the flip
                states = {(x, z, f): 1.0}
                yield loc, fault, _run_branching(prog, i + 1, states, circuit.n)
                continue
            if loc.op == "PREP":
                q = loc.qubits[0]
                if loc.basis == "Z":
                    x = 1 << q
                else:
                    z = 1 << q
                states = {(x, z, 0): 1.0}
                yield loc, fault, _run_branching(prog, i + 1, states, circuit.n)
                continue
            fp = _fault_as_pauli(loc, fault, circuit.n)
            states = {(fp.x, fp.z, 0): 1.0}
            yield loc, fault, _run_branching(prog, i, states, circuit.n)


def _initial_state(loc: Location, fault, n: int) -> tuple:
    if loc.op == "MEAS":
        return 0, 0, 1 << loc.register
    if loc.op == "PREP":
        q = loc.qubits[0]
        return (1 << q, 0, 0) if loc.basis == "Z" else (0, 1 << q, 0)
    fp = _fault_as_pauli(loc, fault, n)
    return fp.x, fp.z, 0


def single_fault_effects(circuit: Circuit, output: Sequence[int] = ()):
    """Same contract as :func:`enumerate_single_faults`, but the returned
    frames are restricted to the ``output`` qubits.

    Locations after the last CH gate are handled by one backward pass that
    tracks, per qubit, which registers and output frame bits an X or a Z
    error flips.  Faults before that point are pushed forward (with CH
    branching) up to the cut and then finished with the same table.
    """
    n, R = circuit.n, circuit.n_registers
    locs = circuit.locations
    prog = _compile(circuit)
    last_ch = max((i for i, l in enumerate(locs) if l.op in ("CH", "CANON")), default=-1)
    sx = [0] * n
    sz = [0] * n
    rs = [1 << r for r in range(R)]
    out_index = {}
    for k, q in enumerate(output):
        sx[q] = 1 << (R + 2 * k)
        sz[q] = 1 << (R + 2 * k + 1)
        out_index[k] = q
    reg_all = (1 << R) - 1

    def key(eff: int) -> tuple:
        x = z = 0
        hi = eff >> R
        k = 0
        while hi:
            if hi & 1:
                x |= 1 << out_index[k]
            if hi & 2:
                z |= 1 << out_index[k]
            hi >>= 2
            k += 1
        return x, z, eff & reg_all

    def sens(q, x, z):
        return (sx[q] if x else 0) ^ (sz[q] if z else 0)

    late: dict = {}
    for i in range(len(locs) - 1, last_ch, -1):
        loc = locs[i]
        op = loc.op
        qs = loc.qubits
        if op == "PREP":
            q = qs[0]
            late[i] = [(True, sx[q] if loc.basis == "Z" else sz[q])]
            sx[q] = sz[q] = 0
            continue
        if op == "MEAS":
            q = qs[0]
            r = loc.register
            late[i] = [(True, rs[r])]
            if loc.basis == "X":
                sz[q] ^= rs[r]
            else:
                sx[q] ^= rs[r]
            continue
        if op == "CORRECT":
            p = loc.pauli
            s = 0
            for j, q in enumerate(qs):
                s ^= sens(q, p.x >> j & 1, p.z >> j & 1)
            for r in loc.cond:
                rs[r] ^= s
            continue
        if op == "H":
            q = qs[0]
            sx[q], sz[q] = sz[q], sx[q]
        elif op in ("S", "SDG"):
            q = qs[0]
            sx[q] ^= sz[q]
        elif op == "CNOT":
            c, t = qs
            sx[c] ^= sx[t]
            sz[t] ^= sz[c]
        elif op == "CZ":
            a, b = qs
            sx[a] ^= sz[b]
            sx[b] ^= sz[a]
        effs = []
        for fault in site_faults(loc):
            e = 0
            for j, q in enumerate(qs):
                e ^= sens(q, fault.x >> j & 1, fault.z >> j & 1)
            effs.append((fault, e))
        late[i] = effs

    early_prog = prog[:last_ch + 1]
    for i, loc in enumerate(locs):
        if i > last_ch:
            for fault, e in late.get(i, ()):
                yield loc, fault, {key(e): 1.0}
            continue
        for fault in site_faults(loc):
            start = i + 1 if loc.op in ("MEAS", "PREP") else i
            states = _run_branching(early_prog, start, {_initial_state(loc, fault, n): 1.0}, n)
            outs: dict = {}
            for (x, z, f), pr in states.items():
                e = 0
                while f:
                    r = (f & -f).bit_length() - 1
                    e ^= rs[r]
                    f &= f - 1
                xx = x
                while xx:
                    q = (xx & -xx).bit_length() - 1
                    e ^= sx[q]
                    xx &= xx - 1
                zz = z
                while zz:
                    q = (zz & -zz).bit_length() - 1
                    e ^= sz[q]
                    zz &= zz - 1
                k = key(e)
                outs[k] = outs.get(k, 0.0) + pr
            yield loc, fault, outs
