"""Vectorised Pauli-frame engine and post-selection pools.

Frames for a batch of ``B`` independent attempts are boolean arrays of
shape ``(n_qubits, B)``; measurement flips are ``(n_registers, B)``.
Locations sharing a time step and an operation run as one numpy call.

A :class:`PoolSet` prepares stage outputs the way the hardware would:
attempts of a stage consume accepted outputs of its input stages, rejected
attempts are thrown away, and every accepted item carries the cost of the
attempts spent on it (including discarded ones and the cost of what they
consumed).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field

import numpy as np

from .noise import NoiseParams, sample_fault_positions
from .pauli import Circuit, ch_cumulative
from .stages import Stage
from .steane import ALL_ONES, N, _reduce_table, is_logical_error

COST_FIELDS = ("preps", "gates", "measurements")

_1Q = ("H", "S", "SDG")
_2Q = ("CNOT", "CZ", "CH")


class PreparationExhausted(RuntimeError):
    pass


# ------------------------------------------------------------- programs

@dataclass(frozen=True)
class Group:
    op: str
    basis: str | None
    a: np.ndarray                       # first (or only) qubit per location
    b: np.ndarray | None = None         # second qubit for two-qubit gates
    regs: np.ndarray | None = None      # registers for MEAS, condition for CORRECT
    sites: tuple = ()
    px: np.ndarray | None = None        # CORRECT: qubits receiving X
    pz: np.ndarray | None = None        # CORRECT: qubits receiving Z


@dataclass(frozen=True)
class Program:
    n: int
    n_registers: int
    groups: tuple
    checks: tuple                       # register index arrays
    check_tags: tuple


def _group_key(loc):
    # CANON must run before the CH it shares a time step with
    return (loc.time_step, 0 if loc.op == "CANON" else 1, loc.op, loc.basis or "")


@functools.lru_cache(maxsize=None)
def compile_circuit(circuit: Circuit) -> Program:
    buckets: dict = {}
    order = []
    for loc in circuit.locations:
        if loc.op in ("CANON", "CORRECT"):
            key = (loc.time_step, 0 if loc.op == "CANON" else 1, loc.op, loc.site_id)
        else:
            key = _group_key(loc)
        if key not in buckets:
            buckets[key] = []
            order.append(key)
        buckets[key].append(loc)
    groups = []
    for key in sorted(order):
        locs = buckets[key]
        op = locs[0].op
        sites = tuple(l.site_id for l in locs)
        if op in _2Q:
            groups.append(Group(op, None, np.array([l.qubits[0] for l in locs]),
                                np.array([l.qubits[1] for l in locs]), sites=sites))
        elif op == "MEAS":
            groups.append(Group(op, locs[0].basis, np.array([l.qubits[0] for l in locs]),
                                regs=np.array([l.register for l in locs]), sites=sites))
        elif op == "CORRECT":
            loc = locs[0]
            p = loc.pauli
            px = np.array([q for j, q in enumerate(loc.qubits) if p.x >> j & 1], dtype=np.int64)
            pz = np.array([q for j, q in enumerate(loc.qubits) if p.z >> j & 1], dtype=np.int64)
            groups.append(Group(op, None, np.array(loc.qubits), regs=np.array(loc.cond),
                                sites=sites, px=px, pz=pz))
        elif op == "CANON":
            groups.append(Group(op, locs[0].basis, np.array(locs[0].qubits), sites=sites))
        else:
            groups.append(Group(op, locs[0].basis, np.array([l.qubits[0] for l in locs]),
                                sites=sites))
    checks = tuple(np.array(c, dtype=np.int64) for c in circuit.checks)
    return Program(circuit.n, circuit.n_registers, tuple(groups), checks, circuit.check_tags)


@dataclass
class FrameBatch:
    x: np.ndarray
    z: np.ndarray
    flips: np.ndarray

    @classmethod
    def clean(cls, n: int, n_registers: int, batch: int) -> "FrameBatch":
        return cls(np.zeros((n, batch), dtype=bool), np.zeros((n, batch), dtype=bool),
                   np.zeros((n_registers, batch), dtype=bool))

    @property
    def batch(self) -> int:
        return self.x.shape[1]


def _site_class(op: str) -> str:
    if op in _1Q:
        return "one-qubit-gate"
    if op in _2Q:
        return "two-qubit-gate"
    return {"PREP": "prep", "MEAS": "measure", "WAIT": "wait"}[op]


def _sample(group: Group, noise: NoiseParams, rng, batch: int):
    """(location index, trial, pauli code) of every fault in a group."""
    cls = _site_class(group.op)
    per = noise.per_pauli(cls)
    k = {"two-qubit-gate": 15, "one-qubit-gate": 3, "wait": 3}.get(cls, 1)
    pos = sample_fault_positions(rng, len(group.a) * batch, per * k)
    if pos.size == 0:
        return None
    codes = rng.integers(1, k + 1, size=pos.size) if k > 1 else np.ones(pos.size, dtype=np.int64)
    return pos // batch, pos % batch, codes


def _apply_codes(fb: FrameBatch, qubits, trials, codes) -> None:
    fb.x[qubits, trials] ^= (codes & 1).astype(bool)
    fb.z[qubits, trials] ^= (codes >> 1 & 1).astype(bool)


def _injected(group: Group, injected: dict):
    """Turn test-injected faults into the (loc, trial, code) triple."""
    locs, trials, codes = [], [], []
    for j, s in enumerate(group.sites):
        for trial, code in injected.get(s, ()):
            locs.append(j)
            trials.append(trial)
            codes.append(code)
    if not locs:
        return None
    return np.array(locs), np.array(trials), np.array(codes)


def _canon(fb: FrameBatch, group: Group) -> None:
    block = group.a
    weights = (1 << np.arange(len(block)))[:, None]
    wx = (fb.x[block] * weights).sum(0)
    wz = (fb.z[block] * weights).sum(0)
    if group.basis == "cat":
        heavy = np.array([bin(v).count("1") > 3 for v in range(128)])
        wx = np.where(heavy[wx], wx ^ ALL_ONES, wx)
        wz = np.bitwise_xor.reduce(fb.z[block], axis=0).astype(np.int64)
    else:
        wx = np.asarray(_reduce_table(False))[wx]
        wz = np.asarray(_reduce_table(group.basis == "Z"))[wz]
    fb.x[block] = (wx[None, :] >> np.arange(len(block))[:, None]) & 1
    fb.z[block] = (wz[None, :] >> np.arange(len(block))[:, None]) & 1


def _ch(fb: FrameBatch, group: Group, rng) -> None:
    cum = ch_cumulative()
    for c, t in zip(group.a, group.b):
        code = (fb.x[c].astype(np.int64) | fb.z[c] << 1 | fb.x[t] << 2 | fb.z[t] << 3)
        hit = np.flatnonzero(code)
        if hit.size == 0:
            continue
        u = rng.random(hit.size)
        out = (u[:, None] >= cum[code[hit]]).sum(1)
        out = np.minimum(out, 15)
        fb.x[c, hit] = out & 1
        fb.z[c, hit] = out >> 1 & 1
        fb.x[t, hit] = out >> 2 & 1
        fb.z[t, hit] = out >> 3 & 1


def run_program(prog: Program, fb: FrameBatch, noise: NoiseParams | None,
                rng: np.random.Generator, injected: dict | None = None) -> FrameBatch:
    """Push ``fb`` through ``prog`` in place.

    Faults come from ``noise`` or, for tests, from ``injected``: site_id ->
    list of ``(trial, code)`` with code ``x0 | z0<<1 | x1<<2 | z1<<3`` (any
    nonzero value flips a prep or measurement).
    """
    B = fb.batch
    for g in prog.groups:
        op = g.op
        if op in ("CANON", "CORRECT"):
            if op == "CANON":
                _canon(fb, g)
            else:
                par = np.bitwise_xor.reduce(fb.flips[g.regs], axis=0)
                if g.px.size:
                    fb.x[g.px] ^= par
                if g.pz.size:
                    fb.z[g.pz] ^= par
            continue
        if injected is not None:
            faults = _injected(g, injected)
        elif noise is not None and noise.p_e > 0:
            faults = _sample(g, noise, rng, B)
        else:
            faults = None
        if op == "PREP":
            fb.x[g.a] = False
            fb.z[g.a] = False
            if faults is not None:
                loc, trial, _ = faults
                target = fb.x if g.basis == "Z" else fb.z
                target[g.a[loc], trial] ^= True
            continue
        if op == "MEAS":
            src = fb.z if g.basis == "X" else fb.x
            fb.flips[g.regs] = src[g.a]
            if faults is not None:
                loc, trial, _ = faults
                fb.flips[g.regs[loc], trial] ^= True
            continue
        if faults is not None:
            loc, trial, codes = faults
            _apply_codes(fb, g.a[loc], trial, codes)
            if op in _2Q:
                _apply_codes(fb, g.b[loc], trial, codes >> 2)
        if op == "CNOT":
            fb.x[g.b] ^= fb.x[g.a]
            fb.z[g.a] ^= fb.z[g.b]
        elif op == "CZ":
            fb.z[g.a] ^= fb.x[g.b]
            fb.z[g.b] ^= fb.x[g.a]
        elif op == "H":
            tmp = fb.x[g.a].copy()
            fb.x[g.a] = fb.z[g.a]
            fb.z[g.a] = tmp
        elif op in ("S", "SDG"):
            fb.z[g.a] ^= fb.x[g.a]
        elif op == "CH":
            _ch(fb, g, rng)
    return fb


def check_results(prog: Program, flips: np.ndarray) -> np.ndarray:
    """(n_checks, B) array, True where a check passed."""
    if not prog.checks:
        return np.ones((0, flips.shape[1]), dtype=bool)
    return np.stack([~np.bitwise_xor.reduce(flips[c], axis=0) for c in prog.checks])


# --------------------------------------------------------------- pools

@dataclass
class Items:
    """Accepted outputs of a stage: frames on the kept qubits plus cost."""

    x: np.ndarray                  # (k, m)
    z: np.ndarray
    cost: np.ndarray               # (m, 3) preps, gates, measurements
    attempts: np.ndarray           # (m,) attempts spent on each item
    exhausted: np.ndarray          # (m,) bool

    @classmethod
    def empty(cls, k: int) -> "Items":
        return cls(np.zeros((k, 0), dtype=bool), np.zeros((k, 0), dtype=bool),
                   np.zeros((0, 3), dtype=np.int64), np.zeros(0, dtype=np.int64),
                   np.zeros(0, dtype=bool))

    def __len__(self):
        return self.x.shape[1]

    def take(self, m: int) -> tuple:
        head = Items(self.x[:, :m], self.z[:, :m], self.cost[:m], self.attempts[:m],
                     self.exhausted[:m])
        tail = Items(self.x[:, m:], self.z[:, m:], self.cost[m:], self.attempts[m:],
                     self.exhausted[m:])
        return head, tail

    @staticmethod
    def concat(parts: list) -> "Items":
        return Items(np.concatenate([p.x for p in parts], 1), np.concatenate([p.z for p in parts], 1),
                     np.concatenate([p.cost for p in parts]), np.concatenate([p.attempts for p in parts]),
                     np.concatenate([p.exhausted for p in parts]))


@dataclass
class AttemptBatch:
    """One batch of attempts of a stage before post-selection."""

    accepted: np.ndarray           # (m,) bool, exhausted inputs count as accepted
    exhausted: np.ndarray          # (m,) bool
    x: np.ndarray                  # (k, m) frames on the kept qubits
    z: np.ndarray
    cost: np.ndarray               # (m, 3)
    checks: np.ndarray             # (n_checks, m) per-check pass
    inputs: dict = field(default_factory=dict)   # label -> Items consumed


@dataclass
class _Carry:
    cost: np.ndarray = field(default_factory=lambda: np.zeros(3, dtype=np.int64))
    attempts: int = 0


def own_cost(stage: Stage) -> np.ndarray:
    c = stage.circuit.count()
    return np.array([c[f] for f in COST_FIELDS], dtype=np.int64)


class PoolSet:
    """Post-selected preparation of stage outputs with per-item accounting.

    ``attempt_cap`` bounds consecutive failed attempts per item; reaching it
    yields an item flagged as exhausted, which taints every consumer.
    """

    def __init__(self, noise: NoiseParams, rng: np.random.Generator,
                 attempt_cap: int = 1000, max_batch: int = 1 << 16):
        self.noise = noise
        self.rng = rng
        self.attempt_cap = attempt_cap
        self.max_batch = max_batch
        self._items: dict = {}
        self._carry: dict = {}
        self._rate: dict = {}
        self.attempt_counts: dict = {}

    def attempt(self, stage: Stage, m: int, keep=None) -> AttemptBatch:
        keep = np.asarray(stage.output if keep is None else keep, dtype=np.int64)
        prog = compile_circuit(stage.circuit)
        fb = FrameBatch.clean(prog.n, prog.n_registers, m)
        cost = np.tile(own_cost(stage), (m, 1))
        exhausted = np.zeros(m, dtype=bool)
        consumed = {}
        for sub, qubits, label in stage.inputs:
            it = self.draw(sub, m)
            q = np.asarray(qubits)
            fb.x[q] = it.x
            fb.z[q] = it.z
            cost += it.cost
            exhausted |= it.exhausted
            consumed[label] = it
        run_program(prog, fb, self.noise, self.rng)
        checks = check_results(prog, fb.flips)
        accepted = checks.all(0) | exhausted
        self.attempt_counts[stage.name] = self.attempt_counts.get(stage.name, 0) + m
        return AttemptBatch(accepted, exhausted, fb.x[keep], fb.z[keep], cost, checks, consumed)

    def draw(self, stage: Stage, count: int, keep=None) -> Items:
        key = (stage.name, None if keep is None else tuple(keep))
        have = self._items.get(key)
        k = len(stage.output if keep is None else keep)
        if have is None:
            have = Items.empty(k)
        parts = [have]
        n_have = len(have)
        while n_have < count:
            need = count - n_have
            rate = self._rate.get(key, 0.5)
            m = int(min(self.max_batch, max(64, np.ceil(need / max(rate, 1e-3) * 1.1) + 16)))
            ab = self.attempt(stage, m, keep)
            self._rate[key] = max(float(ab.accepted.mean()), 1e-3)
            new = self._attribute(key, ab)
            parts.append(new)
            n_have += len(new)
        pool = Items.concat(parts) if len(parts) > 1 else have
        out, rest = pool.take(count)
        self._items[key] = rest
        return out

    def _attribute(self, key, ab: AttemptBatch) -> Items:
        carry = self._carry.setdefault(key, _Carry())
        acc = ab.accepted
        m = acc.size
        cap = self.attempt_cap
        idx = np.flatnonzero(acc)
        prev = np.concatenate(([-1], idx[:-1]))
        gaps = idx - prev
        if idx.size:
            gaps[0] += carry.attempts
        tail = m - 1 - (idx[-1] if idx.size else -1) + (0 if idx.size else carry.attempts)
        if (gaps.size and gaps.max() > cap) or tail >= cap:
            return self._attribute_slow(key, ab)
        cs = np.cumsum(ab.cost, axis=0)
        ends = cs[idx]
        starts = np.vstack([np.zeros((1, 3), dtype=np.int64), ends[:-1]]) if idx.size else ends
        item_cost = ends - starts
        if idx.size:
            item_cost[0] += carry.cost
            last = idx[-1]
            carry.cost = cs[-1] - cs[last]
            carry.attempts = m - 1 - last
        else:
            carry.cost = carry.cost + cs[-1]
            carry.attempts += m
        return Items(ab.x[:, idx], ab.z[:, idx], item_cost, gaps.astype(np.int64),
                     ab.exhausted[idx])

    def _attribute_slow(self, key, ab: AttemptBatch) -> Items:
        carry = self._carry[key]
        xs, zs, costs, atts, exh = [], [], [], [], []
        k = ab.x.shape[0]
        for i in range(ab.accepted.size):
            carry.cost = carry.cost + ab.cost[i]
            carry.attempts += 1
            if ab.accepted[i]:
                xs.append(ab.x[:, i])
                zs.append(ab.z[:, i])
                exh.append(bool(ab.exhausted[i]))
            elif carry.attempts >= self.attempt_cap:
                xs.append(np.zeros(k, dtype=bool))
                zs.append(np.zeros(k, dtype=bool))
                exh.append(True)
            else:
                continue
            costs.append(carry.cost)
            atts.append(carry.attempts)
            carry.cost = np.zeros(3, dtype=np.int64)
            carry.attempts = 0
        if not xs:
            return Items.empty(k)
        return Items(np.stack(xs, 1), np.stack(zs, 1), np.array(costs, dtype=np.int64),
                     np.array(atts, dtype=np.int64), np.array(exh, dtype=bool))


# ------------------------------------------------------------ scoring

def pack(bits: np.ndarray) -> np.ndarray:
    """(7, B) bool -> (B,) int words with bit j from row j."""
    return (bits.astype(np.int64) << np.arange(bits.shape[0])[:, None]).sum(0)


@functools.lru_cache(maxsize=None)
def _logical_table(metric: str) -> np.ndarray:
    return np.array([is_logical_error(_reduce_table(False)[w], metric) for w in range(1 << N)])


def logical_errors(words: np.ndarray, metric: str = "raw-weight") -> np.ndarray:
    """Score flip words after dividing out Z-stabilizers."""
    return _logical_table(metric)[words]


@functools.lru_cache(maxsize=None)
def _decoder_fail_table() -> np.ndarray:
    return np.array([is_logical_error(w, "decoder-failure") for w in range(1 << N)])


def logical_x_content(x_words: np.ndarray) -> np.ndarray:
    """True where an X residue decodes to a logical X."""
    return _decoder_fail_table()[x_words]
