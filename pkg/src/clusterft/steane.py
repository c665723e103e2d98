"""The Steane [[7,1,3]] code: checks, decoding and encoder circuits.

Words are 7-bit integers with bit ``j`` for qubit ``j`` (sequences of bits
are accepted too).  Column ``j`` of the Hamming check matrix is the binary
representation of ``j + 1``; row ``r`` holds bit ``r`` of it.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .pauli import CircuitBuilder, Circuit, PauliString

N = 7
ROW_MASKS = tuple(sum(1 << j for j in range(N) if (j + 1) >> r & 1) for r in range(3))
ALL_ONES = (1 << N) - 1
# pivot qubits (columns 1, 2, 4) each fan out to the rest of their row
_PIVOTS = (0, 1, 3)
# depth-3 schedule of the 9 fan-out CNOTs, pivot -> other
_FANOUT = (((0, 2), (1, 5), (3, 6)),
           ((0, 4), (1, 6), (3, 5)),
           ((0, 6), (1, 2), (3, 4)))


def _hamming_matrix() -> np.ndarray:
    return np.array([[(j + 1) >> r & 1 for j in range(N)] for r in range(3)], dtype=np.uint8)


@dataclass(frozen=True)
class CodeSpec:
    n: int = 7
    k: int = 1
    d: int = 3
    hx: np.ndarray = field(default_factory=_hamming_matrix, compare=False)
    hz: np.ndarray = field(default_factory=_hamming_matrix, compare=False)
    logical_x: PauliString = PauliString(7, ALL_ONES, 0)
    logical_z: PauliString = PauliString(7, 0, ALL_ONES)

    def x_stabilizers(self) -> list[PauliString]:
        return [PauliString(7, m, 0) for m in ROW_MASKS]

    def z_stabilizers(self) -> list[PauliString]:
        return [PauliString(7, 0, m) for m in ROW_MASKS]


STEANE = CodeSpec()


@dataclass(frozen=True)
class ClassicalSyndrome:
    value: int

    @property
    def bits(self) -> tuple:
        """Bit ``r`` is the parity against check row ``r``."""
        return tuple(self.value >> r & 1 for r in range(3))

    def __str__(self):
        return format(self.value, "03b")


def as_mask(word) -> int:
    if isinstance(word, (int, np.integer)):
        return int(word)
    return sum(int(b) << j for j, b in enumerate(word))


def _par(v: int) -> int:
    return bin(v).count("1") & 1


def syndrome(word) -> ClassicalSyndrome:
    w = as_mask(word)
    return ClassicalSyndrome(sum(_par(w & m) << r for r, m in enumerate(ROW_MASKS)))


def decode_single(s) -> int | None:
    """0-indexed qubit whose column matches ``s``; None for the zero syndrome."""
    v = s.value if isinstance(s, ClassicalSyndrome) else int(s)
    return None if v == 0 else v - 1


def logical_parity(word) -> int:
    return _par(as_mask(word) & ALL_ONES)


def is_logical_error(flips, metric: str = "raw-weight") -> bool:
    w = as_mask(flips)
    if metric == "raw-weight":
        return bin(w).count("1") >= 2
    if metric == "decoder-failure":
        pos = decode_single(syndrome(w))
        if pos is not None:
            w ^= 1 << pos
        return bool(logical_parity(w))
    raise ValueError(f"unknown metric {metric!r}")


@functools.lru_cache(maxsize=None)
def _reduce_table(with_logical: bool = False) -> tuple:
    group = hamming_codewords() if with_logical else even_codewords()
    return tuple(min((w ^ s for s in group), key=lambda v: (bin(v).count("1"), v))
                 for w in range(1 << N))


def reduce_flips(flips, with_logical: bool = False) -> int:
    """Lightest word equal to ``flips`` up to a stabilizer.

    A frame that differs from the true error by a stabilizer gives the same
    outcome distribution on any code state, so only this representative has
    a physical meaning.  ``with_logical`` also divides out the all-ones word,
    for a block whose logical state that operator fixes.  Ties go to the
    smaller integer.
    """
    return _reduce_table(with_logical)[as_mask(flips)]


def reduce_flips_array(words: np.ndarray) -> np.ndarray:
    return np.asarray(_reduce_table(), dtype=np.int64)[np.asarray(words, dtype=np.int64)]


@functools.lru_cache(maxsize=None)
def hamming_codewords() -> tuple:
    """All 16 codewords of Hamming(7,4) as masks."""
    return tuple(w for w in range(1 << N) if syndrome(w).value == 0)


@functools.lru_cache(maxsize=None)
def even_codewords() -> tuple:
    """The 8 even-weight codewords (supports of the stabilizer group)."""
    return tuple(w for w in hamming_codewords() if not _par(w))


def syndrome_table(flips: np.ndarray) -> np.ndarray:
    """Vectorised syndromes of a (7, B) flip array, returned as ints (B,)."""
    h = _hamming_matrix().astype(np.int64)
    s = (h @ flips.astype(np.int64)) & 1
    return s[0] | (s[1] << 1) | (s[2] << 2)


def effective_weight(p: PauliString, state: str = "plus") -> int:
    """Smallest weight of ``p`` times any stabilizer of the ideal block state.

    ``state`` is ``"plus"`` (|+_L>), ``"zero"`` (|0_L>) or ``"code"`` (only
    the code stabilizers, for non-stabilizer logical states).
    """
    xs = hamming_codewords() if state == "plus" else even_codewords()
    zs = hamming_codewords() if state == "zero" else even_codewords()
    best = N
    for sx in xs:
        for sz in zs:
            best = min(best, bin((p.x ^ sx) | (p.z ^ sz)).count("1"))
    return best


# ------------------------------------------------------------- encoders

def append_encode_zero(b: CircuitBuilder, qubits: Sequence[int]) -> None:
    for j, q in enumerate(qubits):
        b.prep(q, "X" if j in _PIVOTS else "Z")
    for layer in _FANOUT:
        for p, t in layer:
            b.cnot(qubits[p], qubits[t])


def append_encode_plus(b: CircuitBuilder, qubits: Sequence[int]) -> None:
    # Hadamard dual of the zero encoder: preps swapped, CNOTs reversed
    for j, q in enumerate(qubits):
        b.prep(q, "Z" if j in _PIVOTS else "X")
    for layer in _FANOUT:
        for p, t in layer:
            b.cnot(qubits[t], qubits[p])


def encode_zero() -> Circuit:
    b = CircuitBuilder(N)
    append_encode_zero(b, range(N))
    return b.build()


def encode_plus() -> Circuit:
    b = CircuitBuilder(N)
    append_encode_plus(b, range(N))
    return b.build()


# cat qubit j couples to block qubit j.  A ladder fault leaves X on a suffix
# of this order, i.e. on at most 3 qubits up to the cat's X^7; the first and
# last three entries are kept off the weight-3 logical supports.
_CAT_LADDER = (0, 1, 3, 2, 4, 5, 6)
# H_L is measured this many times and all parities must agree
CAT_ROUNDS = 3


def append_cat_measure_h(b: CircuitBuilder, block: Sequence[int], cat: Sequence[int],
                         block_basis: str | None = None) -> list:
    """Measure transversal H on ``block`` with a 7-qubit cat; returns registers.

    ``block_basis="Z"`` says the block holds |0_L> at this point.
    """
    order = [cat[j] for j in _CAT_LADDER]
    b.prep(order[0], "X")
    for q in order[1:]:
        b.prep(q, "Z")
    for a, c in zip(order, order[1:]):
        b.cnot(a, c)
    b.barrier(list(block) + list(cat))
    b.canonicalize(block, block_basis)
    b.canonicalize(cat, "cat")
    for j in range(N):
        b.ch(cat[j], block[j])
    return [b.measure(cat[j], "X") for j in range(N)]


def append_encode_pi8(b: CircuitBuilder, block: Sequence[int], cat: Sequence[int],
                      encode: bool = True) -> None:
    """|pi/8_L> = cos(pi/8)|0_L> + sin(pi/8)|1_L> by projecting |0_L> onto H_L = +1.

    The H_L measurement is repeated with a fresh cat and both parities must
    agree; a -1 outcome is mapped back with logical Y.  With ``encode=False``
    the block must already hold |0_L>.
    """
    if encode:
        append_encode_zero(b, block)
    first = append_cat_measure_h(b, block, cat, "Z")
    for _ in range(CAT_ROUNDS - 1):
        again = append_cat_measure_h(b, block, cat)
        b.check(first + again, tag="cat")
    b.correct(PauliString(7, ALL_ONES, ALL_ONES).embed(b.n, block), first, when=1)


def encode_pi8() -> Circuit:
    b = CircuitBuilder(2 * N)
    append_encode_pi8(b, range(N), range(N, 2 * N))
    return b.build()
