"""Exact n-qubit Pauli group arithmetic and stabilizer-code bookkeeping.

Conventions used throughout the package:

* A Pauli operator is ``i**phase_exp * (tensor product of single-qubit
  I/X/Y/Z)``.  Per-qubit labels are encoded in two bitmasks: bit q of
  ``x``/``z`` gives the (x, z) symplectic pair of qubit q, with
  (0,0)=I, (1,0)=X, (1,1)=Y, (0,1)=Z.  The unsigned tensor product uses
  the standard Hermitian Y matrix, so Hermitian operators are exactly
  those with a real phase.
* Qubit 0 is the least significant bit of a computational basis index;
  dense matrices are built as kron(P_{n-1}, ..., P_0).
* Phases are tracked in the exact cyclic group {1, i, -1, -i}; no
  floating point enters group arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce

import numpy as np

# Single-qubit label codes.
I, X, Y, Z = 0, 1, 2, 3
LABEL_CHARS = "IXYZ"

# (x, z) bit pair -> label code and back.
_XZ_TO_LABEL = {(0, 0): I, (1, 0): X, (1, 1): Y, (0, 1): Z}
_LABEL_TO_XZ = {v: k for k, v in _XZ_TO_LABEL.items()}

# P_a @ P_b = i**_MUL_PHASE[a,b] * P_{_MUL_LABEL[a,b]}
_MUL_LABEL = np.array(
    [[I, X, Y, Z],
     [X, I, Z, Y],
     [Y, Z, I, X],
     [Z, Y, X, I]], dtype=np.uint8)
_MUL_PHASE = np.array(
    [[0, 0, 0, 0],
     [0, 0, 1, 3],
     [0, 3, 0, 1],
     [0, 1, 3, 0]], dtype=np.uint8)

_SINGLE_QUBIT = {
    I: np.eye(2, dtype=complex),
    X: np.array([[0, 1], [1, 0]], dtype=complex),
    Y: np.array([[0, -1j], [1j, 0]], dtype=complex),
    Z: np.array([[1, 0], [0, -1]], dtype=complex),
}

_PHASES = (1.0 + 0j, 1j, -1.0 + 0j, -1j)


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliOperator:
    """An n-qubit Pauli with exact phase, the value type of all group sums."""

    n: int
    x: int
    z: int
    phase_exp: int = 0

    def __post_init__(self):
        object.__setattr__(self, "phase_exp", self.phase_exp % 4)
        mask = (1 << self.n) - 1
        if self.x & ~mask or self.z & ~mask:
            raise ValueError("bitmask exceeds qubit count")

    @classmethod
    def identity(cls, n: int) -> "PauliOperator":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_label(cls, label: str, phase_exp: int = 0) -> "PauliOperator":
        """Build from a string like 'XIZY'; leftmost character is qubit 0."""
        x = z = 0
        for q, ch in enumerate(label):
            xb, zb = _LABEL_TO_XZ[LABEL_CHARS.index(ch)]
            x |= xb << q
            z |= zb << q
        return cls(len(label), x, z, phase_exp)

    @property
    def phase(self) -> complex:
        return _PHASES[self.phase_exp]

    def label(self, q: int) -> int:
        return _XZ_TO_LABEL[((self.x >> q) & 1, (self.z >> q) & 1)]

    def labels(self) -> np.ndarray:
        return np.array([self.label(q) for q in range(self.n)], dtype=np.uint8)

    def to_string(self) -> str:
        body = "".join(LABEL_CHARS[self.label(q)] for q in range(self.n))
        prefix = {0: "+", 1: "+i", 2: "-", 3: "-i"}[self.phase_exp]
        return prefix + body

    @property
    def weight(self) -> int:
        return _popcount(self.x | self.z)

    @property
    def is_hermitian(self) -> bool:
        return self.phase_exp % 2 == 0

    def __mul__(self, other: "PauliOperator") -> "PauliOperator":
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} != {other.n}")
        phase = self.phase_exp + other.phase_exp
        for q in range(self.n):
            phase += _MUL_PHASE[self.label(q), other.label(q)]
        return PauliOperator(self.n, self.x ^ other.x, self.z ^ other.z, phase % 4)

    def commutes_with(self, other: "PauliOperator") -> bool:
        if self.n != other.n:
            raise ValueError(f"qubit count mismatch: {self.n} != {other.n}")
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def adjoint(self) -> "PauliOperator":
        return PauliOperator(self.n, self.x, self.z, -self.phase_exp)

    def dense(self) -> np.ndarray:
        mats = [_SINGLE_QUBIT[self.label(q)] for q in range(self.n)]
        full = reduce(np.kron, reversed(mats))
        return self.phase * full

    def __repr__(self):
        return f"PauliOperator({self.to_string()!r})"


def multiply(a: PauliOperator, b: PauliOperator) -> PauliOperator:
    """Exact group product; unsigned label is the XOR of the bitmasks."""
    return a * b


def enumerate_stabilizer_group(generators: list[PauliOperator]):
    """All 2^m products of independent commuting generators.

    Returns (elements, gen_masks) where gen_masks[j] is the bitmask of
    generators whose product is elements[j]; element 0 is the identity.
    """
    if not generators:
        return [PauliOperator.identity(1)], [0]
    n = generators[0].n
    for a in generators:
        for b in generators:
            if not a.commutes_with(b):
                raise ValueError("generators must commute")
    elements = [PauliOperator.identity(n)]
    masks = [0]
    for j, g in enumerate(generators):
        elements += [e * g for e in elements]
        masks += [m | (1 << j) for m in masks]
    labels = {(e.x, e.z) for e in elements}
    if len(labels) != len(elements):
        raise ValueError("generators are not independent")
    return elements, masks


@dataclass
class StabilizerCode:
    """Stabilizer code data: generators, full group, logicals, pure errors.

    ``logicals`` holds the four coset representatives [identity, X, Y, Z]
    with Y = i * X * Z so the trio obeys the single-qubit Pauli algebra on
    the code space.  ``pure_errors[s]`` anticommutes with generator j iff
    bit j of s is set, chosen minimum-weight with ties broken by
    lexicographic order on (x, z).
    """

    name: str
    n: int
    k: int
    generators: list[PauliOperator]
    elements: list[PauliOperator] = field(init=False)
    gen_masks: list[int] = field(init=False)
    logicals: list[PauliOperator] = field(init=False)
    pure_errors: list[PauliOperator] = field(init=False)

    def __init__(self, name: str, generators: list[PauliOperator],
                 logical_x: PauliOperator, logical_z: PauliOperator):
        self.name = name
        self.generators = list(generators)
        self.n = logical_x.n
        self.k = self.n - len(generators)
        if self.k != 1:
            raise ValueError("only single-logical-qubit codes are supported")
        self.elements, self.gen_masks = enumerate_stabilizer_group(self.generators)
        ident = PauliOperator.identity(self.n)
        logical_y = PauliOperator(self.n, 0, 0, 1) * logical_x * logical_z
        self.logicals = [ident, logical_x, logical_y, logical_z]
        self._check_logicals()
        self.pure_errors = self._find_pure_errors()

    @property
    def num_generators(self) -> int:
        return len(self.generators)

    @property
    def num_syndromes(self) -> int:
        return 1 << self.num_generators

    @property
    def logical_x(self) -> PauliOperator:
        return self.logicals[1]

    @property
    def logical_z(self) -> PauliOperator:
        return self.logicals[3]

    def _check_logicals(self):
        lx, lz = self.logicals[1], self.logicals[3]
        for g in self.generators:
            if not (lx.commutes_with(g) and lz.commutes_with(g)):
                raise ValueError("logical operators must commute with stabilizers")
        if lx.commutes_with(lz):
            raise ValueError("logical X and Z must anticommute")
        group_labels = {(e.x, e.z) for e in self.elements}
        if (lx.x, lx.z) in group_labels or (lz.x, lz.z) in group_labels:
            raise ValueError("logical operators must lie outside the stabilizer")

    def syndrome_of(self, p: PauliOperator) -> int:
        """Anticommutation pattern with the generators, bit j for generator j."""
        s = 0
        for j, g in enumerate(self.generators):
            if not p.commutes_with(g):
                s |= 1 << j
        return s

    def syndrome_phase(self, s: int, element_index: int) -> int:
        """(-1)**(parity of syndrome bits over the element's generator subset)."""
        if not 0 <= element_index < len(self.elements):
            raise IndexError("element index out of range")
        return -1 if _popcount(s & self.gen_masks[element_index]) % 2 else 1

    def _find_pure_errors(self) -> list[PauliOperator]:
        m = self.num_generators
        lim = 1 << self.n
        xs, zs = np.meshgrid(np.arange(lim), np.arange(lim), indexing="ij")
        xs, zs = xs.ravel(), zs.ravel()
        weight = np.bitwise_count(xs | zs)
        # anticommutation bit with generator j: parity of x&gz ^ z&gx
        synd = np.zeros(xs.shape, dtype=np.int64)
        for j, g in enumerate(self.generators):
            anti = (np.bitwise_count(xs & g.z) + np.bitwise_count(zs & g.x)) % 2
            synd |= anti.astype(np.int64) << j
        order = np.lexsort((zs, xs, weight))
        found: dict[int, PauliOperator] = {}
        for idx in order:
            s = int(synd[idx])
            if s not in found:
                found[s] = PauliOperator(self.n, int(xs[idx]), int(zs[idx]))
                if len(found) == (1 << m):
                    break
        return [found[s] for s in range(1 << m)]


# [7,4] Hamming parity-check matrix; column q+1 is the binary expansion of q+1.
HAMMING_H = np.array(
    [[0, 0, 0, 1, 1, 1, 1],
     [0, 1, 1, 0, 0, 1, 1],
     [1, 0, 1, 0, 1, 0, 1]], dtype=np.uint8)


def _mask_from_row(row) -> int:
    return int(sum(1 << q for q, v in enumerate(row) if v))


def steane_code() -> StabilizerCode:
    """The [[7,1,3]] CSS code: three X-type and three Z-type generators from
    the Hamming check matrix, logicals X^7 and Z^7."""
    gens = [PauliOperator(7, _mask_from_row(r), 0) for r in HAMMING_H]
    gens += [PauliOperator(7, 0, _mask_from_row(r)) for r in HAMMING_H]
    lx = PauliOperator(7, 0b1111111, 0)
    lz = PauliOperator(7, 0, 0b1111111)
    return StabilizerCode("steane7", gens, lx, lz)


def repetition3_code() -> StabilizerCode:
    """Three-qubit bit-flip code: stabilizers ZZI and IZZ, logicals XXX/ZZZ."""
    gens = [PauliOperator.from_label("ZZI"), PauliOperator.from_label("IZZ")]
    lx = PauliOperator.from_label("XXX")
    lz = PauliOperator.from_label("ZZZ")
    return StabilizerCode("repetition3", gens, lx, lz)
