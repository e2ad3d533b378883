"""Pauli operators in binary symplectic form and Clifford tableau conjugation.

An n-qubit Pauli is stored as two n-bit integers ``x_bits`` and ``z_bits``
(bit q set means an X / Z component on qubit q) plus an internal power of i.
Qubit q corresponds to bit q (LSB) and to character q of the text form.

Internally an operator is kept in "XZ form",

    P = i^phase_exp * X^{x_bits} * Z^{z_bits},

so that multiplication needs a single popcount for the reordering sign.
Hermitian Paulis have ``phase_exp`` equal to the Y-weight mod 2, and expose a
``sign`` in {+1, -1}; the transient i factors only appear inside products.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "PauliString",
    "CliffordTableau",
    "symplectic_product",
    "multiply",
    "conjugate",
    "random_pauli",
    "GATE_NAMES",
]

_AXIS_TO_XZ = {"I": (0, 0), "X": (1, 0), "Y": (1, 1), "Z": (0, 1)}
_XZ_TO_AXIS = {v: k for k, v in _AXIS_TO_XZ.items()}

_SINGLE_QUBIT_MATRICES = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}


def _parity(v: int) -> int:
    return v.bit_count() & 1


class DimensionError(ValueError):
    """Raised when operands act on different qubit counts."""


@dataclass(frozen=True)
class PauliString:
    """Hermitian n-qubit Pauli operator with a +/-1 sign."""

    n: int
    x_bits: int
    z_bits: int
    phase_exp: int = 0

    def __post_init__(self):
        if self.n < 1:
            raise ValueError(f"need at least one qubit, got n={self.n}")
        mask = (1 << self.n) - 1
        if self.x_bits & ~mask or self.z_bits & ~mask:
            raise ValueError("bit-vector exceeds qubit count")
        object.__setattr__(self, "phase_exp", self.phase_exp & 3)

    # -- constructors ------------------------------------------------------

    @classmethod
    def identity(cls, n: int) -> "PauliString":
        return cls(n, 0, 0, 0)

    @classmethod
    def from_xz(cls, n: int, x_bits: int, z_bits: int, sign: int = 1) -> "PauliString":
        if sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {sign}")
        phase = (x_bits & z_bits).bit_count() + (0 if sign == 1 else 2)
        return cls(n, x_bits, z_bits, phase & 3)

    @classmethod
    def from_label(cls, label: str) -> "PauliString":
        """Parse the text form, e.g. ``"+XIZ"`` (sign prefix optional)."""
        sign = 1
        extra_phase = 0
        if label and label[0] in "+-−":
            sign = 1 if label[0] == "+" else -1
            label = label[1:]
            if label and label[0] == "i":
                extra_phase = 1
                label = label[1:]
        if not label:
            raise ValueError("empty Pauli label")
        if extra_phase:
            p = cls.from_label(("+" if sign == 1 else "-") + label)
            return cls(p.n, p.x_bits, p.z_bits, (p.phase_exp + 1) & 3)
        x = z = 0
        for q, ch in enumerate(label):
            try:
                xb, zb = _AXIS_TO_XZ[ch]
            except KeyError:
                raise ValueError(f"invalid Pauli character {ch!r}") from None
            x |= xb << q
            z |= zb << q
        return cls.from_xz(len(label), x, z, sign)

    @classmethod
    def single(cls, n: int, qubit: int, axis: str, sign: int = 1) -> "PauliString":
        xb, zb = _AXIS_TO_XZ[axis]
        return cls.from_xz(n, xb << qubit, zb << qubit, sign)

    # -- views -------------------------------------------------------------

    @property
    def is_hermitian(self) -> bool:
        y_weight = (self.x_bits & self.z_bits).bit_count()
        return (self.phase_exp - y_weight) & 1 == 0

    @property
    def sign(self) -> int:
        """+1 or -1; only Hermitian Paulis carry a resolved sign."""
        y_weight = (self.x_bits & self.z_bits).bit_count()
        rel = (self.phase_exp - y_weight) & 3
        if rel & 1:
            raise ValueError("transient imaginary phase has no +/-1 sign")
        return 1 if rel == 0 else -1

    @property
    def weight(self) -> int:
        return (self.x_bits | self.z_bits).bit_count()

    @property
    def support(self) -> tuple[int, ...]:
        bits = self.x_bits | self.z_bits
        return tuple(q for q in range(self.n) if (bits >> q) & 1)

    def is_identity(self) -> bool:
        return self.x_bits == 0 and self.z_bits == 0

    def axis(self, qubit: int) -> str:
        return _XZ_TO_AXIS[((self.x_bits >> qubit) & 1, (self.z_bits >> qubit) & 1)]

    def to_label(self) -> str:
        body = "".join(self.axis(q) for q in range(self.n))
        y_weight = (self.x_bits & self.z_bits).bit_count()
        prefix = ("+", "+i", "-", "-i")[(self.phase_exp - y_weight) & 3]
        return prefix + body

    def __str__(self) -> str:
        return self.to_label()

    def negate(self) -> "PauliString":
        return PauliString(self.n, self.x_bits, self.z_bits, (self.phase_exp + 2) & 3)

    def embed(self, n: int, positions: Sequence[int]) -> "PauliString":
        """Embed into an n-qubit register, qubit i mapping to positions[i]."""
        if len(positions) != self.n:
            raise DimensionError("positions must match operator size")
        x = z = 0
        for i, q in enumerate(positions):
            x |= ((self.x_bits >> i) & 1) << q
            z |= ((self.z_bits >> i) & 1) << q
        return PauliString.from_xz(n, x, z, self.sign)

    def restrict(self, positions: Sequence[int]) -> "PauliString":
        """Keep only the given qubits, re-indexed in the given order."""
        x = z = 0
        for i, q in enumerate(positions):
            x |= ((self.x_bits >> q) & 1) << i
            z |= ((self.z_bits >> q) & 1) << i
        return PauliString.from_xz(len(positions), x, z, self.sign)

    def to_matrix(self) -> np.ndarray:
        """Dense matrix; qubit 0 is the leftmost tensor factor."""
        if self.n > 10:
            raise ValueError("dense form capped at 10 qubits")
        factors = [_SINGLE_QUBIT_MATRICES[self.axis(q)] for q in range(self.n)]
        y_weight = (self.x_bits & self.z_bits).bit_count()
        phase = 1j ** ((self.phase_exp - y_weight) % 4)
        return phase * reduce(np.kron, factors)

    def commutes_with(self, other: "PauliString") -> bool:
        return symplectic_product(self, other) == 0

    def __mul__(self, other: "PauliString") -> "PauliString":
        return multiply(self, other)


def _check_same_n(a: PauliString, b: PauliString) -> None:
    if a.n != b.n:
        raise DimensionError(f"qubit counts differ: {a.n} vs {b.n}")


def symplectic_product(a: PauliString, b: PauliString) -> int:
    """0 if the operators commute, 1 if they anticommute."""
    _check_same_n(a, b)
    return _parity(a.x_bits & b.z_bits) ^ _parity(a.z_bits & b.x_bits)


def multiply(a: PauliString, b: PauliString) -> PauliString:
    """Group product a*b with exact sign tracking."""
    _check_same_n(a, b)
    phase = a.phase_exp + b.phase_exp + 2 * _parity(a.z_bits & b.x_bits)
    return PauliString(a.n, a.x_bits ^ b.x_bits, a.z_bits ^ b.z_bits, phase & 3)


def random_pauli(n: int, support: Sequence[int], rng: np.random.Generator) -> PauliString:
    """Uniform draw over the 4^|support| Paulis acting inside ``support``."""
    support = tuple(support)
    if not support:
        raise ValueError("support must be nonempty")
    if len(set(support)) != len(support) or min(support) < 0 or max(support) >= n:
        raise ValueError(f"invalid support {support} for n={n}")
    codes = rng.integers(0, 4, size=len(support))
    x = z = 0
    for q, c in zip(support, codes):
        x |= (int(c) & 1) << q
        z |= ((int(c) >> 1) & 1) << q
    return PauliString.from_xz(n, x, z, 1)


# ---------------------------------------------------------------------------
# Clifford tableaus
# ---------------------------------------------------------------------------

# Images of X and Z under each generator gate, as (x, z, sign) triples per
# affected qubit; multi-qubit images are written over the gate's qubit order.
GATE_NAMES = ("I", "X", "Y", "Z", "H", "S", "SDG", "CZ", "CNOT")


def _gate_tableau(name: str, n: int, qubits: tuple[int, ...]) -> "CliffordTableau":
    tab = CliffordTableau.identity(n)
    return tab._apply_gate(name, qubits)


@dataclass(frozen=True)
class CliffordTableau:
    """Conjugation map of a Clifford circuit, stored via generator images."""

    n: int
    x_images: tuple[PauliString, ...]
    z_images: tuple[PauliString, ...]

    @classmethod
    def identity(cls, n: int) -> "CliffordTableau":
        xs = tuple(PauliString.single(n, q, "X") for q in range(n))
        zs = tuple(PauliString.single(n, q, "Z") for q in range(n))
        return cls(n, xs, zs)

    @classmethod
    def from_gates(cls, n: int, gates: Iterable[tuple[str, tuple[int, ...]]]) -> "CliffordTableau":
        tab = cls.identity(n)
        for name, qubits in gates:
            tab = tab._apply_gate(name, tuple(qubits))
        return tab

    def _apply_gate(self, name: str, qubits: tuple[int, ...]) -> "CliffordTableau":
        """Tableau of (this circuit, then the named gate)."""

        def upd(p: PauliString) -> PauliString:
            return _conjugate_gate(name, qubits, p)

        return CliffordTableau(
            self.n,
            tuple(upd(p) for p in self.x_images),
            tuple(upd(p) for p in self.z_images),
        )

    def conjugate(self, p: PauliString) -> PauliString:
        """Image C P C^dagger of a Pauli under this tableau."""
        if p.n != self.n:
            raise DimensionError(f"qubit counts differ: {p.n} vs {self.n}")
        out = PauliString(self.n, 0, 0, p.phase_exp)
        # XZ form: multiply X images first (in qubit order), then Z images.
        for q in range(self.n):
            if (p.x_bits >> q) & 1:
                out = multiply(out, self.x_images[q])
        for q in range(self.n):
            if (p.z_bits >> q) & 1:
                out = multiply(out, self.z_images[q])
        return out

    def then(self, later: "CliffordTableau") -> "CliffordTableau":
        """Tableau of (this circuit, then ``later``)."""
        if later.n != self.n:
            raise DimensionError("qubit counts differ")
        return CliffordTableau(
            self.n,
            tuple(later.conjugate(p) for p in self.x_images),
            tuple(later.conjugate(p) for p in self.z_images),
        )

    def inverse(self) -> "CliffordTableau":
        """Inverse map, found by solving the symplectic linear system."""
        n = self.n
        # Rows of M are the images of X_0..X_{n-1}, Z_0..Z_{n-1} over F2.
        m = np.zeros((2 * n, 2 * n), dtype=np.uint8)
        signs = []
        for i, img in enumerate(self.x_images + self.z_images):
            for q in range(n):
                m[i, q] = (img.x_bits >> q) & 1
                m[i, n + q] = (img.z_bits >> q) & 1
            signs.append(img.sign)
        minv = _f2_inverse(m)
        xs, zs = [], []
        # A candidate preimage c satisfies self(c) = +/- g; flip its sign so
        # the forward conjugation lands exactly on the generator g.
        for q in range(n):
            cand = self._row_preimage(minv[q])
            if self.conjugate(cand).sign != 1:
                cand = cand.negate()
            xs.append(cand)
        for q in range(n):
            cand = self._row_preimage(minv[n + q])
            if self.conjugate(cand).sign != 1:
                cand = cand.negate()
            zs.append(cand)
        return CliffordTableau(n, tuple(xs), tuple(zs))

    def _row_preimage(self, row: np.ndarray) -> PauliString:
        n = self.n
        x = z = 0
        for q in range(n):
            x |= int(row[q]) << q
            z |= int(row[n + q]) << q
        return PauliString.from_xz(n, x, z, 1)


def _f2_inverse(m: np.ndarray) -> np.ndarray:
    """Invert a matrix over F2 by Gauss-Jordan elimination."""
    k = m.shape[0]
    a = np.concatenate([m.copy() % 2, np.eye(k, dtype=np.uint8)], axis=1)
    row = 0
    for col in range(k):
        pivots = np.nonzero(a[row:, col])[0]
        if len(pivots) == 0:
            raise ValueError("matrix is singular over F2")
        p = row + pivots[0]
        if p != row:
            a[[row, p]] = a[[p, row]]
        others = np.nonzero(a[:, col])[0]
        for r in others:
            if r != row:
                a[r] ^= a[row]
        row += 1
    return a[:, k:]


def _conjugate_gate(name: str, qubits: tuple[int, ...], p: PauliString) -> PauliString:
    """Image of p under one generator gate (textbook actions)."""
    n = p.n
    x, z, ph = p.x_bits, p.z_bits, p.phase_exp
    if name == "I":
        return p
    if name in ("X", "Y", "Z"):
        (q,) = qubits
        xq, zq = (x >> q) & 1, (z >> q) & 1
        if name == "X" and zq:
            ph += 2
        elif name == "Z" and xq:
            ph += 2
        elif name == "Y" and (xq ^ zq):
            ph += 2
        return PauliString(n, x, z, ph & 3)
    if name == "H":
        (q,) = qubits
        xq, zq = (x >> q) & 1, (z >> q) & 1
        # X^x Z^z -> Z^x X^z = (-1)^{xz} X^z Z^x
        if xq & zq:
            ph += 2
        x = (x & ~(1 << q)) | (zq << q)
        z = (z & ~(1 << q)) | (xq << q)
        return PauliString(n, x, z, ph & 3)
    if name in ("S", "SDG"):
        (q,) = qubits
        xq = (x >> q) & 1
        if xq:
            # S: X -> Y = i X Z ; SDG: X -> -Y
            ph += 1 if name == "S" else 3
            z ^= 1 << q
        return PauliString(n, x, z, ph & 3)
    if name == "CZ":
        a, b = qubits
        xa, xb = (x >> a) & 1, (x >> b) & 1
        # X_a -> X_a Z_b, X_b -> Z_a X_b; XZ reordering gives -1 iff xa & xb.
        if xa:
            z ^= 1 << b
        if xb:
            z ^= 1 << a
        if xa and xb:
            ph += 2
        return PauliString(n, x, z, ph & 3)
    if name == "CNOT":
        c, t = qubits
        xc = (x >> c) & 1
        zt = (z >> t) & 1
        # X_c -> X_c X_t, Z_t -> Z_c Z_t; no phase correction in XZ form.
        if xc:
            x ^= 1 << t
        if zt:
            z ^= 1 << c
        return PauliString(n, x, z, ph & 3)
    raise ValueError(f"unknown gate {name!r}")


def conjugate(tableau: CliffordTableau, p: PauliString) -> PauliString:
    """Functional alias for :meth:`CliffordTableau.conjugate`."""
    return tableau.conjugate(p)


def quarter_turn_conjugate(basis: PauliString, turns: int, g: PauliString) -> PauliString:
    """Image of g under exp(-i * turns * (pi/4) * basis) conjugation.

    Quarter turns of a Pauli axis are Clifford, so the image is again a
    Pauli.  ``turns`` is taken mod 4.
    """
    _check_same_n(basis, g)
    turns &= 3
    if turns == 0 or symplectic_product(basis, g) == 0:
        return g
    if turns == 2:
        return g.negate()
    prod = multiply(basis, g)
    # theta=+pi/2: G -> -i P G ; theta=-pi/2: G -> +i P G
    shift = 3 if turns == 1 else 1
    return PauliString(g.n, prod.x_bits, prod.z_bits, (prod.phase_exp + shift) & 3)


@lru_cache(maxsize=None)
def gate_matrix(name: str) -> np.ndarray:
    """Dense unitary of a generator gate (on its own qubits, in call order)."""
    if name in _SINGLE_QUBIT_MATRICES:
        return _SINGLE_QUBIT_MATRICES[name]
    if name == "H":
        return np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    if name == "S":
        return np.diag([1, 1j]).astype(complex)
    if name == "SDG":
        return np.diag([1, -1j]).astype(complex)
    if name == "CZ":
        return np.diag([1, 1, 1, -1]).astype(complex)
    if name == "CNOT":
        return np.array(
            [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
        )
    raise ValueError(f"unknown gate {name!r}")
