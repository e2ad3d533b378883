"""Randomised compiling: Pauli-twirl insertion and dense twirl verifiers.

Twirl layers are compiled into the circuit so that each gate layer is
sandwiched by a random Pauli and its propagated undo; contiguous twirl
operations merge into a single Pauli layer.  The dense chi-matrix machinery
(capped at 3 qubits) is the brute-force evidence that twirling turns
arbitrary CPTP noise into stochastic Pauli noise, which is what lets the
Monte Carlo paths sample effective Pauli channels directly.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .circuits import GateLayer, LayerKind, LogicalCircuit, RotationGate
from .pauli import CliffordTableau, PauliString, multiply, random_pauli, symplectic_product

__all__ = [
    "TwirlRecord",
    "insert_twirls",
    "apply_measurement_mask",
    "rotation_twirl_angle",
    "ChiMatrix",
    "twirl_channel",
    "MagicVariant",
    "magic_state_vector",
    "magic_twirl_gate",
    "twirl_magic_state",
    "random_cptp_kraus",
    "pauli_group_matrices",
]

CHI_QUBIT_CAP = 3
_CPTP_ATOL = 1e-9


# ---------------------------------------------------------------------------
# Twirl insertion
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TwirlRecord:
    """Randomisation record of one twirl insertion.

    ``boundary_paulis`` holds the raw twirl draw for state preparation, each
    gate layer, and measurement (in circuit order); ``compiled_layers`` the
    merged Pauli actually inserted at each boundary; ``rotation_signs`` the
    angle-sign bit applied to each rotation (keyed by (layer index, slot
    index)); ``measurement_mask`` the classical unflip mask x_P.
    """

    boundary_paulis: tuple[PauliString, ...]
    compiled_layers: tuple[PauliString, ...]
    rotation_signs: dict = field(default_factory=dict)
    measurement_mask: int = 0


def _clifford_part_tableau(layer: GateLayer, n: int) -> CliffordTableau:
    """Tableau of the layer with rotation slots treated as transparent."""
    if layer.kind is LayerKind.ENTANGLING:
        return CliffordTableau.from_gates(n, [("CZ", pair) for pair in layer.cz_pairs])
    return layer.tableau(n)


def insert_twirls(
    circuit: LogicalCircuit, rng: np.random.Generator
) -> tuple[LogicalCircuit, TwirlRecord]:
    """Interleave compiled Pauli-twirl layers with every gate layer.

    The state-preparation twirl is drawn from {I,Z}^n (diagonal twirls leave
    |0..0> prep unchanged), interior twirls from the full Pauli group, and
    the measurement twirl is undone classically through the returned mask.
    Twirl Paulis commute through rotation slots by flipping the rotation
    angle; the flip bits are recorded and baked into the emitted circuit.
    """
    n = circuit.n
    if any(l.kind is LayerKind.TWIRL for l in circuit.layers):
        raise ValueError("circuit already carries twirl layers")

    gate_layers = circuit.gate_layers
    # Raw draws: prep twirl, one per gate layer, and the measurement twirl.
    prep_z = int(rng.integers(0, 1 << n))
    draws: list[PauliString] = [PauliString.from_xz(n, 0, prep_z, 1)]
    for _ in gate_layers:
        draws.append(random_pauli(n, range(n), rng))
    meas_twirl = random_pauli(n, range(n), rng)
    draws.append(meas_twirl)

    new_layers: list[GateLayer] = []
    compiled: list[PauliString] = []
    rotation_signs: dict = {}
    carry = draws[0]  # undo of the previous twirl, already propagated
    for idx, layer in enumerate(gate_layers):
        q = draws[idx + 1]
        merged = multiply(q, carry)
        compiled.append(merged)
        new_layers.append(GateLayer(LayerKind.TWIRL, twirl=_as_hermitian(merged)))

        if layer.rotations:
            rots = []
            for slot, rot in enumerate(layer.rotations):
                sign = -1 if symplectic_product(q, rot.basis) else 1
                rotation_signs[(idx, slot)] = sign
                rots.append(RotationGate(rot.basis, sign * rot.angle, rot.mechanism))
            new_layers.append(
                GateLayer(layer.kind, cz_pairs=layer.cz_pairs, rotations=tuple(rots))
            )
        else:
            new_layers.append(layer)
        carry = _clifford_part_tableau(layer, n).conjugate(q)

    final = multiply(meas_twirl, carry)
    compiled.append(final)
    new_layers.append(GateLayer(LayerKind.TWIRL, twirl=_as_hermitian(final)))
    new_layers.append(circuit.layers[-1])

    mask = meas_twirl.x_bits
    record = TwirlRecord(
        boundary_paulis=tuple(draws),
        compiled_layers=tuple(compiled),
        rotation_signs=rotation_signs,
        measurement_mask=mask,
    )
    meta = dict(circuit.metadata)
    meta["twirled"] = True
    return LogicalCircuit(n, tuple(new_layers), meta), record


def _as_hermitian(p: PauliString) -> PauliString:
    """Drop a transient imaginary phase; twirl layers act up to global phase."""
    if p.is_hermitian:
        return p
    return PauliString(p.n, p.x_bits, p.z_bits, (p.phase_exp + 1) & 3)


def apply_measurement_mask(bits: int, mask: int) -> int:
    """Classically undo the measurement twirl (an involution)."""
    return bits ^ mask


def rotation_twirl_angle(twirl: PauliString, basis: PauliString, theta: float) -> float:
    """Angle seen by a twirled rotation: (-1)^(twirl . basis) * theta."""
    return (-theta) if symplectic_product(twirl, basis) else theta


# ---------------------------------------------------------------------------
# chi-matrix machinery (dense verifier)
# ---------------------------------------------------------------------------


def _pauli_basis(n: int) -> list[PauliString]:
    return [
        PauliString.from_label("".join(labels))
        for labels in itertools.product("IXYZ", repeat=n)
    ]


def pauli_group_matrices(n: int) -> list[np.ndarray]:
    return [p.to_matrix() for p in _pauli_basis(n)]


@dataclass(frozen=True)
class ChiMatrix:
    """Process matrix in the Pauli basis (IXYZ lexicographic order)."""

    n: int
    matrix: np.ndarray

    def __post_init__(self):
        if self.n > CHI_QUBIT_CAP:
            raise ValueError(f"chi matrices capped at {CHI_QUBIT_CAP} qubits")
        dim = 4**self.n
        if self.matrix.shape != (dim, dim):
            raise ValueError("chi matrix shape mismatch")

    @property
    def diagonal(self) -> np.ndarray:
        return np.real(np.diag(self.matrix))

    def max_offdiagonal(self) -> float:
        off = self.matrix - np.diag(np.diag(self.matrix))
        return float(np.abs(off).max())

    def diagonal_sum(self) -> float:
        return float(self.diagonal.sum())

    def is_stochastic_pauli(self, atol: float = 1e-10) -> bool:
        return (
            self.max_offdiagonal() < atol
            and float(np.abs(np.imag(np.diag(self.matrix))).max()) < atol
            and abs(self.diagonal_sum() - 1.0) < 1e-9
            and self.diagonal.min() > -1e-12
        )

    def pauli_weights(self) -> dict[PauliString, float]:
        """Diagonal entries keyed by basis Pauli (identity included)."""
        return {p: float(w) for p, w in zip(_pauli_basis(self.n), self.diagonal)}


def validate_cptp(kraus: list[np.ndarray], atol: float = _CPTP_ATOL) -> None:
    if not kraus:
        raise ValueError("empty Kraus list")
    d = kraus[0].shape[0]
    acc = np.zeros((d, d), dtype=complex)
    for k in kraus:
        if k.shape != (d, d):
            raise ValueError("ragged Kraus operators")
        acc += k.conj().T @ k
    if not np.allclose(acc, np.eye(d), atol=atol):
        raise ValueError("channel is not trace preserving")
    # Choi positivity (guaranteed for explicit Kraus form, checked anyway)
    choi = np.zeros((d * d, d * d), dtype=complex)
    for k in kraus:
        v = k.reshape(-1, order="F")
        choi += np.outer(v, v.conj())
    eigs = np.linalg.eigvalsh(choi)
    if eigs.min() < -atol:
        raise ValueError("Choi matrix is not PSD")


def chi_from_kraus(kraus: list[np.ndarray], n: int) -> ChiMatrix:
    basis = pauli_group_matrices(n)
    d = 2**n
    gammas = np.array([[np.trace(p.conj().T @ k) / d for p in basis] for k in kraus])
    chi = gammas.T @ gammas.conj()
    return ChiMatrix(n, chi)


def twirl_channel(kraus: list[np.ndarray], group: list[np.ndarray]) -> ChiMatrix:
    """chi matrix of the group-averaged channel (dense averaging).

    The twirled channel applies a uniformly drawn group element before the
    channel and its inverse after; its Kraus set is the union of the
    conjugated sets weighted by 1/sqrt(|G|).
    """
    validate_cptp(kraus)
    d = kraus[0].shape[0]
    n = int(math.log2(d))
    if 2**n != d:
        raise ValueError("Kraus dimension is not a power of two")
    if n > CHI_QUBIT_CAP:
        raise ValueError(f"dense twirl verifier capped at {CHI_QUBIT_CAP} qubits")
    scale = 1.0 / math.sqrt(len(group))
    averaged = [
        scale * (g.conj().T @ k @ g) for g in group for k in kraus
    ]
    return chi_from_kraus(averaged, n)


# ---------------------------------------------------------------------------
# magic-state twirling
# ---------------------------------------------------------------------------


class MagicVariant(str, enum.Enum):
    PLUS = "plus"
    PI_OVER_4 = "pi_over_4"
    PI_OVER_2 = "pi_over_2"
    PI = "pi"


_VARIANT_ANGLE = {
    MagicVariant.PLUS: 0.0,
    MagicVariant.PI_OVER_4: math.pi / 4,
    MagicVariant.PI_OVER_2: math.pi / 2,
    MagicVariant.PI: math.pi,
}


def magic_state_vector(variant: MagicVariant) -> np.ndarray:
    theta = _VARIANT_ANGLE[variant]
    return np.array([1.0, np.exp(1j * theta)]) / math.sqrt(2)


def magic_twirl_gate(variant: MagicVariant) -> np.ndarray:
    """The non-identity twirl element for each phase-state variant.

    Each gate equals |v><v| - Z|v><v|Z for its ideal state |v>, so the
    two-element twirl projects any input onto the {|v>, Z|v>} axis.
    """
    v = magic_state_vector(variant)
    z = np.diag([1.0, -1.0])
    w = z @ v
    return np.outer(v, v.conj()) - np.outer(w, w.conj())


def twirl_magic_state(rho: np.ndarray, variant: MagicVariant) -> np.ndarray:
    """Average a noisy single-qubit state over {I, G_variant}.

    The output is exactly (1 - eps)|v><v| + eps Z|v><v|Z with
    eps = 1 - <v|rho|v>: arbitrary preparation noise becomes a stochastic-Z
    channel on the ideal state.
    """
    if rho.shape != (2, 2):
        raise ValueError("magic states are single-qubit")
    if abs(np.trace(rho) - 1.0) > _CPTP_ATOL:
        raise ValueError("state must have unit trace")
    if not np.allclose(rho, rho.conj().T, atol=_CPTP_ATOL):
        raise ValueError("state must be Hermitian")
    if np.linalg.eigvalsh(rho).min() < -_CPTP_ATOL:
        raise ValueError("state must be PSD")
    g = magic_twirl_gate(variant)
    return 0.5 * (rho + g @ rho @ g.conj().T)


# ---------------------------------------------------------------------------
# random channels for verification
# ---------------------------------------------------------------------------


def random_cptp_kraus(
    n: int, rng: np.random.Generator, kraus_count: int | None = None
) -> list[np.ndarray]:
    """Random CPTP channel from a Haar-ish random Stinespring isometry."""
    d = 2**n
    k = kraus_count or d
    g = rng.normal(size=(d * k, d)) + 1j * rng.normal(size=(d * k, d))
    q, _ = np.linalg.qr(g)
    return [q[i * d : (i + 1) * d, :] for i in range(k)]


def coherent_rotation_kraus(axis: PauliString, angle: float) -> list[np.ndarray]:
    """Unitary over/under-rotation channel about a Pauli axis."""
    p = axis.to_matrix()
    dim = p.shape[0]
    u = math.cos(angle / 2) * np.eye(dim) - 1j * math.sin(angle / 2) * p
    return [u]
