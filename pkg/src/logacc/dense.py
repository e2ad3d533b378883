"""Exact density-matrix evolution for small circuits.

The dense path is the independent oracle for the Monte Carlo machinery: it
mixes every noise channel analytically and supports the non-Clifford target
rotations that the frame simulator never touches.  Capped at 6 qubits.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .circuits import GateLayer, LayerKind, LogicalCircuit
from .noise import CircuitChannels, StochasticPauliChannel
from .pauli import PauliString, gate_matrix

__all__ = [
    "DenseState",
    "layer_unitary",
    "circuit_unitary",
    "evolve_circuit",
    "output_distribution",
    "exact_output_distribution",
    "exact_tvd",
    "exact_fidelity",
    "exact_renyi2_density",
    "total_error_rate",
]

DENSE_QUBIT_CAP = 6
_ATOL = 1e-9


@dataclass(frozen=True)
class DenseState:
    """Validated density matrix over at most 6 qubits."""

    n: int
    rho: np.ndarray

    def __post_init__(self):
        if self.n > DENSE_QUBIT_CAP:
            raise ValueError(f"dense states capped at {DENSE_QUBIT_CAP} qubits")
        dim = 2**self.n
        if self.rho.shape != (dim, dim):
            raise ValueError("density matrix shape mismatch")
        validate_density_matrix(self.rho)

    @classmethod
    def zero_state(cls, n: int) -> "DenseState":
        rho = np.zeros((2**n, 2**n), dtype=complex)
        rho[0, 0] = 1.0
        return cls(n, rho)

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))


def validate_density_matrix(rho: np.ndarray, atol: float = _ATOL) -> None:
    if abs(np.trace(rho) - 1.0) > atol:
        raise ValueError(f"trace {np.trace(rho)} is not 1")
    if not np.allclose(rho, rho.conj().T, atol=atol):
        raise ValueError("density matrix is not Hermitian")
    eigs = np.linalg.eigvalsh(rho)
    if eigs.min() < -atol:
        raise ValueError(f"density matrix is not PSD (min eig {eigs.min()})")


def _embed_single(u: np.ndarray, qubit: int, n: int) -> np.ndarray:
    mats = [u if q == qubit else np.eye(2, dtype=complex) for q in range(n)]
    return reduce(np.kron, mats)


def _embed_two(u4: np.ndarray, a: int, b: int, n: int) -> np.ndarray:
    dim = 2**n
    out = np.zeros((dim, dim), dtype=complex)
    for idx in range(dim):
        bits = [(idx >> (n - 1 - q)) & 1 for q in range(n)]
        col = (bits[a] << 1) | bits[b]
        for row4 in range(4):
            amp = u4[row4, col]
            if amp == 0:
                continue
            nb = list(bits)
            nb[a], nb[b] = (row4 >> 1) & 1, row4 & 1
            j = 0
            for q in range(n):
                j = (j << 1) | nb[q]
            out[j, idx] += amp
    return out


def rotation_unitary(basis: PauliString, angle: float) -> np.ndarray:
    """exp(-i * angle/2 * basis) on the full register."""
    p = basis.to_matrix()
    dim = p.shape[0]
    return math.cos(angle / 2) * np.eye(dim) - 1j * math.sin(angle / 2) * p


def layer_unitary(layer: GateLayer, n: int) -> np.ndarray:
    dim = 2**n
    u = np.eye(dim, dtype=complex)
    if layer.kind is LayerKind.SINGLE:
        for q, g in enumerate(layer.gates):
            if g != "I":
                u = _embed_single(gate_matrix(g), q, n) @ u
    elif layer.kind is LayerKind.BOUNDARY:
        if layer.t:
            for q in range(n):
                u = _embed_single(gate_matrix("H"), q, n) @ u
    elif layer.kind is LayerKind.TWIRL:
        assert layer.twirl is not None
        u = layer.twirl.to_matrix() @ u
    elif layer.kind is LayerKind.ENTANGLING:
        for a, b in layer.cz_pairs:
            u = _embed_two(gate_matrix("CZ"), a, b, n) @ u
        for rot in layer.rotations:
            u = rotation_unitary(rot.basis, rot.angle) @ u
    return u


def circuit_unitary(circuit: LogicalCircuit) -> np.ndarray:
    if circuit.n > DENSE_QUBIT_CAP:
        raise ValueError(f"dense evolution capped at {DENSE_QUBIT_CAP} qubits")
    u = np.eye(2**circuit.n, dtype=complex)
    for layer in circuit.gate_layers:
        u = layer_unitary(layer, circuit.n) @ u
    return u


def apply_channel(rho: np.ndarray, channel: StochasticPauliChannel, n: int) -> np.ndarray:
    out = channel.identity_weight * rho
    for p, w in channel.embedded_outcomes(n):
        m = p.to_matrix()
        out = out + w * (m @ rho @ m.conj().T)
    return out


def evolve_circuit(circuit: LogicalCircuit, channels: CircuitChannels | None = None) -> DenseState:
    """Exact output state before readout, mixing all channels analytically."""
    n = circuit.n
    if n > DENSE_QUBIT_CAP:
        raise ValueError(f"dense evolution capped at {DENSE_QUBIT_CAP} qubits")
    if channels is None:
        channels = CircuitChannels.noiseless(circuit)
    rho = DenseState.zero_state(n).rho
    for ch in channels.prep:
        rho = apply_channel(rho, ch, n)
    for layer, layer_channels in zip(circuit.layers, channels.per_layer):
        if layer.kind is not LayerKind.MEASUREMENT:
            u = layer_unitary(layer, n)
            rho = u @ rho @ u.conj().T
        for ch in layer_channels:
            rho = apply_channel(rho, ch, n)
    for ch in channels.meas:
        rho = apply_channel(rho, ch, n)
    return DenseState(n, rho)


def output_distribution(state: DenseState) -> np.ndarray:
    """Computational-basis probabilities; index bit q of outcome s is qubit q
    (qubit 0 = most significant bit of the state index)."""
    probs = np.real(np.diag(state.rho)).copy()
    probs[probs < 0] = 0.0
    return probs / probs.sum()


def exact_output_distribution(
    circuit: LogicalCircuit, channels: CircuitChannels | None = None
) -> np.ndarray:
    """Exact probability vector over bitstrings via dense evolution."""
    return output_distribution(evolve_circuit(circuit, channels))


def exact_tvd(a: np.ndarray, b: np.ndarray) -> float:
    """Total variation distance (1/2) sum_s |a_s - b_s|."""
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError("distribution size mismatch")
    return float(0.5 * np.abs(a - b).sum())


def exact_fidelity(a: DenseState | np.ndarray, b: DenseState | np.ndarray) -> float:
    """Uhlmann fidelity; fast path when one argument is pure."""
    ra = a.rho if isinstance(a, DenseState) else a
    rb = b.rho if isinstance(b, DenseState) else b
    if ra.shape != rb.shape:
        raise ValueError("dimension mismatch")
    pa = float(np.real(np.trace(ra @ ra)))
    pb = float(np.real(np.trace(rb @ rb)))
    if pa > 1.0 - 1e-12 or pb > 1.0 - 1e-12:
        pure, other = (ra, rb) if pa >= pb else (rb, ra)
        return float(np.real(np.trace(pure @ other)))
    s = scipy.linalg.sqrtm(ra)
    inner = scipy.linalg.sqrtm(s @ rb @ s)
    return float(np.real(np.trace(inner)) ** 2)


def exact_renyi2_density(state: DenseState | np.ndarray, n: int) -> float:
    """Second-order Renyi entropy per qubit: -(1/n) log2 Tr rho^2."""
    rho = state.rho if isinstance(state, DenseState) else state
    purity = float(np.real(np.trace(rho @ rho)))
    return -math.log2(purity) / n


def total_error_rate(channels: CircuitChannels) -> float:
    """Probability of at least one error: 1 - prod_j (1 - q_j)."""
    log_ok = 0.0
    for ch in channels.all_channels():
        q = ch.total_error_rate
        if q >= 1.0:
            return 1.0
        log_ok += math.log1p(-q)
    return float(-math.expm1(log_ok))
