"""Stochastic Pauli channels, regime noise models, and channel distances.

Channels are attached to circuits through :class:`CircuitChannels`: one
channel list per gate layer (applied after the layer), plus preparation
channels (before the first layer) and measurement channels (before readout).
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .circuits import GateLayer, LayerKind, LogicalCircuit
from .pauli import PauliString

__all__ = [
    "StochasticPauliChannel",
    "depolarizing",
    "logical_error_rate",
    "Regime",
    "RegimeConfig",
    "CircuitChannels",
    "pauli_diamond_distance",
    "robustness_bound",
    "Correlation",
    "CorrelatedSampler",
]

SURFACE_CODE_THRESHOLD = 0.01
SURFACE_CODE_PREFACTOR = 0.03


def logical_error_rate(p_phys: float, d: int) -> float:
    """Surface-code logical error rate 0.03 * (p/0.01)^((d+1)/2), capped at 1."""
    if not 0.0 < p_phys < 1.0:
        raise ValueError(f"p_phys must lie in (0, 1), got {p_phys}")
    if d < 3 or d % 2 == 0:
        raise ValueError(f"code distance must be odd and >= 3, got {d}")
    p = SURFACE_CODE_PREFACTOR * (p_phys / SURFACE_CODE_THRESHOLD) ** ((d + 1) / 2)
    return min(p, 1.0)


@dataclass(frozen=True)
class StochasticPauliChannel:
    """Probabilistic Pauli error on a subset of qubits.

    ``weights`` maps non-identity Paulis *on the support* (length equal to
    len(support)) to probabilities; the identity carries the remainder.
    """

    support: tuple[int, ...]
    weights: Mapping[PauliString, float]

    def __post_init__(self):
        k = len(self.support)
        if k == 0:
            raise ValueError("channel support must be nonempty")
        if len(set(self.support)) != k:
            raise ValueError("duplicate qubits in support")
        total = 0.0
        for p, w in self.weights.items():
            if p.n != k:
                raise ValueError("weight key size must match support size")
            if p.is_identity():
                raise ValueError("identity weight is implicit")
            if w < -1e-12:
                raise ValueError(f"negative probability {w}")
            total += w
        if total > 1.0 + 1e-9:
            raise ValueError(f"total error rate {total} exceeds 1")
        object.__setattr__(self, "weights", dict(self.weights))

    @property
    def total_error_rate(self) -> float:
        return float(sum(self.weights.values()))

    @property
    def identity_weight(self) -> float:
        return 1.0 - self.total_error_rate

    def outcomes(self) -> list[tuple[PauliString, float]]:
        """Non-identity outcomes in a deterministic order."""
        return sorted(
            self.weights.items(), key=lambda kv: (kv[0].x_bits, kv[0].z_bits)
        )

    def embedded_outcomes(self, n: int) -> list[tuple[PauliString, float]]:
        return [(p.embed(n, self.support), w) for p, w in self.outcomes()]

    def sample(self, n: int, rng: np.random.Generator) -> PauliString | None:
        """One draw, embedded into the n-qubit register; None for identity."""
        u = rng.random()
        acc = 0.0
        for p, w in self.outcomes():
            acc += w
            if u < acc:
                return p.embed(n, self.support)
        return None

    def sample_by_uniform(self, n: int, u: float) -> PauliString | None:
        """Inverse-CDF draw from a uniform variate (for correlated sampling)."""
        acc = 0.0
        for p, w in self.outcomes():
            acc += w
            if u < acc:
                return p.embed(n, self.support)
        return None


def depolarizing(p: float, support: Sequence[int]) -> StochasticPauliChannel:
    """Uniform weight p/(4^k - 1) on every nontrivial Pauli over ``support``."""
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"depolarizing rate must lie in [0, 1], got {p}")
    support = tuple(support)
    k = len(support)
    if k == 0:
        raise ValueError("support must be nonempty")
    if k > 8:
        raise ValueError("depolarizing support capped at 8 qubits (4^k outcomes)")
    weights = {}
    if p > 0.0:
        w = p / (4**k - 1)
        for labels in itertools.product("IXYZ", repeat=k):
            if set(labels) == {"I"}:
                continue
            weights[PauliString.from_label("".join(labels))] = w
    return StochasticPauliChannel(support, weights)


def pauli_diamond_distance(
    a: StochasticPauliChannel, b: StochasticPauliChannel
) -> float:
    """l1 distance between Pauli channels, identity weight included.

    For stochastic Pauli channels this equals the diamond-norm distance
    (commuting Kraus sets); the 1-qubit Choi computation in the tests guards
    the claim.
    """
    if tuple(a.support) != tuple(b.support):
        raise ValueError("channels act on different supports")
    keys = set(a.weights) | set(b.weights)
    dist = abs(a.identity_weight - b.identity_weight)
    for k in keys:
        dist += abs(a.weights.get(k, 0.0) - b.weights.get(k, 0.0))
    return float(dist)


def robustness_bound(
    per_trap_channel_pairs: Sequence[Sequence[tuple[StochasticPauliChannel, StochasticPauliChannel]]],
    m: int,
) -> float:
    """Bound on the certified-value shift caused by perturbed trap noise.

    Sums the channel-pair distances over every trap and divides by the trap
    count: |gamma - gamma'| <= (1/M) sum_k sum_j dist(E_kj, E'_kj).
    """
    if m < 1:
        raise ValueError("trap count must be >= 1")
    if not per_trap_channel_pairs:
        raise ValueError("no channel pairs given")
    total = 0.0
    for pairs in per_trap_channel_pairs:
        for ch_a, ch_b in pairs:
            total += pauli_diamond_distance(ch_a, ch_b)
    return total / m


# ---------------------------------------------------------------------------
# Regime models
# ---------------------------------------------------------------------------


class Regime(str, enum.Enum):
    NISQ = "nisq"
    PFTQC = "pftqc"
    FTQC = "ftqc"


@dataclass(frozen=True)
class CircuitChannels:
    """Noise locations bound to a circuit: prep, per-layer, measurement."""

    n: int
    prep: tuple[StochasticPauliChannel, ...]
    per_layer: tuple[tuple[StochasticPauliChannel, ...], ...]
    meas: tuple[StochasticPauliChannel, ...]

    def all_channels(self) -> list[StochasticPauliChannel]:
        out = list(self.prep)
        for chans in self.per_layer:
            out.extend(chans)
        out.extend(self.meas)
        return out

    def location_count(self) -> int:
        return len(self.all_channels())

    @classmethod
    def noiseless(cls, circuit: LogicalCircuit) -> "CircuitChannels":
        return cls(circuit.n, (), tuple(() for _ in circuit.layers), ())


@dataclass(frozen=True)
class RegimeConfig:
    """Computation regime: which locations carry which depolarizing rate.

    NISQ runs every location at the physical rate.  The fault-tolerant
    regimes protect Clifford locations at the surface-code logical rate;
    magic-state-fed rotations stay at the physical rate without purification
    (PFTQC) and reach the logical rate with it (FTQC).  ``t_gate_error``
    overrides the rotation-location rate when set.
    """

    regime: Regime
    p_phys: float
    distance: int | None = None
    t_gate_error: float | None = None

    def __post_init__(self):
        if not 0.0 <= self.p_phys < 1.0:
            raise ValueError(f"p_phys must lie in [0, 1), got {self.p_phys}")
        if self.regime in (Regime.PFTQC, Regime.FTQC):
            if self.distance is None:
                raise ValueError(f"{self.regime.value} needs a code distance")
            logical_error_rate(max(self.p_phys, 1e-300), self.distance)

    @property
    def clifford_rate(self) -> float:
        if self.regime is Regime.NISQ:
            return self.p_phys
        if self.p_phys == 0.0:
            return 0.0
        return logical_error_rate(self.p_phys, self.distance)

    @property
    def rotation_rate(self) -> float:
        if self.t_gate_error is not None:
            return self.t_gate_error
        if self.regime is Regime.FTQC:
            return self.clifford_rate
        return self.p_phys

    @property
    def purified(self) -> bool:
        return self.regime is Regime.FTQC

    def to_dict(self) -> dict:
        return {
            "regime": self.regime.value,
            "p_phys": self.p_phys,
            "distance": self.distance,
            "t_gate_error": self.t_gate_error,
        }

    # -- channel construction -----------------------------------------------

    def _layer_channels(self, layer: GateLayer, n: int) -> tuple[StochasticPauliChannel, ...]:
        pc = self.clifford_rate
        if layer.kind in (LayerKind.SINGLE, LayerKind.BOUNDARY, LayerKind.TWIRL):
            if pc == 0.0:
                return ()
            return tuple(depolarizing(pc, (q,)) for q in range(n))
        if layer.kind is LayerKind.ENTANGLING:
            chans: list[StochasticPauliChannel] = []
            busy: set[int] = set()
            for pair in layer.cz_pairs:
                busy.update(pair)
                if pc > 0.0:
                    chans.append(depolarizing(pc, pair))
            pr = self.rotation_rate
            for rot in layer.rotations:
                busy.update(rot.support)
                if pr > 0.0:
                    # RUS gates average two attempts; others consume one state
                    attempts = 2 if rot.mechanism.value == "rus" else 1
                    for _ in range(attempts):
                        chans.append(depolarizing(pr, rot.support))
                        if self.purified:
                            # magic-state combining / dummy-teleportation gadget
                            chans.append(depolarizing(pr, rot.support))
            if pc > 0.0:
                for q in range(n):
                    if q not in busy:
                        chans.append(depolarizing(pc, (q,)))
            return tuple(chans)
        return ()

    def channels_for(self, circuit: LogicalCircuit) -> CircuitChannels:
        """Gate-granular noise locations for every layer plus prep and readout."""
        n = circuit.n
        pc = self.clifford_rate
        boundary = tuple(depolarizing(pc, (q,)) for q in range(n)) if pc > 0 else ()
        per_layer = tuple(
            self._layer_channels(layer, n) if layer.kind is not LayerKind.MEASUREMENT else ()
            for layer in circuit.layers
        )
        return CircuitChannels(n, boundary, per_layer, boundary)


def local_depolarizing_channels(
    circuit: LogicalCircuit, p: float, include_boundaries: bool = False
) -> CircuitChannels:
    """Simplified local model: one 1-qubit depolarizing location per qubit
    per sandwich-block gate layer (single-qubit and entangling layers), with
    noiseless preparation and readout.

    This is the model behind the false-positive closed form with
    k = 3 * blocks * qubits error locations.
    """
    n = circuit.n
    per_layer = []
    for layer in circuit.layers:
        noisy = layer.kind in (LayerKind.SINGLE, LayerKind.ENTANGLING)
        if include_boundaries:
            noisy = noisy or layer.kind is LayerKind.BOUNDARY
        if noisy and p > 0.0:
            per_layer.append(tuple(depolarizing(p, (q,)) for q in range(n)))
        else:
            per_layer.append(())
    return CircuitChannels(n, (), tuple(per_layer), ())


# ---------------------------------------------------------------------------
# Correlated (non-Markovian) sampling
# ---------------------------------------------------------------------------


class Correlation(enum.Enum):
    INDEPENDENT = "independent"


@dataclass(frozen=True)
class SharedCoefficient:
    """Per-shot latent variable steering all channels' draws together."""

    strength: float

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError("correlation strength must lie in [0, 1]")


@dataclass
class CorrelatedSampler:
    """Per-shot error draws over a fixed channel list.

    Independent mode reproduces product sampling.  SharedCoefficient(s) makes
    all channels reuse one uniform variate with probability s per shot,
    which biases their inverse-CDF draws identically while preserving every
    channel's marginal.
    """

    n: int
    channels: Sequence[StochasticPauliChannel]
    correlation: Correlation | SharedCoefficient = Correlation.INDEPENDENT

    def draw(self, rng: np.random.Generator) -> list[PauliString | None]:
        if isinstance(self.correlation, SharedCoefficient):
            if rng.random() < self.correlation.strength:
                u = rng.random()
                return [ch.sample_by_uniform(self.n, u) for ch in self.channels]
        return [ch.sample(self.n, rng) for ch in self.channels]
