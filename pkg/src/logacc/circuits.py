"""Layered logical-circuit representation and target-circuit builders.

A circuit is an ordered list of gate layers over n logical qubits, following
the repeating sandwich structure

    [single-qubit layer, entangling layer, single-qubit layer] x D

with an optional boundary-Hadamard layer at each end (traps only) and exactly
one measurement layer at the end.  Every qubit is acted on by at most one
gate per layer.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .pauli import CliffordTableau, PauliString, quarter_turn_conjugate

__all__ = [
    "LayerKind",
    "Mechanism",
    "RotationGate",
    "GateLayer",
    "LogicalCircuit",
    "build_iqp",
    "build_trotter",
    "heisenberg_chain",
    "trotter_error_bound",
    "rus_expected_attempts",
]

SINGLE_QUBIT_GATES = ("I", "X", "Y", "Z", "H", "S", "SDG")


class LayerKind(str, enum.Enum):
    SINGLE = "single"
    ENTANGLING = "entangling"
    BOUNDARY = "boundary"
    TWIRL = "twirl"
    MEASUREMENT = "measurement"


class Mechanism(str, enum.Enum):
    GATE_TELEPORTATION = "gate_teleportation"
    RUS = "rus"
    PROJECTIVE = "projective"


@dataclass(frozen=True)
class RotationGate:
    """Pauli-axis rotation exp(-i * angle/2 * basis) fed by a magic state."""

    basis: PauliString
    angle: float
    mechanism: Mechanism = Mechanism.PROJECTIVE

    def __post_init__(self):
        if self.basis.is_identity():
            raise ValueError("rotation basis must be non-identity")
        if self.mechanism is Mechanism.GATE_TELEPORTATION:
            m = self.angle / (math.pi / 4)
            if abs(m - round(m)) > 1e-12:
                raise ValueError(
                    "gate teleportation needs an angle that is a multiple of pi/4"
                )

    @property
    def support(self) -> tuple[int, ...]:
        return self.basis.support

    def is_clifford(self) -> bool:
        m = self.angle / (math.pi / 2)
        return abs(m - round(m)) < 1e-12

    def quarter_turns(self) -> int:
        if not self.is_clifford():
            raise ValueError("rotation is not a quarter-turn Clifford")
        return round(self.angle / (math.pi / 2)) % 4


@dataclass(frozen=True)
class GateLayer:
    """One layer of the circuit; content depends on ``kind``."""

    kind: LayerKind
    gates: tuple[str, ...] = ()  # SINGLE: per-qubit gate names
    cz_pairs: tuple[tuple[int, int], ...] = ()  # ENTANGLING
    rotations: tuple[RotationGate, ...] = ()  # ENTANGLING
    t: int = 0  # BOUNDARY: Hadamards present iff t == 1
    twirl: PauliString | None = None  # TWIRL

    def validate(self, n: int) -> None:
        if self.kind is LayerKind.SINGLE:
            if len(self.gates) != n:
                raise ValueError("single-qubit layer needs one gate per qubit")
            for g in self.gates:
                if g not in SINGLE_QUBIT_GATES:
                    raise ValueError(f"unknown single-qubit gate {g!r}")
        elif self.kind is LayerKind.ENTANGLING:
            seen: set[int] = set()
            for a, b in self.cz_pairs:
                if a == b or not (0 <= a < n and 0 <= b < n):
                    raise ValueError(f"bad CZ pair ({a}, {b})")
                if a in seen or b in seen:
                    raise ValueError("qubit acted on twice in one layer")
                seen.update((a, b))
            for rot in self.rotations:
                if rot.basis.n != n:
                    raise ValueError("rotation basis size mismatch")
                for q in rot.support:
                    if q in seen:
                        raise ValueError("qubit acted on twice in one layer")
                seen.update(rot.support)
        elif self.kind is LayerKind.BOUNDARY:
            if self.t not in (0, 1):
                raise ValueError("boundary exponent t must be 0 or 1")
        elif self.kind is LayerKind.TWIRL:
            if self.twirl is None or self.twirl.n != n:
                raise ValueError("twirl layer needs an n-qubit Pauli")

    def is_clifford(self) -> bool:
        return all(r.is_clifford() for r in self.rotations)

    def tableau(self, n: int) -> CliffordTableau:
        """Conjugation map of the layer; rotations must be quarter turns."""
        if self.kind is LayerKind.SINGLE:
            return CliffordTableau.from_gates(
                n, [(g, (q,)) for q, g in enumerate(self.gates) if g != "I"]
            )
        if self.kind is LayerKind.BOUNDARY:
            if self.t == 0:
                return CliffordTableau.identity(n)
            return CliffordTableau.from_gates(n, [("H", (q,)) for q in range(n)])
        if self.kind is LayerKind.TWIRL:
            assert self.twirl is not None
            gates = [(self.twirl.axis(q), (q,)) for q in range(n) if self.twirl.axis(q) != "I"]
            return CliffordTableau.from_gates(n, gates)
        if self.kind is LayerKind.MEASUREMENT:
            return CliffordTableau.identity(n)
        tab = CliffordTableau.from_gates(n, [("CZ", pair) for pair in self.cz_pairs])
        for rot in self.rotations:
            turns = rot.quarter_turns()
            xs = tuple(quarter_turn_conjugate(rot.basis, turns, p) for p in tab.x_images)
            zs = tuple(quarter_turn_conjugate(rot.basis, turns, p) for p in tab.z_images)
            tab = CliffordTableau(n, xs, zs)
        return tab

    def acted_qubits(self, n: int) -> set[int]:
        if self.kind is LayerKind.SINGLE:
            return {q for q, g in enumerate(self.gates) if g != "I"}
        if self.kind is LayerKind.ENTANGLING:
            out: set[int] = set()
            for a, b in self.cz_pairs:
                out.update((a, b))
            for rot in self.rotations:
                out.update(rot.support)
            return out
        if self.kind is LayerKind.BOUNDARY and self.t:
            return set(range(n))
        return set()


@dataclass(frozen=True)
class LogicalCircuit:
    """Immutable layered circuit starting from |0..0> with terminal readout."""

    n: int
    layers: tuple[GateLayer, ...]
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("circuit needs at least one qubit")
        if not self.layers or self.layers[-1].kind is not LayerKind.MEASUREMENT:
            raise ValueError("circuit must end with exactly one measurement layer")
        for i, layer in enumerate(self.layers):
            if layer.kind is LayerKind.MEASUREMENT and i != len(self.layers) - 1:
                raise ValueError("measurement layer only allowed at the end")
            layer.validate(self.n)

    @property
    def gate_layers(self) -> tuple[GateLayer, ...]:
        return self.layers[:-1]

    @property
    def entangling_layer_count(self) -> int:
        return sum(1 for l in self.layers if l.kind is LayerKind.ENTANGLING)

    def rotation_count(self) -> int:
        return sum(len(l.rotations) for l in self.layers)

    def is_clifford(self) -> bool:
        return all(l.is_clifford() for l in self.layers)

    def tableau(self) -> CliffordTableau:
        tab = CliffordTableau.identity(self.n)
        for layer in self.gate_layers:
            tab = tab.then(layer.tableau(self.n))
        return tab

    # -- JSON wire form (stable field order for golden files) ---------------

    def to_json(self) -> str:
        def layer_obj(layer: GateLayer):
            obj: dict = {"kind": layer.kind.value}
            if layer.kind is LayerKind.SINGLE:
                obj["gates"] = list(layer.gates)
            elif layer.kind is LayerKind.ENTANGLING:
                obj["cz_pairs"] = [list(p) for p in layer.cz_pairs]
                obj["rotations"] = [
                    {
                        "basis": r.basis.to_label(),
                        "angle": r.angle,
                        "mechanism": r.mechanism.value,
                    }
                    for r in layer.rotations
                ]
            elif layer.kind is LayerKind.BOUNDARY:
                obj["t"] = layer.t
            elif layer.kind is LayerKind.TWIRL:
                obj["twirl"] = layer.twirl.to_label()
            return obj

        return json.dumps(
            {
                "n": self.n,
                "layers": [layer_obj(l) for l in self.layers],
                "metadata": self.metadata,
            },
            indent=2,
            sort_keys=False,
        )

    @classmethod
    def from_json(cls, text: str) -> "LogicalCircuit":
        obj = json.loads(text)
        layers = []
        for lo in obj["layers"]:
            kind = LayerKind(lo["kind"])
            if kind is LayerKind.SINGLE:
                layers.append(GateLayer(kind, gates=tuple(lo["gates"])))
            elif kind is LayerKind.ENTANGLING:
                rots = tuple(
                    RotationGate(
                        PauliString.from_label(r["basis"]),
                        r["angle"],
                        Mechanism(r["mechanism"]),
                    )
                    for r in lo["rotations"]
                )
                layers.append(
                    GateLayer(
                        kind,
                        cz_pairs=tuple(tuple(p) for p in lo["cz_pairs"]),
                        rotations=rots,
                    )
                )
            elif kind is LayerKind.BOUNDARY:
                layers.append(GateLayer(kind, t=lo["t"]))
            elif kind is LayerKind.TWIRL:
                layers.append(GateLayer(kind, twirl=PauliString.from_label(lo["twirl"])))
            else:
                layers.append(GateLayer(kind))
        return cls(obj["n"], tuple(layers), obj.get("metadata", {}))


def _identity_layer(n: int) -> GateLayer:
    return GateLayer(LayerKind.SINGLE, gates=("I",) * n)


def _all_h_layer(n: int) -> GateLayer:
    return GateLayer(LayerKind.SINGLE, gates=("H",) * n)


IQP_DIAGONAL_PALETTE = ("I", "S", "SDG", "Z", "T")


def build_iqp(
    n: int,
    depth: int,
    rng: np.random.Generator,
    cz_density: float = 1.0,
) -> LogicalCircuit:
    """Random diagonal-plus-CZ sampling circuit in the sandwich structure.

    Each of the ``depth`` repetitions contributes a leading single-qubit
    layer, an entangling layer (CZ gates on a random matching plus any T
    slots drawn), and a trailing single-qubit layer.  The opening layer of
    the first block and the closing layer of the last block hold the outer
    Hadamards; all other single-qubit layers hold diagonal-phase draws.  T
    draws from the per-qubit palette {I, S, S^dag, Z, T} become pi/4
    Z-rotations in the entangling layer, so non-Clifford content lives only
    in diagonal slots (all of which commute, keeping the sampled family
    equivalent to Hadamard-diagonal-Hadamard circuits).

    ``cz_density`` is the probability that a candidate pair of the random
    matching actually receives a CZ.
    """
    if n < 1:
        raise ValueError(f"need n >= 1, got {n}")
    if depth < 1:
        raise ValueError(f"need depth >= 1, got {depth}")
    if not 0.0 <= cz_density <= 1.0:
        raise ValueError("cz_density must lie in [0, 1]")

    def diag_draw(exclude: Sequence[int] = ()) -> tuple[str, ...]:
        draws = [IQP_DIAGONAL_PALETTE[int(k)] for k in rng.integers(0, 4, size=n)]
        return tuple("I" if q in exclude else g for q, g in enumerate(draws))

    layers: list[GateLayer] = []
    t_count = 0
    for m in range(depth):
        t_qubits = [q for q in range(n) if rng.integers(0, 5) == 4]
        t_count += len(t_qubits)
        lead = ("H",) * n if m == 0 else diag_draw(exclude=t_qubits)
        rotations = tuple(
            RotationGate(
                PauliString.single(n, q, "Z"),
                math.pi / 4,
                Mechanism.GATE_TELEPORTATION,
            )
            for q in t_qubits
        )
        free = [q for q in range(n) if q not in t_qubits]
        perm = rng.permutation(len(free))
        pairs = []
        for i in range(0, len(free) - 1, 2):
            if rng.random() < cz_density:
                a, b = free[perm[i]], free[perm[i + 1]]
                pairs.append((min(a, b), max(a, b)))
        trail = ("H",) * n if m == depth - 1 else diag_draw()
        layers.append(GateLayer(LayerKind.SINGLE, gates=lead))
        layers.append(
            GateLayer(LayerKind.ENTANGLING, cz_pairs=tuple(sorted(pairs)), rotations=rotations)
        )
        layers.append(GateLayer(LayerKind.SINGLE, gates=trail))
    layers.append(GateLayer(LayerKind.MEASUREMENT))
    meta = {"builder": "iqp", "depth": depth, "t_count": t_count, "cz_density": cz_density}
    return LogicalCircuit(n, tuple(layers), meta)


def build_trotter(
    hamiltonian: Sequence[tuple[float, PauliString]],
    t: float,
    steps: int,
) -> LogicalCircuit:
    """Second-order product-formula circuit for sum_i a_i P_i.

    Each step applies the term rotations forward then in reverse order, with
    every rotation angle a_i * t / (2 * steps); ``steps`` repetitions give
    exactly 2 * L * steps rotation layers.  Zero-coefficient terms are
    dropped with a warning.
    """
    if steps < 1:
        raise ValueError(f"need steps >= 1, got {steps}")
    terms = []
    for coeff, pauli in hamiltonian:
        if coeff == 0.0:
            warnings.warn(f"dropping zero-coefficient term {pauli.to_label()}")
            continue
        if pauli.is_identity():
            raise ValueError("identity term contributes only global phase")
        terms.append((float(coeff), pauli))
    if not terms:
        raise ValueError("hamiltonian has no nonzero terms")
    n = terms[0][1].n
    if any(p.n != n for _, p in terms):
        raise ValueError("all terms must act on the same register")

    layers: list[GateLayer] = []

    def add_rotation_block(coeff: float, basis: PauliString) -> None:
        angle = coeff * t / (2 * steps)
        layers.append(_identity_layer(n))
        layers.append(
            GateLayer(
                LayerKind.ENTANGLING,
                rotations=(RotationGate(basis, angle, Mechanism.PROJECTIVE),),
            )
        )
        layers.append(_identity_layer(n))

    for _ in range(steps):
        for coeff, basis in terms:
            add_rotation_block(coeff, basis)
        for coeff, basis in reversed(terms):
            add_rotation_block(coeff, basis)
    layers.append(GateLayer(LayerKind.MEASUREMENT))
    meta = {
        "builder": "trotter",
        "steps": steps,
        "time": t,
        "terms": len(terms),
        "rotation_layers": 2 * len(terms) * steps,
    }
    return LogicalCircuit(n, tuple(layers), meta)


def heisenberg_chain(
    sites: int,
    field_strength: float,
    rng: np.random.Generator,
) -> list[tuple[float, PauliString]]:
    """Nearest-neighbour XX+YY+ZZ chain with random on-site Z fields.

    Field coefficients are drawn uniformly from [-field_strength,
    field_strength]; coupling coefficients are 1.
    """
    if sites < 2:
        raise ValueError("chain needs at least two sites")
    terms: list[tuple[float, PauliString]] = []
    for axis in "XYZ":
        for i in range(sites - 1):
            x = z = 0
            xb, zb = {"X": (1, 0), "Y": (1, 1), "Z": (0, 1)}[axis]
            x |= (xb << i) | (xb << (i + 1))
            z |= (zb << i) | (zb << (i + 1))
            terms.append((1.0, PauliString.from_xz(sites, x, z, 1)))
    for i in range(sites):
        h = float(rng.uniform(-field_strength, field_strength))
        terms.append((h, PauliString.single(sites, i, "Z")))
    return terms


def trotter_error_bound(w: float, t: float) -> float:
    """Product-formula truncation error bound w * t^3."""
    if w < 0:
        raise ValueError(f"error norm must be nonnegative, got {w}")
    return w * t**3


def rus_expected_attempts() -> float:
    """Mean repeat-until-success attempts: sum_i i/2^i = 2."""
    return 2.0
