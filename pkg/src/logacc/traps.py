"""Trap-circuit compilation from sandwich-structured targets.

A trap keeps the positions and arities of the target's entangling gates but
compiles to a circuit that deterministically outputs the all-zero string
when noiseless: every CZ is sandwiched into a randomly oriented CNOT, every
magic-state-fed rotation becomes an identity gadget, the single-qubit layers
become random pair-matched {S,Sdg,H} draws, and boundary Hadamard layers are
applied with probability 1/2.

The modified construction additionally randomises the order of neighbouring
single-qubit layers and the gadget rotation (0 or a quarter turn), restoring
determinism through a propagated adjoint-correction tail.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .circuits import (
    GateLayer,
    LayerKind,
    LogicalCircuit,
    Mechanism,
    RotationGate,
)
from .noise import CircuitChannels, RegimeConfig, depolarizing
from .pauli import (
    CliffordTableau,
    PauliString,
    quarter_turn_conjugate,
    symplectic_product,
)

__all__ = [
    "Construction",
    "TrapMagicVariant",
    "TargetSkeleton",
    "TrapInstance",
    "compile_trap",
    "compile_trap_modified",
    "trap_channels",
    "deterministic_zero_output",
    "RUS_REPETITION_CAP",
]

RUS_REPETITION_CAP = 20

PAIR_S = 0  # leading S, trailing Sdg
PAIR_H = 1  # leading H, trailing H
_LEAD_GATE = {PAIR_S: "S", PAIR_H: "H"}
_TRAIL_GATE = {PAIR_S: "SDG", PAIR_H: "H"}


class Construction(str, enum.Enum):
    STANDARD = "standard"
    MODIFIED = "modified"


class TrapMagicVariant(str, enum.Enum):
    """Magic-state flavour of the two jointly scored standard-trap versions."""

    PI = "pi"
    PI_OVER_2 = "pi_over_2"


class MalformedTarget(ValueError):
    """Target circuit does not follow the sandwich block structure."""


@dataclass(frozen=True)
class SlotSpec:
    """One magic-state-fed rotation slot of the target."""

    block: int
    basis: PauliString
    angle: float
    mechanism: Mechanism

    @property
    def support(self) -> tuple[int, ...]:
        return self.basis.support


@dataclass(frozen=True)
class BlockSpec:
    cz_pairs: tuple[tuple[int, int], ...]
    slots: tuple[SlotSpec, ...]


@dataclass(frozen=True)
class TargetSkeleton:
    """Parsed [single, entangling, single] block structure of a target."""

    n: int
    blocks: tuple[BlockSpec, ...]

    @classmethod
    def from_circuit(cls, target: LogicalCircuit) -> "TargetSkeleton":
        gate_layers = target.gate_layers
        if len(gate_layers) % 3 != 0 or not gate_layers:
            raise MalformedTarget("gate layers do not form [single, entangling, single] blocks")
        blocks = []
        for b in range(len(gate_layers) // 3):
            lead, mid, trail = gate_layers[3 * b : 3 * b + 3]
            if (
                lead.kind is not LayerKind.SINGLE
                or mid.kind is not LayerKind.ENTANGLING
                or trail.kind is not LayerKind.SINGLE
            ):
                raise MalformedTarget(f"block {b} is not [single, entangling, single]")
            slots = tuple(
                SlotSpec(b, rot.basis, rot.angle, rot.mechanism) for rot in mid.rotations
            )
            blocks.append(BlockSpec(mid.cz_pairs, slots))
        return cls(target.n, tuple(blocks))

    @property
    def depth(self) -> int:
        return len(self.blocks)

    def slot_count(self) -> int:
        return sum(len(b.slots) for b in self.blocks)


@dataclass(frozen=True)
class GadgetRecord:
    """Identity-gadget placement in the compiled trap."""

    layer_index: int  # entangling layer holding the gadget
    basis: PauliString
    mechanism: Mechanism
    repetitions: int = 1
    k_draw: int | None = None  # modified construction: 1 -> |pi/2>, 2 -> |pi>
    direction: int | None = None  # modified: projective-measurement direction


@dataclass(frozen=True)
class TrapInstance:
    """One compiled trap circuit plus its full randomisation record."""

    circuit: LogicalCircuit
    t: int
    pair_codes: tuple[tuple[int, ...], ...]  # per block, per qubit
    magic_variant: TrapMagicVariant | None
    construction: Construction
    purified: bool
    gadgets: tuple[GadgetRecord, ...]
    tail_layer_indices: tuple[int, ...] = ()
    randomization: dict = field(default_factory=dict, compare=False)

    @property
    def n(self) -> int:
        return self.circuit.n

    @property
    def expected_output(self) -> int:
        return 0

    def magic_states_consumed(self) -> int:
        per_state = 2 if self.purified else 1
        return per_state * sum(g.repetitions for g in self.gadgets)

    def to_json(self) -> str:
        obj = json.loads(self.circuit.to_json())
        obj["randomization"] = {
            "construction": self.construction.value,
            "magic_variant": self.magic_variant.value if self.magic_variant else None,
            "purified": self.purified,
            "t": self.t,
            "pair_codes": [list(row) for row in self.pair_codes],
            **self.randomization,
        }
        return json.dumps(obj, indent=2, sort_keys=False)


# ---------------------------------------------------------------------------
# randomness
# ---------------------------------------------------------------------------


def _draw_pair_codes(
    skeleton: TargetSkeleton, rng: np.random.Generator
) -> tuple[np.ndarray, list[np.ndarray]]:
    """Per-block per-qubit pair codes and per-CZ orientation bits.

    Qubits untouched by a CZ draw {S-pair, H-pair} uniformly; the two ends
    of each CZ get one of each, the H side chosen by the orientation bit so
    the compiled block is a randomly oriented CNOT.
    """
    n, depth = skeleton.n, skeleton.depth
    codes = rng.integers(0, 2, size=(depth, n))
    orientations: list[np.ndarray] = []
    for b, block in enumerate(skeleton.blocks):
        bits = rng.integers(0, 2, size=len(block.cz_pairs))
        for (a, c), o in zip(block.cz_pairs, bits):
            ctrl, tgt = (a, c) if o == 0 else (c, a)
            codes[b, ctrl] = PAIR_S
            codes[b, tgt] = PAIR_H
        orientations.append(bits)
    return codes, orientations


def _draw_rus_repetitions(rng: np.random.Generator) -> int:
    """Geometric(1/2) repetition count, tail mass assigned to the cap."""
    reps = 1
    while reps < RUS_REPETITION_CAP and rng.random() < 0.5:
        reps += 1
    return reps


# ---------------------------------------------------------------------------
# standard construction
# ---------------------------------------------------------------------------


def _single_layer(codes: np.ndarray, table: dict) -> GateLayer:
    return GateLayer(LayerKind.SINGLE, gates=tuple(table[int(c)] for c in codes))


def _gadget_rotation(slot: SlotSpec, angle: float = 0.0) -> RotationGate:
    return RotationGate(slot.basis, angle, slot.mechanism)


def compile_trap(
    target: LogicalCircuit,
    construction: Construction = Construction.STANDARD,
    purified: bool = False,
    rng: np.random.Generator | None = None,
) -> tuple[TrapInstance, TrapInstance]:
    """Compile one trap pair: the |pi> version and the |pi/2>+S version.

    Both versions share every randomisation draw and differ only in how the
    trap magic states are prepared, so a protocol failure is scored when
    either version leaves the all-zero output.  ``purified`` feeds every
    gadget from two combined purified |pi/4> states (doubling the
    magic-state count and adding one noise location per gadget).
    """
    if construction is not Construction.STANDARD:
        raise ValueError("compile_trap builds standard traps; use compile_trap_modified")
    if rng is None:
        raise ValueError("an rng is required")
    skeleton = TargetSkeleton.from_circuit(target)
    n = skeleton.n
    t = int(rng.integers(0, 2))
    codes, orientations = _draw_pair_codes(skeleton, rng)

    layers: list[GateLayer] = [GateLayer(LayerKind.BOUNDARY, t=t)]
    gadgets: list[GadgetRecord] = []
    rus_reps: dict[str, int] = {}
    for b, block in enumerate(skeleton.blocks):
        slot_groups: list[tuple[SlotSpec, ...]] = [block.slots]
        extra_blocks: list[SlotSpec] = []
        for s, slot in enumerate(block.slots):
            if slot.mechanism is Mechanism.RUS:
                reps = _draw_rus_repetitions(rng)
                rus_reps[f"{b}:{s}"] = reps
                extra_blocks.extend([slot] * (reps - 1))
        layers.append(_single_layer(codes[b], _LEAD_GATE))
        layers.append(
            GateLayer(
                LayerKind.ENTANGLING,
                cz_pairs=block.cz_pairs,
                rotations=tuple(_gadget_rotation(s) for s in block.slots),
            )
        )
        for slot in block.slots:
            gadgets.append(
                GadgetRecord(len(layers) - 1, slot.basis, slot.mechanism, repetitions=1)
            )
        layers.append(_single_layer(codes[b], _TRAIL_GATE))
        # each further RUS repetition gets an independently sandwiched block
        for slot in extra_blocks:
            rep_codes = rng.integers(0, 2, size=n)
            layers.append(_single_layer(rep_codes, _LEAD_GATE))
            layers.append(
                GateLayer(LayerKind.ENTANGLING, rotations=(_gadget_rotation(slot),))
            )
            gadgets.append(GadgetRecord(len(layers) - 1, slot.basis, slot.mechanism))
            layers.append(_single_layer(rep_codes, _TRAIL_GATE))
    layers.append(GateLayer(LayerKind.BOUNDARY, t=t))
    layers.append(GateLayer(LayerKind.MEASUREMENT))

    circuit = LogicalCircuit(
        n, tuple(layers), {"builder": "trap", "construction": "standard"}
    )
    record = {
        "cz_orientations": [[int(b) for b in bits] for bits in orientations],
        "rus_repetitions": rus_reps,
    }
    common = dict(
        circuit=circuit,
        t=t,
        pair_codes=tuple(tuple(int(c) for c in row) for row in codes),
        construction=Construction.STANDARD,
        purified=purified,
        gadgets=tuple(gadgets),
        randomization=record,
    )
    return (
        TrapInstance(magic_variant=TrapMagicVariant.PI, **common),
        TrapInstance(magic_variant=TrapMagicVariant.PI_OVER_2, **common),
    )


# ---------------------------------------------------------------------------
# modified construction
# ---------------------------------------------------------------------------


def _clifford_to_quarter_turns(u: np.ndarray) -> tuple[tuple[str, int], ...]:
    """Decompose a 1-qubit Clifford into <=3 X/Z quarter turns (up to phase)."""
    from itertools import product

    def rot(axis: str, turns: int) -> np.ndarray:
        theta = turns * math.pi / 2
        p = np.array([[0, 1], [1, 0]]) if axis == "X" else np.diag([1, -1])
        return math.cos(theta / 2) * np.eye(2) - 1j * math.sin(theta / 2) * p

    def matches(candidate: np.ndarray) -> bool:
        ip = np.trace(candidate.conj().T @ u)
        return abs(abs(ip) - 2.0) < 1e-9

    if matches(np.eye(2)):
        return ()
    options = [("X", 1), ("X", -1), ("Z", 1), ("Z", -1), ("X", 2), ("Z", 2)]
    for length in (1, 2, 3):
        for combo in product(options, repeat=length):
            m = np.eye(2, dtype=complex)
            for axis, turns in combo:
                m = rot(axis, turns) @ m
            if matches(m):
                return tuple(combo)
    raise ValueError("not a single-qubit Clifford")


@lru_cache(maxsize=None)
def _swap_commutator_events(w_code: int, v_code: int) -> tuple[tuple[str, int], ...]:
    """Quarter-turn decomposition of w^dg v^dg w v for a swapped layer pair.

    ``w`` is the trailing gate of the earlier block, ``v`` the leading gate
    of the later block.  Only mixed {S-pair, H-pair} combinations produce a
    nontrivial commutator.
    """
    from .pauli import gate_matrix

    w = gate_matrix(_TRAIL_GATE[w_code])
    v = gate_matrix(_LEAD_GATE[v_code])
    kappa = w.conj().T @ v.conj().T @ w @ v
    return _clifford_to_quarter_turns(kappa)


@dataclass
class _CorrectionTracker:
    """Stabilizer-state tracking plus the pending adjoint-correction queue.

    Pending corrections are conjugated through every subsequent gate layer
    (but not through later queued rotations); applying them in reverse queue
    order at the end of the body restores the rotation-free circuit exactly.
    """

    n: int
    state: list[PauliString]
    pending: list[tuple[PauliString, int]] = field(default_factory=list)

    @classmethod
    def start(cls, n: int, t: int) -> "_CorrectionTracker":
        axis = "X" if t else "Z"
        return cls(n, [PauliString.single(n, q, axis) for q in range(n)])

    def through_layer(self, tableau: CliffordTableau) -> None:
        self.state = [tableau.conjugate(g) for g in self.state]
        self.pending = [(tableau.conjugate(p), turns) for p, turns in self.pending]

    def rotation_event(self, basis: PauliString, turns: int) -> bool:
        """Apply a rotation event; returns True if a correction was queued.

        An event whose axis commutes with every tracked generator acts as a
        global phase and needs no correction; anything else changes the
        state and queues its adjoint.
        """
        turns %= 4
        if turns == 0:
            return False
        if all(symplectic_product(basis, g) == 0 for g in self.state):
            return False
        self.state = [quarter_turn_conjugate(basis, turns, g) for g in self.state]
        self.pending.append((basis, (-turns) % 4))
        return True

    def build_tail(self, rng: np.random.Generator) -> list[tuple[PauliString, int]]:
        """Correction tail in application order, shuffled exactly.

        Starts from reverse queue order (which cancels the rotations), then
        randomises via adjacent transpositions with conjugation, removes
        inverse pairs, and returns the sequence.
        """
        tail = [(p, t) for p, t in reversed(self.pending)]
        for _ in range(4 * len(tail)):
            if len(tail) < 2:
                break
            i = int(rng.integers(0, len(tail) - 1))
            first, second = tail[i], tail[i + 1]
            # moving ``second`` before ``first`` conjugates it by first^{-1}
            moved = (
                quarter_turn_conjugate(first[0], (-first[1]) % 4, second[0]),
                second[1],
            )
            tail[i], tail[i + 1] = moved, first
        # drop adjacent exact-inverse pairs
        out: list[tuple[PauliString, int]] = []
        for item in tail:
            if out and _is_inverse(out[-1], item):
                out.pop()
            else:
                out.append(item)
        return out


def _is_inverse(a: tuple[PauliString, int], b: tuple[PauliString, int]) -> bool:
    pa, ta = a
    pb, tb = b
    same_axis = pa.x_bits == pb.x_bits and pa.z_bits == pb.z_bits
    if not same_axis:
        return False
    sign_flip = pa.sign != pb.sign
    turns = (ta + (tb if not sign_flip else -tb)) % 4
    return turns == 0


def _tail_to_layers(
    tail: list[tuple[PauliString, int]], n: int
) -> list[GateLayer]:
    """Parallelise support-disjoint consecutive corrections into layers."""
    layers: list[GateLayer] = []
    current: list[RotationGate] = []
    used: set[int] = set()
    for p, turns in tail:
        angle = ((turns + 1) % 4 - 1) * math.pi / 2  # map 3 -> -1 quarter
        basis = p if p.sign == 1 else p.negate()
        if p.sign == -1:
            angle = -angle
        supp = set(basis.support)
        if used & supp:
            layers.append(GateLayer(LayerKind.ENTANGLING, rotations=tuple(current)))
            current, used = [], set()
        current.append(RotationGate(basis, angle, Mechanism.PROJECTIVE))
        used |= supp
    if current:
        layers.append(GateLayer(LayerKind.ENTANGLING, rotations=tuple(current)))
    return layers


def compile_trap_modified(
    target: LogicalCircuit, rng: np.random.Generator
) -> TrapInstance:
    """Trap with randomised layer ordering and randomised gadget rotations.

    Differences from the standard construction: neighbouring single-qubit
    layers across block boundaries are swapped with probability 1/2, each
    gadget draws a |pi/2> or |pi> magic state (applying a rotation of 0 or a
    quarter turn after corrections), and every non-stabilising quarter turn
    queues a propagated adjoint that is applied, in randomised order, in a
    Clifford correction tail before the closing boundary layer.
    """
    skeleton = TargetSkeleton.from_circuit(target)
    n, depth = skeleton.n, skeleton.depth
    t = int(rng.integers(0, 2))
    codes, orientations = _draw_pair_codes(skeleton, rng)
    swap_bits = rng.integers(0, 2, size=max(depth - 1, 0))

    # gadget draws: k=1 -> |pi/2> gives {identity, +quarter}; k=2 -> |pi>
    # gives {-quarter, half}; half turns cancel on the spot.
    k_draws: list[int] = []
    directions: list[int] = []
    for _ in range(skeleton.slot_count()):
        k_draws.append(int(rng.integers(1, 3)))
        directions.append(int(rng.integers(0, 2)))

    def gadget_turns(k: int, direction: int) -> int:
        if k == 1:
            return 0 if direction == 0 else 1
        return 3 if direction == 0 else 2

    tracker = _CorrectionTracker.start(n, t)
    layers: list[GateLayer] = [GateLayer(LayerKind.BOUNDARY, t=t)]
    gadgets: list[GadgetRecord] = []
    slot_idx = 0
    emitted_per_block: list[dict] = []

    # First pass: emit layers block by block, applying swaps literally, and
    # track the equivalent unswapped view for corrections.
    for b, block in enumerate(skeleton.blocks):
        lead = _single_layer(codes[b], _LEAD_GATE)
        trail = _single_layer(codes[b], _TRAIL_GATE)
        rotations = []
        block_events = []
        for slot in block.slots:
            k, direction = k_draws[slot_idx], directions[slot_idx]
            turns = gadget_turns(k, direction)
            emitted_turns = turns if turns != 2 else 0  # half turn is cancelled
            angle = ((emitted_turns + 1) % 4 - 1) * math.pi / 2
            rotations.append(RotationGate(slot.basis, angle, slot.mechanism))
            block_events.append((slot.basis, emitted_turns))
            gadgets.append(
                GadgetRecord(
                    0,  # fixed after emission
                    slot.basis,
                    slot.mechanism,
                    k_draw=k,
                    direction=direction,
                )
            )
            slot_idx += 1
        mid = GateLayer(
            LayerKind.ENTANGLING, cz_pairs=block.cz_pairs, rotations=tuple(rotations)
        )
        emitted_per_block.append(
            {"lead": lead, "mid": mid, "trail": trail, "events": block_events}
        )

    # Apply the literal swaps to the emitted order.
    emitted: list[GateLayer] = []
    for parts in emitted_per_block:
        emitted.append(parts["lead"])
        emitted.append(parts["mid"])
        emitted.append(parts["trail"])
    for b in range(depth - 1):
        if swap_bits[b]:
            i = 3 * b + 2  # trailing layer of block b
            emitted[i], emitted[i + 1] = emitted[i + 1], emitted[i]

    # Equivalent unswapped traversal: a swap equals inserting the layer
    # commutator right after the earlier block's entangling layer.
    for b, parts in enumerate(emitted_per_block):
        lead, mid, trail = parts["lead"], parts["mid"], parts["trail"]
        tracker.through_layer(lead.tableau(n))
        cz_only = GateLayer(LayerKind.ENTANGLING, cz_pairs=mid.cz_pairs)
        tracker.through_layer(cz_only.tableau(n))
        for basis, turns in parts["events"]:
            tracker.rotation_event(basis, turns)
        if b < depth - 1 and swap_bits[b]:
            for q in range(n):
                combos = _swap_commutator_events(int(codes[b][q]), int(codes[b + 1][q]))
                for axis, turns in combos:
                    tracker.rotation_event(PauliString.single(n, q, axis), turns)
        tracker.through_layer(trail.tableau(n))

    tail = tracker.build_tail(rng)
    tail_layers = _tail_to_layers(tail, n)
    tail_start = 1 + len(emitted)
    layers.extend(emitted)
    layers.extend(tail_layers)
    layers.append(GateLayer(LayerKind.BOUNDARY, t=t))
    layers.append(GateLayer(LayerKind.MEASUREMENT))

    circuit = LogicalCircuit(
        n, tuple(layers), {"builder": "trap", "construction": "modified"}
    )
    # fix gadget layer indices on the emitted order
    final_gadgets = []
    gi = 0
    for idx, layer in enumerate(circuit.layers):
        if layer.kind is LayerKind.ENTANGLING and idx < tail_start:
            for _ in layer.rotations:
                g = gadgets[gi]
                final_gadgets.append(
                    GadgetRecord(idx, g.basis, g.mechanism, 1, g.k_draw, g.direction)
                )
                gi += 1
    record = {
        "cz_orientations": [[int(x) for x in bits] for bits in orientations],
        "swap_bits": [int(x) for x in swap_bits],
        "k_draws": k_draws,
        "directions": directions,
        "tail": [[p.to_label(), turns] for p, turns in tail],
    }
    return TrapInstance(
        circuit=circuit,
        t=t,
        pair_codes=tuple(tuple(int(c) for c in row) for row in codes),
        magic_variant=None,
        construction=Construction.MODIFIED,
        purified=False,
        gadgets=tuple(final_gadgets),
        tail_layer_indices=tuple(range(tail_start, tail_start + len(tail_layers))),
        randomization=record,
    )


# ---------------------------------------------------------------------------
# noise binding and determinism checking
# ---------------------------------------------------------------------------


def trap_channels(trap: TrapInstance, regime: RegimeConfig) -> CircuitChannels:
    """Noise locations for a compiled trap under a regime configuration.

    Mirrors the target treatment: Clifford locations (single-qubit layers,
    boundary layers, CZ pairs, identity slots, and correction-tail
    operations) at the Clifford rate, gadget slots at the rotation rate with
    one extra location per gadget when purified.
    """
    n = trap.n
    pc = regime.clifford_rate
    pr = regime.rotation_rate
    gadgets_by_layer: dict[int, list[GadgetRecord]] = {}
    for g in trap.gadgets:
        gadgets_by_layer.setdefault(g.layer_index, []).append(g)
    tail = set(trap.tail_layer_indices)

    per_layer: list[tuple] = []
    for idx, layer in enumerate(trap.circuit.layers):
        chans: list = []
        if layer.kind in (LayerKind.SINGLE, LayerKind.BOUNDARY):
            if pc > 0:
                chans = [depolarizing(pc, (q,)) for q in range(n)]
        elif layer.kind is LayerKind.ENTANGLING:
            busy: set[int] = set()
            for pair in layer.cz_pairs:
                busy.update(pair)
                if pc > 0:
                    chans.append(depolarizing(pc, pair))
            if idx in tail:
                for rot in layer.rotations:
                    busy.update(rot.support)
                    if pc > 0:
                        chans.append(depolarizing(pc, rot.support))
            else:
                for g in gadgets_by_layer.get(idx, []):
                    busy.update(g.basis.support)
                    if pr > 0:
                        locations = g.repetitions * (2 if trap.purified else 1)
                        chans.extend(
                            depolarizing(pr, g.basis.support) for _ in range(locations)
                        )
            if pc > 0:
                chans.extend(depolarizing(pc, (q,)) for q in range(n) if q not in busy)
        per_layer.append(tuple(chans))

    boundary = tuple(depolarizing(pc, (q,)) for q in range(n)) if pc > 0 else ()
    return CircuitChannels(n, boundary, tuple(per_layer), boundary)


def deterministic_zero_output(circuit: LogicalCircuit) -> bool:
    """True iff the noiseless circuit always measures the all-zero string.

    Evolves the Z stabilizer generators of |0..0> through the circuit
    tableau; the output is deterministically zero exactly when every evolved
    generator is Z-type with a +1 sign.
    """
    tab = circuit.tableau()
    for q in range(circuit.n):
        img = tab.conjugate(PauliString.single(circuit.n, q, "Z"))
        if img.x_bits != 0 or img.sign != 1:
            return False
    return True
