"""Monte Carlo Pauli-frame simulation of Clifford trap circuits.

Three paths cover the workloads:

* :func:`run_trap_shot` - reference single-shot propagation, kept simple and
  cross-checked against the dense oracle;
* :func:`run_trap_shots` - many shots of one fixed trap, vectorised over
  shots via per-channel flip lookup tables built from suffix tableaus;
* :class:`TrapEnsemble` - one shot each of many independently drawn traps,
  vectorised over the trap axis (the protocol's access pattern).

Signs never matter here: measurement flips are the X-support of the final
frame, and cancellation means the frame is the identity up to phase.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .circuits import LayerKind, LogicalCircuit
from .noise import CircuitChannels, RegimeConfig, StochasticPauliChannel, depolarizing
from .pauli import CliffordTableau, PauliString, multiply
from .traps import TargetSkeleton, TrapInstance

__all__ = [
    "ShotOutcome",
    "run_trap_shot",
    "run_trap_shots",
    "TrapEnsemble",
    "EnsembleShotStats",
    "bernoulli_positions",
    "AliasSampler",
    "write_shot_log",
]


@dataclass(frozen=True)
class ShotOutcome:
    """Measured bitstring (after mask unflip) and the trap pass/fail flag."""

    bitstring: int
    failed: bool


class NonCliffordCircuit(ValueError):
    """Frame simulation hit a non-Clifford rotation (a compiler bug)."""


@lru_cache(maxsize=64)
def _layer_tableaus(circuit: LogicalCircuit) -> tuple[CliffordTableau, ...]:
    tabs = []
    for layer in circuit.gate_layers:
        if not layer.is_clifford():
            raise NonCliffordCircuit("trap circuits must be Clifford-only")
        tabs.append(layer.tableau(circuit.n))
    return tuple(tabs)


def run_trap_shot(
    trap: TrapInstance,
    channels: CircuitChannels,
    rng: np.random.Generator,
    mask: int = 0,
) -> ShotOutcome:
    """Propagate one sampled error frame through the trap circuit.

    Samples one Pauli per channel, pushes the accumulated frame through each
    layer tableau, flips measured bits where the final frame has X or Y
    support, undoes the measurement twirl with ``mask``, and compares with
    the all-zero expected output.
    """
    circuit = trap.circuit
    n = circuit.n
    tabs = _layer_tableaus(circuit)
    frame = PauliString.identity(n)
    for ch in channels.prep:
        e = ch.sample(n, rng)
        if e is not None:
            frame = multiply(e, frame)
    for tab, layer_chans in zip(tabs, channels.per_layer):
        frame = tab.conjugate(frame)
        for ch in layer_chans:
            e = ch.sample(n, rng)
            if e is not None:
                frame = multiply(e, frame)
    for ch in channels.meas:
        e = ch.sample(n, rng)
        if e is not None:
            frame = multiply(e, frame)
    bits = frame.x_bits ^ mask if mask else frame.x_bits
    return ShotOutcome(bits, bits != trap.expected_output)


# ---------------------------------------------------------------------------
# bulk path: many shots of one trap
# ---------------------------------------------------------------------------


def bernoulli_positions(n_trials: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Indices of successes in a Bernoulli(p) stream, via geometric gaps."""
    if p <= 0.0 or n_trials == 0:
        return np.empty(0, dtype=np.int64)
    if p >= 1.0:
        return np.arange(n_trials, dtype=np.int64)
    chunks = []
    last = -1
    expected = n_trials * p
    batch = max(int(expected + 6 * math.sqrt(expected + 1)) + 16, 16)
    while True:
        gaps = rng.geometric(p, size=batch)
        positions = np.cumsum(gaps) + last
        keep = positions[positions < n_trials]
        chunks.append(keep)
        if keep.size < positions.size:
            break
        last = int(positions[-1])
    return np.concatenate(chunks)


class AliasSampler:
    """Walker alias method for channels with many outcomes."""

    def __init__(self, probs: np.ndarray):
        k = probs.size
        scaled = probs * k
        self.prob = np.ones(k)
        self.alias = np.arange(k)
        small = [i for i in range(k) if scaled[i] < 1.0]
        large = [i for i in range(k) if scaled[i] >= 1.0]
        scaled = scaled.copy()
        while small and large:
            s, l = small.pop(), large.pop()
            self.prob[s] = scaled[s]
            self.alias[s] = l
            scaled[l] -= 1.0 - scaled[s]
            (small if scaled[l] < 1.0 else large).append(l)

    def sample(self, count: int, rng: np.random.Generator) -> np.ndarray:
        k = self.prob.size
        idx = rng.integers(0, k, size=count)
        accept = rng.random(count) < self.prob[idx]
        return np.where(accept, idx, self.alias[idx])


ALIAS_THRESHOLD = 32


def _pack_bits(value: int, words: int) -> np.ndarray:
    out = np.zeros(words, dtype=np.uint64)
    for w in range(words):
        out[w] = (value >> (64 * w)) & 0xFFFFFFFFFFFFFFFF
    return out


@dataclass
class _ChannelProgram:
    cond_probs: np.ndarray  # outcome probabilities given an error
    q: float  # total error rate
    x_lut: np.ndarray  # (outcomes, words) propagated X-support masks
    z_lut: np.ndarray
    sampler: AliasSampler | None


def _compile_shot_program(
    circuit: LogicalCircuit, channels: CircuitChannels
) -> tuple[list[_ChannelProgram], int, int]:
    """Per-channel flip LUTs via suffix tableaus at every noise boundary."""
    n = circuit.n
    words = (n + 63) // 64
    tabs = _layer_tableaus(circuit)
    # suffix[i] = conjugation by layers i..end (boundary i sits before layer i)
    suffix: list[CliffordTableau] = [CliffordTableau.identity(n)] * (len(tabs) + 1)
    for i in range(len(tabs) - 1, -1, -1):
        suffix[i] = tabs[i].then(suffix[i + 1])

    def boundary_channels():
        yield 0, channels.prep
        for i, chans in enumerate(channels.per_layer[: len(tabs)]):
            yield i + 1, chans
        yield len(tabs), channels.meas
        # channels attached to the measurement layer slot act at readout
        if len(channels.per_layer) > len(tabs):
            yield len(tabs), channels.per_layer[len(tabs)]

    programs = []
    for boundary, chans in boundary_channels():
        tab = suffix[boundary]
        for ch in chans:
            q = ch.total_error_rate
            if q <= 0.0:
                continue
            outs = ch.embedded_outcomes(n)
            probs = np.array([w for _, w in outs]) / q
            x_lut = np.zeros((len(outs), words), dtype=np.uint64)
            z_lut = np.zeros((len(outs), words), dtype=np.uint64)
            for k, (p, _) in enumerate(outs):
                img = tab.conjugate(p)
                x_lut[k] = _pack_bits(img.x_bits, words)
                z_lut[k] = _pack_bits(img.z_bits, words)
            sampler = AliasSampler(probs) if len(outs) > ALIAS_THRESHOLD else None
            programs.append(_ChannelProgram(probs, q, x_lut, z_lut, sampler))
    return programs, n, words


def _run_chunk(
    programs: list[_ChannelProgram],
    words: int,
    shots: int,
    seed: np.random.SeedSequence,
    track_z: bool,
) -> dict:
    rng = np.random.default_rng(seed)
    acc_x = np.zeros((shots, words), dtype=np.uint64)
    acc_z = np.zeros((shots, words), dtype=np.uint64) if track_z else None
    errors = np.zeros(shots, dtype=np.int32) if track_z else None
    for prog in programs:
        pos = bernoulli_positions(shots, prog.q, rng)
        if pos.size == 0:
            continue
        if prog.sampler is not None:
            outcome = prog.sampler.sample(pos.size, rng)
        elif prog.cond_probs.size == 1:
            outcome = np.zeros(pos.size, dtype=np.int64)
        else:
            outcome = rng.choice(prog.cond_probs.size, size=pos.size, p=prog.cond_probs)
        acc_x[pos] ^= prog.x_lut[outcome]
        if track_z:
            acc_z[pos] ^= prog.z_lut[outcome]
            errors[pos] += 1
    out = {"failed": (acc_x != 0).any(axis=1)}
    if track_z:
        out["clean_frame"] = ~((acc_x != 0).any(axis=1) | (acc_z != 0).any(axis=1))
        out["errors"] = errors
    return out


_FORK_STATE: dict = {}


def _fork_worker(args):
    chunk_shots, seed, track_z = args
    return _run_chunk(
        _FORK_STATE["programs"], _FORK_STATE["words"], chunk_shots, seed, track_z
    )


def run_trap_shots(
    trap: TrapInstance,
    channels: CircuitChannels,
    shots: int,
    seed: int,
    threads: int = 1,
    track_z: bool = False,
    chunks: int = 32,
) -> dict:
    """Simulate many shots of one trap; returns per-shot failure flags.

    The result is bit-identical for any ``threads`` value: work is split
    into a fixed number of chunks with independently derived RNG streams
    and re-assembled in chunk order.  With ``track_z`` the returned dict
    also carries per-shot error counts and identity-frame flags for
    false-positive classification.
    """
    programs, _, words = _compile_shot_program(trap.circuit, channels)
    chunks = min(max(chunks, 1), shots) or 1
    sizes = [shots // chunks + (1 if i < shots % chunks else 0) for i in range(chunks)]
    seeds = np.random.SeedSequence(seed).spawn(chunks)
    jobs = [(s, ss, track_z) for s, ss in zip(sizes, seeds)]
    if threads <= 1:
        parts = [_run_chunk(programs, words, s, ss, track_z) for s, ss, track_z in jobs]
    else:
        import multiprocessing

        ctx = multiprocessing.get_context("fork")
        _FORK_STATE["programs"] = programs
        _FORK_STATE["words"] = words
        with ctx.Pool(processes=threads) as pool:
            parts = pool.map(_fork_worker, jobs)
        _FORK_STATE.clear()
    out = {"failed": np.concatenate([p["failed"] for p in parts])}
    if track_z:
        out["clean_frame"] = np.concatenate([p["clean_frame"] for p in parts])
        out["errors"] = np.concatenate([p["errors"] for p in parts])
    return out


def write_shot_log(path, trap_id: str, failed: np.ndarray) -> None:
    """Append per-shot results as CSV rows (trap_id, shot, failed)."""
    import csv
    from pathlib import Path

    path = Path(path)
    new = not path.exists()
    with path.open("a", newline="") as fh:
        writer = csv.writer(fh)
        if new:
            writer.writerow(("trap_id", "shot", "failed"))
        for shot, flag in enumerate(failed):
            writer.writerow((trap_id, shot, int(flag)))


# ---------------------------------------------------------------------------
# ensemble path: one shot each of many random traps
# ---------------------------------------------------------------------------


@dataclass
class EnsembleShotStats:
    failed: np.ndarray  # (M,) bool: any measured bit flipped
    errors: np.ndarray  # (M,) int: sampled error events
    clean_frame: np.ndarray  # (M,) bool: frame is identity

    @property
    def stabilised(self) -> np.ndarray:
        """Errors occurred, nothing flipped, frame nontrivial."""
        return (~self.failed) & (self.errors > 0) & (~self.clean_frame)

    @property
    def cancelled(self) -> np.ndarray:
        """Errors occurred and combined to the identity frame."""
        return (~self.failed) & (self.errors > 0) & self.clean_frame


class TrapEnsemble:
    """Standard-construction trap draws vectorised over the trap axis.

    All traps share the target's entangling-gate skeleton; the random
    content (boundary bit, pair codes) lives in arrays indexed by trap.
    RUS targets change the block structure per trap and are not supported
    on this path.
    """

    def __init__(
        self,
        skeleton: TargetSkeleton,
        count: int,
        rng: np.random.Generator,
        purified: bool = False,
    ):
        for block in skeleton.blocks:
            for slot in block.slots:
                if slot.mechanism.value == "rus":
                    raise ValueError("RUS slots need per-instance compilation")
        self.skeleton = skeleton
        self.n = skeleton.n
        self.count = count
        self.purified = purified
        self.t = rng.integers(0, 2, size=count).astype(bool)
        depth = skeleton.depth
        self.pair_codes = rng.integers(0, 2, size=(depth, count, self.n)).astype(np.uint8)
        for b, block in enumerate(skeleton.blocks):
            if not block.cz_pairs:
                continue
            bits = rng.integers(0, 2, size=(count, len(block.cz_pairs)))
            for j, (a, c) in enumerate(block.cz_pairs):
                ctrl = np.where(bits[:, j] == 0, a, c)
                tgt = np.where(bits[:, j] == 0, c, a)
                rows = np.arange(count)
                self.pair_codes[b, rows, ctrl] = 0
                self.pair_codes[b, rows, tgt] = 1

    @classmethod
    def from_instances(cls, traps: Sequence[TrapInstance], skeleton: TargetSkeleton):
        obj = cls.__new__(cls)
        obj.skeleton = skeleton
        obj.n = skeleton.n
        obj.count = len(traps)
        obj.purified = traps[0].purified
        obj.t = np.array([bool(tr.t) for tr in traps])
        depth = skeleton.depth
        obj.pair_codes = np.zeros((depth, len(traps), obj.n), dtype=np.uint8)
        for m, tr in enumerate(traps):
            for b in range(depth):
                obj.pair_codes[b, m] = tr.pair_codes[b]
        return obj

    # boundary b sits before program step b; steps are the trap gate layers
    def program(self):
        steps: list[tuple] = [("boundary",)]
        for b in range(self.skeleton.depth):
            steps.append(("lead", b))
            steps.append(("mid", b))
            steps.append(("trail", b))
        steps.append(("boundary",))
        return steps

    def boundary_count(self) -> int:
        return len(self.program()) + 1

    def _apply_step(self, step, x, z):
        kind = step[0]
        if kind == "boundary":
            tt = self.t
            x[tt], z[tt] = z[tt].copy(), x[tt].copy()
            return
        b = step[1]
        if kind in ("lead", "trail"):
            h = self.pair_codes[b] == 1
            new_x = np.where(h, z, x)
            new_z = np.where(h, x, z ^ x)
            x[:], z[:] = new_x, new_z
            return
        for a, c in self.skeleton.blocks[b].cz_pairs:
            z[:, c] ^= x[:, a]
            z[:, a] ^= x[:, c]

    def propagate(
        self,
        injections: dict[int, list[tuple[np.ndarray | None, int, int]]],
        track: bool = False,
    ) -> tuple[np.ndarray, np.ndarray]:
        """Run all traps, XOR-ing injected (x_bits, z_bits) at boundaries.

        ``injections[b]`` holds (rows, x_bits, z_bits) applied before program
        step b; ``rows=None`` hits every trap.
        """
        x = np.zeros((self.count, self.n), dtype=bool)
        z = np.zeros((self.count, self.n), dtype=bool)
        steps = self.program()
        for b, step in enumerate(steps):
            for rows, xb, zb in injections.get(b, ()):  # inject, then act
                self._inject(x, z, rows, xb, zb)
            self._apply_step(step, x, z)
        for rows, xb, zb in injections.get(len(steps), ()):
            self._inject(x, z, rows, xb, zb)
        return x, z

    def _inject(self, x, z, rows, x_bits: int, z_bits: int):
        for q in range(self.n):
            if (x_bits >> q) & 1:
                if rows is None:
                    x[:, q] ^= True
                else:
                    x[rows, q] ^= True
            if (z_bits >> q) & 1:
                if rows is None:
                    z[:, q] ^= True
                else:
                    z[rows, q] ^= True

    # -- use cases ---------------------------------------------------------

    def detection_rate(self, boundary: int, pauli: PauliString) -> float:
        """Fraction of traps that flip a measured bit for a fixed injection."""
        x, _ = self.propagate({boundary: [(None, pauli.x_bits, pauli.z_bits)]})
        return float(x.any(axis=1).mean())

    def cancellation_flags(
        self, injections: list[tuple[int, PauliString]]
    ) -> np.ndarray:
        """True where the injected errors combine to the identity frame."""
        plan: dict[int, list] = {}
        for boundary, p in injections:
            plan.setdefault(boundary, []).append((None, p.x_bits, p.z_bits))
        x, z = self.propagate(plan)
        return ~(x.any(axis=1) | z.any(axis=1))

    def sample_shots(
        self,
        channel_plan: Sequence[tuple[int, StochasticPauliChannel]],
        rng: np.random.Generator,
    ) -> EnsembleShotStats:
        """One noisy shot per trap under per-boundary channels."""
        x = np.zeros((self.count, self.n), dtype=bool)
        z = np.zeros((self.count, self.n), dtype=bool)
        errors = np.zeros(self.count, dtype=np.int32)
        by_boundary: dict[int, list[StochasticPauliChannel]] = {}
        for boundary, ch in channel_plan:
            by_boundary.setdefault(boundary, []).append(ch)
        steps = self.program()
        for b in range(len(steps) + 1):
            for ch in by_boundary.get(b, ()):  # sample errors for this location
                self._sample_channel(ch, x, z, errors, rng)
            if b < len(steps):
                self._apply_step(steps[b], x, z)
        failed = x.any(axis=1)
        clean = ~(x.any(axis=1) | z.any(axis=1))
        return EnsembleShotStats(failed, errors, clean)

    def _sample_channel(self, ch, x, z, errors, rng):
        q = ch.total_error_rate
        if q <= 0.0:
            return
        hit = rng.random(self.count) < q
        rows = np.flatnonzero(hit)
        if rows.size == 0:
            return
        outs = ch.embedded_outcomes(self.n)
        probs = np.array([w for _, w in outs]) / q
        if len(outs) == 1:
            idx = np.zeros(rows.size, dtype=np.int64)
        else:
            idx = rng.choice(len(outs), size=rows.size, p=probs)
        errors[rows] += 1
        for k, (p, _) in enumerate(outs):
            sub = rows[idx == k]
            if sub.size == 0:
                continue
            for qubit in p.support:
                if (p.x_bits >> qubit) & 1:
                    x[sub, qubit] ^= True
                if (p.z_bits >> qubit) & 1:
                    z[sub, qubit] ^= True

    # -- channel plans -----------------------------------------------------

    def regime_channel_plan(
        self, regime: RegimeConfig
    ) -> list[tuple[int, StochasticPauliChannel]]:
        """Gate-granular locations mirroring ``traps.trap_channels``."""
        pc, pr = regime.clifford_rate, regime.rotation_rate
        plan: list[tuple[int, StochasticPauliChannel]] = []
        steps = self.program()

        def per_qubit(boundary, rate):
            if rate > 0:
                plan.extend((boundary, depolarizing(rate, (q,))) for q in range(self.n))

        per_qubit(0, pc)  # state preparation
        for idx, step in enumerate(steps):
            boundary = idx + 1  # noise follows its layer
            if step[0] in ("boundary", "lead", "trail"):
                per_qubit(boundary, pc)
                continue
            block = self.skeleton.blocks[step[1]]
            busy = set()
            for pair in block.cz_pairs:
                busy.update(pair)
                if pc > 0:
                    plan.append((boundary, depolarizing(pc, pair)))
            for slot in block.slots:
                busy.update(slot.support)
                if pr > 0:
                    locations = 2 if self.purified else 1
                    plan.extend(
                        (boundary, depolarizing(pr, slot.support))
                        for _ in range(locations)
                    )
            if pc > 0:
                plan.extend(
                    (boundary, depolarizing(pc, (q,)))
                    for q in range(self.n)
                    if q not in busy
                )
        per_qubit(len(steps), pc)  # measurement noise
        return plan

    def local_channel_plan(self, p: float) -> list[tuple[int, StochasticPauliChannel]]:
        """One 1-qubit depolarizing location per qubit per block gate layer."""
        plan = []
        for idx, step in enumerate(self.program()):
            if step[0] in ("lead", "mid", "trail") and p > 0:
                plan.extend((idx + 1, depolarizing(p, (q,))) for q in range(self.n))
        return plan
