"""Parameter sweeps reproducing the numerical studies, emitted as CSV rows.

Every sweep is reproducible bit-exactly from its spec and seed: child RNG
streams are derived per grid point and repetition, and rows are emitted in a
deterministic order.  The CSV headers are fixed and documented in the README.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .circuits import (
    GateLayer,
    LayerKind,
    LogicalCircuit,
    Mechanism,
    RotationGate,
    build_iqp,
    heisenberg_chain,
)
from .noise import Regime, RegimeConfig
from .protocol import MARKOVIAN, SoundnessParams, run_protocol
from .simulator import TrapEnsemble
from .traps import TargetSkeleton

__all__ = [
    "SweepSpec",
    "regime_sweep",
    "distance_sweep",
    "magic_quality_sweep",
    "iqp_advantage_region",
    "advantage_crossing_epsilon",
    "false_positive_analysis",
    "stabilisation_false_positive_rate",
    "resource_crossover",
    "build_trotter_layers",
    "write_csv",
    "write_manifest",
    "ONE_NORM_ADVANTAGE_BUDGET",
    "TVD_ADVANTAGE_BUDGET",
    "CLASSICAL_T_GATE_LIMIT",
]

ONE_NORM_ADVANTAGE_BUDGET = 1.0 / 192.0
TVD_ADVANTAGE_BUDGET = 1.0 / 384.0
CLASSICAL_T_GATE_LIMIT = 50
SURFACE_PATCH_QUBITS = 2  # physical qubits per logical = 2 d^2 (data + measure)
DISTILLATION_PATCH_OVERHEAD = 15  # logical-patch-equivalents for a T factory


@dataclass(frozen=True)
class SweepSpec:
    """Grid description shared by the regime/distance/magic sweeps."""

    family: str = "iqp"  # "iqp" or "trotter"
    qubit_counts: tuple[int, ...] = (5,)
    layer_counts: tuple[int, ...] = (40,)
    p_phys_grid: tuple[float, ...] = (1e-3,)
    distances: tuple[int, ...] = (11,)
    regimes: tuple[Regime, ...] = (Regime.NISQ, Regime.PFTQC, Regime.FTQC)
    t_gate_errors: tuple[float, ...] = ()
    traps_per_run: int = 500
    repetitions: int = 5
    seed: int = 0
    cz_density: float = 1.0
    field_strength: float = 1.0
    beta: float = 0.0

    def __post_init__(self):
        if self.family not in ("iqp", "trotter"):
            raise ValueError(f"unknown circuit family {self.family!r}")
        if self.traps_per_run < 1 or self.repetitions < 1:
            raise ValueError("traps_per_run and repetitions must be >= 1")

    def soundness(self) -> SoundnessParams:
        from .protocol import GENERAL, NONMARKOVIAN_GATES

        return {0.0: MARKOVIAN, 0.5: NONMARKOVIAN_GATES, 7 / 8: GENERAL}[self.beta]

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["regimes"] = [r.value for r in self.regimes]
        return out


def build_trotter_layers(
    n: int, rotation_layers: int, field_strength: float, rng: np.random.Generator
) -> LogicalCircuit:
    """Generic product-formula circuit with a fixed rotation-layer budget.

    Cycles through the nearest-neighbour Heisenberg term sequence (forward
    then reverse per pass, second-order style) until ``rotation_layers``
    rotations have been laid down.  Used by the sweeps, where the layer
    count, not the simulated time, is the controlled variable.
    """
    if rotation_layers < 1:
        raise ValueError("need at least one rotation layer")
    terms = heisenberg_chain(n, field_strength, rng)
    order = terms + terms[::-1]
    layers: list[GateLayer] = []
    idle = ("I",) * n
    for i in range(rotation_layers):
        coeff, basis = order[i % len(order)]
        angle = coeff * 0.5  # unit evolution time per pass
        if angle == 0.0:
            angle = 0.5
        layers.append(GateLayer(LayerKind.SINGLE, gates=idle))
        layers.append(
            GateLayer(
                LayerKind.ENTANGLING,
                rotations=(RotationGate(basis, angle, Mechanism.PROJECTIVE),),
            )
        )
        layers.append(GateLayer(LayerKind.SINGLE, gates=idle))
    layers.append(GateLayer(LayerKind.MEASUREMENT))
    meta = {"builder": "trotter_layers", "rotation_layers": rotation_layers}
    return LogicalCircuit(n, tuple(layers), meta)


def _build_target(spec: SweepSpec, n: int, layers: int, rng: np.random.Generator):
    if spec.family == "iqp":
        return build_iqp(n, layers, rng, cz_density=spec.cz_density)
    return build_trotter_layers(n, layers, spec.field_strength, rng)


def _regime_config(
    regime: Regime, p_phys: float, d: int, t_gate_error: float | None = None
) -> RegimeConfig:
    if regime is Regime.NISQ:
        return RegimeConfig(regime, p_phys, t_gate_error=t_gate_error)
    return RegimeConfig(regime, p_phys, distance=d, t_gate_error=t_gate_error)


def _gamma_stats(
    spec: SweepSpec,
    target,
    config: RegimeConfig,
    point_seed: np.random.SeedSequence,
) -> tuple[float, float]:
    gammas = []
    for rep_seed in point_seed.spawn(spec.repetitions):
        rng = np.random.default_rng(rep_seed)
        res = run_protocol(
            target,
            config,
            spec.soundness(),
            rng,
            m=spec.traps_per_run,
        )
        gammas.append(res.gamma)
    arr = np.array(gammas)
    std = arr.std(ddof=1) if arr.size > 1 else 0.0
    return float(arr.mean()), float(std)


REGIME_SWEEP_HEADER = ("regime", "n", "layers", "p_phys", "d", "gamma_mean", "gamma_std")


def regime_sweep(spec: SweepSpec) -> list[dict]:
    """Certified-bound means per (regime, n, layers, p_phys, d) grid point.

    NISQ rows carry d = 0 (no encoding).  Each point averages
    ``spec.repetitions`` independent protocol runs of ``spec.traps_per_run``
    freshly sampled traps.
    """
    root = np.random.SeedSequence(spec.seed)
    rows = []
    grid = [
        (regime, n, layers, p, d)
        for regime in spec.regimes
        for n in spec.qubit_counts
        for layers in spec.layer_counts
        for p in spec.p_phys_grid
        for d in (spec.distances if regime is not Regime.NISQ else (0,))
    ]
    seeds = root.spawn(len(grid) + 1)
    target_rng = np.random.default_rng(seeds[-1])
    targets = {}
    for (regime, n, layers, p, d), point_seed in zip(grid, seeds):
        if (n, layers) not in targets:
            targets[(n, layers)] = _build_target(spec, n, layers, target_rng)
        config = _regime_config(regime, p, d)
        mean, std = _gamma_stats(spec, targets[(n, layers)], config, point_seed)
        rows.append(
            {
                "regime": regime.value,
                "n": n,
                "layers": layers,
                "p_phys": p,
                "d": d,
                "gamma_mean": mean,
                "gamma_std": std,
            }
        )
    return rows


def distance_sweep(spec: SweepSpec) -> list[dict]:
    """Regime sweep restricted to the encoded regimes over a distance grid."""
    regimes = tuple(r for r in spec.regimes if r is not Regime.NISQ)
    if not regimes:
        raise ValueError("distance sweep needs at least one encoded regime")
    return regime_sweep(dataclasses.replace(spec, regimes=regimes))


MAGIC_SWEEP_HEADER = (
    "regime",
    "n",
    "layers",
    "p_phys",
    "d",
    "t_gate_error",
    "gamma_mean",
    "gamma_std",
)


def magic_quality_sweep(spec: SweepSpec) -> list[dict]:
    """Certified bound against the magic-state-fed gate error rate."""
    if not spec.t_gate_errors:
        raise ValueError("magic sweep needs a t_gate_errors grid")
    root = np.random.SeedSequence(spec.seed)
    regimes = tuple(r for r in spec.regimes if r is not Regime.NISQ)
    grid = [
        (regime, n, layers, p, d, te)
        for regime in regimes
        for n in spec.qubit_counts
        for layers in spec.layer_counts
        for p in spec.p_phys_grid
        for d in spec.distances
        for te in spec.t_gate_errors
    ]
    seeds = root.spawn(len(grid) + 1)
    target_rng = np.random.default_rng(seeds[-1])
    targets = {}
    rows = []
    for (regime, n, layers, p, d, te), point_seed in zip(grid, seeds):
        if (n, layers) not in targets:
            targets[(n, layers)] = _build_target(spec, n, layers, target_rng)
        config = _regime_config(regime, p, d, t_gate_error=te)
        mean, std = _gamma_stats(spec, targets[(n, layers)], config, point_seed)
        rows.append(
            {
                "regime": regime.value,
                "n": n,
                "layers": layers,
                "p_phys": p,
                "d": d,
                "t_gate_error": te,
                "gamma_mean": mean,
                "gamma_std": std,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# advantage region (closed form)
# ---------------------------------------------------------------------------

ADVANTAGE_HEADER = ("epsilon_t", "max_t_count", "classical_t_count")


def max_tolerable_t_gates(epsilon_t: float, budget: float = ONE_NORM_ADVANTAGE_BUDGET) -> int:
    """Largest T count with (1 - eps_T)^N keeping the error within budget.

    Models the output error of a circuit with perfect Cliffords and N noisy
    T gates as 1 - (1 - eps_T)^N; inverting at the advantage budget gives
    N_max = floor(ln(1 - budget) / ln(1 - eps_T)).
    """
    if not 0.0 < epsilon_t < 1.0:
        raise ValueError("epsilon_t must lie in (0, 1)")
    if epsilon_t >= budget:
        return 0
    return int(math.floor(math.log1p(-budget) / math.log1p(-epsilon_t)))


def advantage_crossing_epsilon(
    t_count: int = CLASSICAL_T_GATE_LIMIT, budget: float = ONE_NORM_ADVANTAGE_BUDGET
) -> float:
    """Error rate where N_max crosses a given T count: 1-(1-budget)^(1/N)."""
    return -math.expm1(math.log1p(-budget) / t_count)


def iqp_advantage_region(epsilon_t_grid: Sequence[float]) -> list[dict]:
    """Reconstructed advantage-region curve (modelled, not paper data)."""
    rows = []
    for eps in epsilon_t_grid:
        rows.append(
            {
                "epsilon_t": eps,
                "max_t_count": max_tolerable_t_gates(eps),
                "classical_t_count": CLASSICAL_T_GATE_LIMIT,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# false-positive decomposition
# ---------------------------------------------------------------------------

FALSE_POSITIVE_HEADER = ("n", "p", "fp_total", "fp_stab", "fp_canc", "fp_stab_analytic")


def stabilisation_false_positive_rate(k: int, p: float) -> float:
    """Closed form (1 - 2p/3)^k - (1 - p)^k for k local depolarizing sites."""
    if k < 0 or not 0.0 <= p <= 1.0:
        raise ValueError("need k >= 0 and p in [0, 1]")
    return (1.0 - 2.0 * p / 3.0) ** k - (1.0 - p) ** k


def false_positive_analysis(
    n_grid: Sequence[int],
    p_grid: Sequence[float],
    layers: int = 40,
    shots: int = 40_000,
    seed: int = 0,
    cz_density: float = 1.0,
) -> list[dict]:
    """Monte Carlo split of undetected-error shots into the two sources.

    Runs one shot each of ``shots`` freshly drawn traps per grid point under
    the simplified local depolarizing model (one location per qubit per
    block gate layer, noiseless preparation and readout), classifying every
    undetected-error shot as stabilisation (frame commutes with the
    measurement but is nontrivial) or cancellation (frame is the identity).
    The analytic column evaluates the closed form at k = 3 * layers * n.
    """
    root = np.random.SeedSequence(seed)
    rows = []
    grid = [(n, p) for n in n_grid for p in p_grid]
    seeds = root.spawn(len(grid) + 1)
    target_rng = np.random.default_rng(seeds[-1])
    targets = {}
    for (n, p), point_seed in zip(grid, seeds):
        if n not in targets:
            targets[n] = build_iqp(n, layers, target_rng, cz_density=cz_density)
        skeleton = TargetSkeleton.from_circuit(targets[n])
        draw_rng, noise_rng = (np.random.default_rng(s) for s in point_seed.spawn(2))
        ensemble = TrapEnsemble(skeleton, shots, draw_rng)
        stats = ensemble.sample_shots(ensemble.local_channel_plan(p), noise_rng)
        fp_stab = float(stats.stabilised.mean())
        fp_canc = float(stats.cancelled.mean())
        rows.append(
            {
                "n": n,
                "p": p,
                "fp_total": fp_stab + fp_canc,
                "fp_stab": fp_stab,
                "fp_canc": fp_canc,
                "fp_stab_analytic": stabilisation_false_positive_rate(3 * layers * n, p),
            }
        )
    return rows


# ---------------------------------------------------------------------------
# resource crossover
# ---------------------------------------------------------------------------

RESOURCE_HEADER = (
    "layers",
    "regime",
    "min_distance",
    "min_physical_qubits",
    "optimal_regime",
)


def _location_profile(target: LogicalCircuit) -> dict[str, list[int]]:
    """Count noise locations by (kind, support size) for the model gamma."""
    profile = {"clifford_1q": 2 * target.n, "clifford_2q": 0, "rotation": []}
    # trap boundaries add two single-qubit layers
    profile["clifford_1q"] += 2 * target.n
    for layer in target.gate_layers:
        if layer.kind is LayerKind.SINGLE:
            profile["clifford_1q"] += target.n
        elif layer.kind is LayerKind.ENTANGLING:
            busy = 0
            for _ in layer.cz_pairs:
                profile["clifford_2q"] += 1
                busy += 2
            for rot in layer.rotations:
                profile["rotation"].append(len(rot.support))
                busy += len(rot.support)
            profile["clifford_1q"] += target.n - busy
    return profile


def _model_gamma(profile: dict, config: RegimeConfig) -> float:
    """Deterministic upper-bound proxy: gamma = 2 * p_err of the location set."""
    pc, pr = config.clifford_rate, config.rotation_rate
    log_ok = 0.0
    log_ok += profile["clifford_1q"] * math.log1p(-pc)
    log_ok += profile["clifford_2q"] * math.log1p(-pc)
    extra = 2 if config.purified else 1
    for _ in range(extra):
        for _w in profile["rotation"]:
            log_ok += math.log1p(-pr)
    p_err = -math.expm1(log_ok)
    return 2.0 * p_err


def physical_qubit_cost(regime: Regime, n: int, d: int) -> int:
    """Surface-code footprint: 2 d^2 per logical patch, plus a distillation
    factory worth 15 patches in the fully fault-tolerant regime."""
    if regime is Regime.NISQ:
        return n
    patches = n + (DISTILLATION_PATCH_OVERHEAD if regime is Regime.FTQC else 0)
    return patches * SURFACE_PATCH_QUBITS * d * d


def resource_crossover(
    logical_qubits: int,
    layer_grid: Sequence[int],
    p_phys: float = 1e-5,
    tvd_budget: float = TVD_ADVANTAGE_BUDGET,
    d_max: int = 51,
    seed: int = 0,
    cz_density: float = 1.0,
) -> list[dict]:
    """Minimum code distance and physical qubits to certify the budget.

    For every layer count and regime, finds the smallest odd distance whose
    model-predicted gamma lands below the budget; a regime with no distance
    up to ``d_max`` good enough is unviable (empty columns).  The optimal
    regime per layer count is the viable one with the fewest physical
    qubits.
    """
    rng = np.random.default_rng(seed)
    rows = []
    for layers in layer_grid:
        target = build_iqp(logical_qubits, layers, rng, cz_density=cz_density)
        profile = _location_profile(target)
        found: dict[Regime, tuple[int | None, int | None]] = {}
        for regime in (Regime.NISQ, Regime.PFTQC, Regime.FTQC):
            if regime is Regime.NISQ:
                gamma = _model_gamma(profile, RegimeConfig(regime, p_phys))
                ok = gamma < tvd_budget
                found[regime] = (0, logical_qubits) if ok else (None, None)
                continue
            best = None
            for d in range(3, d_max + 1, 2):
                config = RegimeConfig(regime, p_phys, distance=d)
                if _model_gamma(profile, config) < tvd_budget:
                    best = d
                    break
            if best is None:
                found[regime] = (None, None)
            else:
                found[regime] = (best, physical_qubit_cost(regime, logical_qubits, best))
        viable = {r: c for r, (d, c) in found.items() if c is not None}
        optimal = min(viable, key=viable.get).value if viable else ""
        for regime in (Regime.NISQ, Regime.PFTQC, Regime.FTQC):
            d, cost = found[regime]
            rows.append(
                {
                    "layers": layers,
                    "regime": regime.value,
                    "min_distance": "" if d is None else d,
                    "min_physical_qubits": "" if cost is None else cost,
                    "optimal_regime": optimal,
                }
            )
    return rows


# ---------------------------------------------------------------------------
# CSV + manifest plumbing
# ---------------------------------------------------------------------------


def write_csv(path: Path | str, header: Sequence[str], rows: Iterable[dict]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(header))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
    return path


def content_hash(path: Path | str) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(
    path: Path | str, command: str, spec: dict, seed: int, outputs: Sequence[Path | str]
) -> Path:
    path = Path(path)
    manifest = {
        "command": command,
        "spec": spec,
        "seed": seed,
        "outputs": [
            {"path": str(Path(p).name), "sha256": content_hash(p)} for p in outputs
        ],
    }
    path.write_text(json.dumps(manifest, indent=2, sort_keys=False) + "\n")
    return path
