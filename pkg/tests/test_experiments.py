"""Sweep machinery: grids, closed forms, reproducibility, CSV plumbing."""

import math
from pathlib import Path

import numpy as np
import pytest

from logacc.experiments import (
    ADVANTAGE_HEADER,
    CLASSICAL_T_GATE_LIMIT,
    FALSE_POSITIVE_HEADER,
    ONE_NORM_ADVANTAGE_BUDGET,
    REGIME_SWEEP_HEADER,
    RESOURCE_HEADER,
    SweepSpec,
    advantage_crossing_epsilon,
    build_trotter_layers,
    content_hash,
    distance_sweep,
    false_positive_analysis,
    iqp_advantage_region,
    magic_quality_sweep,
    max_tolerable_t_gates,
    physical_qubit_cost,
    regime_sweep,
    resource_crossover,
    stabilisation_false_positive_rate,
    write_csv,
    write_manifest,
)
from logacc.noise import Regime


# ---------------------------------------------------------------------------
# closed forms
# ---------------------------------------------------------------------------


def test_max_tolerable_t_gates_reference_point():
    assert max_tolerable_t_gates(1e-4) == 52


def test_max_tolerable_t_gates_above_budget_is_zero():
    assert max_tolerable_t_gates(ONE_NORM_ADVANTAGE_BUDGET) == 0
    assert max_tolerable_t_gates(0.5) == 0


def test_advantage_crossing_brackets_classical_line():
    eps = advantage_crossing_epsilon(CLASSICAL_T_GATE_LIMIT)
    assert 1.0e-4 < eps < 1.1e-4
    assert max_tolerable_t_gates(eps * 0.999) >= 50
    assert max_tolerable_t_gates(eps * 1.001) < 50


def test_advantage_region_rows():
    rows = iqp_advantage_region([1e-4, 1e-3, 1e-2])
    assert [r["max_t_count"] for r in rows] == [52, 5, 0]
    assert all(r["classical_t_count"] == 50 for r in rows)
    assert set(rows[0]) == set(ADVANTAGE_HEADER)


def test_stabilisation_closed_form_values():
    assert stabilisation_false_positive_rate(600, 0.0) == 0.0
    val = stabilisation_false_positive_rate(600, 1e-3)
    assert abs(val - 0.1216) < 5e-4


def test_physical_qubit_accounting():
    assert physical_qubit_cost(Regime.NISQ, 10, 99) == 10
    # 2 d^2 per logical patch
    assert physical_qubit_cost(Regime.PFTQC, 1, 11) == 242
    assert physical_qubit_cost(Regime.FTQC, 10, 5) == (10 + 15) * 50


# ---------------------------------------------------------------------------
# sweeps (small, fast settings)
# ---------------------------------------------------------------------------


def small_spec(**kw):
    base = dict(
        family="iqp",
        qubit_counts=(4,),
        layer_counts=(6,),
        p_phys_grid=(1e-3,),
        distances=(5,),
        traps_per_run=120,
        repetitions=3,
        seed=7,
    )
    base.update(kw)
    return SweepSpec(**base)


def test_regime_sweep_rows_and_reproducibility():
    spec = small_spec()
    rows1 = regime_sweep(spec)
    rows2 = regime_sweep(spec)
    assert rows1 == rows2
    assert len(rows1) == 3  # one row per regime
    assert set(rows1[0]) == set(REGIME_SWEEP_HEADER)
    nisq = next(r for r in rows1 if r["regime"] == "nisq")
    assert nisq["d"] == 0


def test_regime_sweep_ordering_small_instance():
    # cheap version of the ordering claim: FTQC <= PFTQC <= NISQ at 1e-3
    spec = small_spec(
        qubit_counts=(5,),
        layer_counts=(12,),
        distances=(11,),
        traps_per_run=400,
        repetitions=3,
        seed=1,
    )
    rows = {r["regime"]: r["gamma_mean"] for r in regime_sweep(spec)}
    assert rows["ftqc"] <= rows["pftqc"] <= rows["nisq"]
    assert rows["pftqc"] < rows["nisq"]


def test_gamma_decreases_with_error_rate():
    spec = small_spec(
        regimes=(Regime.NISQ,),
        p_phys_grid=(1e-4, 1e-3, 1e-2),
        traps_per_run=300,
    )
    rows = regime_sweep(spec)
    means = [r["gamma_mean"] for r in sorted(rows, key=lambda r: r["p_phys"])]
    assert means[0] <= means[1] + 1e-9 <= means[2] + 1e-9


def test_distance_sweep_drops_nisq():
    rows = distance_sweep(small_spec(distances=(3, 5)))
    assert {r["regime"] for r in rows} == {"pftqc", "ftqc"}
    assert {r["d"] for r in rows} == {3, 5}


def test_distance_sweep_high_distance_no_worse_below_threshold():
    spec = small_spec(
        regimes=(Regime.FTQC,),
        qubit_counts=(4,),
        layer_counts=(10,),
        distances=(3, 13),
        traps_per_run=300,
        repetitions=3,
    )
    rows = {r["d"]: r for r in distance_sweep(spec)}
    slack = 2 * math.sqrt(rows[3]["gamma_std"] ** 2 + rows[13]["gamma_std"] ** 2)
    assert rows[13]["gamma_mean"] <= rows[3]["gamma_mean"] + slack


def test_magic_floor_at_low_distance():
    # perfect magic states cannot push gamma to zero at d=3: Clifford noise
    # at the logical rate keeps a floor
    spec = small_spec(
        regimes=(Regime.FTQC,),
        qubit_counts=(4,),
        layer_counts=(10,),
        distances=(3,),
        t_gate_errors=(1e-12,),
        traps_per_run=300,
        repetitions=2,
    )
    rows = magic_quality_sweep(spec)
    assert rows[0]["gamma_mean"] > 0.05


def test_magic_quality_sweep_tracks_override():
    spec = small_spec(
        regimes=(Regime.FTQC,),
        t_gate_errors=(1e-5, 1e-2),
        traps_per_run=200,
    )
    rows = magic_quality_sweep(spec)
    assert len(rows) == 2
    lo = next(r for r in rows if r["t_gate_error"] == 1e-5)
    hi = next(r for r in rows if r["t_gate_error"] == 1e-2)
    assert lo["gamma_mean"] <= hi["gamma_mean"]


def test_trotter_family_sweep_runs():
    spec = small_spec(family="trotter", qubit_counts=(3,), layer_counts=(8,))
    rows = regime_sweep(spec)
    assert len(rows) == 3


def test_build_trotter_layers_layer_budget():
    circuit = build_trotter_layers(4, 17, 1.0, np.random.default_rng(0))
    assert circuit.entangling_layer_count == 17
    assert circuit.rotation_count() == 17


# ---------------------------------------------------------------------------
# false-positive analysis
# ---------------------------------------------------------------------------


def test_false_positive_low_rate_point_matches_closed_form():
    # MC power chosen so the 3-sigma band contains the closed form's own
    # O((pk)^2) approximation error (~+0.002 here)
    rows = false_positive_analysis([5], [1e-3], shots=20_000, seed=3)
    row = rows[0]
    sigma = math.sqrt(row["fp_stab"] * (1 - row["fp_stab"]) / 20_000)
    assert abs(row["fp_stab"] - row["fp_stab_analytic"]) < 3 * sigma
    assert row["fp_canc"] < row["fp_stab"] / 10
    assert math.isclose(row["fp_total"], row["fp_stab"] + row["fp_canc"])
    assert set(row) == set(FALSE_POSITIVE_HEADER)


def test_false_positive_zero_rate_gives_zero_columns():
    rows = false_positive_analysis([4], [0.0], shots=2000, seed=1)
    assert rows[0]["fp_total"] == 0.0
    assert rows[0]["fp_stab"] == 0.0 and rows[0]["fp_canc"] == 0.0
    assert rows[0]["fp_stab_analytic"] == 0.0


# ---------------------------------------------------------------------------
# resource crossover
# ---------------------------------------------------------------------------


def test_resource_crossover_shape_and_regime_transition():
    rows = resource_crossover(10, [1, 4, 16, 64, 256], seed=5)
    assert set(rows[0]) == set(RESOURCE_HEADER)
    by_layers = {}
    for r in rows:
        by_layers.setdefault(r["layers"], {})[r["regime"]] = r
    optimal = [by_layers[l]["nisq"]["optimal_regime"] for l in (1, 4, 16, 64, 256)]
    # shallow circuits favour bare qubits, deep circuits full fault tolerance
    assert optimal[0] == "nisq"
    assert optimal[-1] == "ftqc"
    assert "pftqc" in optimal or "ftqc" in optimal[1:]
    # NISQ becomes unviable at depth
    assert by_layers[256]["nisq"]["min_distance"] == ""
    # FTQC viable throughout this grid
    assert by_layers[256]["ftqc"]["min_distance"] != ""


def test_resource_crossover_deterministic():
    a = resource_crossover(10, [2, 8], seed=9)
    b = resource_crossover(10, [2, 8], seed=9)
    assert a == b


# ---------------------------------------------------------------------------
# CSV + manifest plumbing
# ---------------------------------------------------------------------------


def test_write_csv_and_manifest_round_trip(tmp_path):
    rows = iqp_advantage_region([1e-4, 1e-3])
    csv_path = write_csv(tmp_path / "adv.csv", ADVANTAGE_HEADER, rows)
    text = csv_path.read_text()
    assert text.splitlines()[0] == ",".join(ADVANTAGE_HEADER)
    manifest = write_manifest(
        tmp_path / "adv.manifest.json", "iqp-region", {"grid": [1e-4, 1e-3]}, 0, [csv_path]
    )
    import json

    obj = json.loads(manifest.read_text())
    assert obj["outputs"][0]["sha256"] == content_hash(csv_path)
    # byte-identical rerun
    csv2 = write_csv(tmp_path / "adv2.csv", ADVANTAGE_HEADER, iqp_advantage_region([1e-4, 1e-3]))
    assert csv2.read_bytes() == csv_path.read_bytes()
