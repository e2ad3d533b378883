"""Command-line behaviour: exits, reproducibility, config handling."""

import json
import os
from pathlib import Path

import pytest

from logacc.cli import EXIT_CONFIG, EXIT_OK, EXIT_UNMITIGABLE, build_parser, main

GOLDEN_DIR = Path(__file__).parent / "data"


def run_cli(tmp_path, *argv):
    out = tmp_path / "out"
    return main(list(argv) + ["--out", str(out)]), out


# ---------------------------------------------------------------------------
# accredit
# ---------------------------------------------------------------------------


def test_accredit_zero_noise_gamma_zero(tmp_path):
    code, out = run_cli(
        tmp_path,
        "accredit",
        "--regime",
        "nisq",
        "--p-phys",
        "0.0",
        "--n",
        "3",
        "--layers",
        "4",
        "--traps",
        "80",
        "--seed",
        "5",
    )
    assert code == EXIT_OK
    result = json.loads((out / "accreditation.json").read_text())
    assert result["gamma"] == 0.0 and result["n_inc"] == 0
    manifest = json.loads((out / "accreditation.manifest.json").read_text())
    assert manifest["seed"] == 5


def test_accredit_seed_reproducible(tmp_path):
    args = [
        "accredit",
        "--regime",
        "nisq",
        "--p-phys",
        "0.02",
        "--n",
        "3",
        "--layers",
        "4",
        "--traps",
        "100",
        "--seed",
        "42",
    ]
    code1, out1 = main(args + ["--out", str(tmp_path / "a")]), tmp_path / "a"
    code2, out2 = main(args + ["--out", str(tmp_path / "b")]), tmp_path / "b"
    assert code1 == code2 == EXIT_OK
    assert (out1 / "accreditation.json").read_bytes() == (
        out2 / "accreditation.json"
    ).read_bytes()


def test_accredit_beta_construction_mismatch_exits_1(tmp_path):
    code, _ = run_cli(
        tmp_path,
        "accredit",
        "--regime",
        "nisq",
        "--p-phys",
        "0.001",
        "--beta",
        "0.875",
        "--construction",
        "standard",
        "--traps",
        "10",
    )
    assert code == EXIT_CONFIG


def test_accredit_require_mitigable_exit_2(tmp_path):
    # heavy noise drives gamma past the mitigation threshold
    code, out = run_cli(
        tmp_path,
        "accredit",
        "--regime",
        "nisq",
        "--p-phys",
        "0.2",
        "--n",
        "4",
        "--layers",
        "8",
        "--traps",
        "120",
        "--require-mitigable",
    )
    assert code == EXIT_UNMITIGABLE
    result = json.loads((out / "accreditation.json").read_text())
    assert result["mitigation_ok"] is False


def test_config_file_with_flag_override(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text(
        '[noise]\nregime = "nisq"\np_phys = 0.5\n\n[run]\nn = 3\nlayers = 4\ntraps = 50\n'
    )
    code, out = run_cli(
        tmp_path, "accredit", "--config", str(cfg), "--p-phys", "0.0", "--seed", "1"
    )
    assert code == EXIT_OK
    result = json.loads((out / "accreditation.json").read_text())
    assert result["regime"]["p_phys"] == 0.0  # flag wins over file
    assert result["m"] == 50


def test_unknown_config_keys_rejected(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('[noise]\nregime = "nisq"\np_phys = 0.001\nbogus = 3\n')
    code, _ = run_cli(tmp_path, "accredit", "--config", str(cfg))
    assert code == EXIT_CONFIG


def test_missing_config_file_rejected(tmp_path):
    code, _ = run_cli(tmp_path, "accredit", "--config", str(tmp_path / "nope.toml"))
    assert code == EXIT_CONFIG


# ---------------------------------------------------------------------------
# sweeps and other commands
# ---------------------------------------------------------------------------


def sweep_args(extra=()):
    return [
        "sweep",
        "--regime",
        "nisq",
        "--qubits",
        "3",
        "--layers",
        "4",
        "--p-phys-grid",
        "0.001",
        "0.005",
        "0.02",
        "--regimes",
        "nisq",
        "--traps",
        "60",
        "--repetitions",
        "2",
        "--seed",
        "3",
        *extra,
    ]


def test_sweep_writes_csv_and_manifest(tmp_path):
    code, out = run_cli(tmp_path, *sweep_args())
    assert code == EXIT_OK
    lines = (out / "regime_sweep.csv").read_text().splitlines()
    assert lines[0] == "regime,n,layers,p_phys,d,gamma_mean,gamma_std"
    assert len(lines) == 1 + 3  # three grid points, aggregated over repetitions
    manifest = json.loads((out / "regime_sweep.manifest.json").read_text())
    assert manifest["command"] == "sweep"


def test_sweep_rerun_byte_identical(tmp_path):
    main(sweep_args() + ["--out", str(tmp_path / "x")])
    main(sweep_args() + ["--out", str(tmp_path / "y")])
    a = (tmp_path / "x" / "regime_sweep.csv").read_bytes()
    b = (tmp_path / "y" / "regime_sweep.csv").read_bytes()
    assert a == b


def test_distance_sweep_manifest_carries_threshold_marker(tmp_path):
    code, out = run_cli(
        tmp_path,
        "sweep",
        "--kind",
        "distance",
        "--qubits",
        "3",
        "--layers",
        "3",
        "--p-phys-grid",
        "0.001",
        "--distances",
        "3",
        "--regimes",
        "ftqc",
        "--traps",
        "40",
        "--repetitions",
        "2",
    )
    assert code == EXIT_OK
    manifest = json.loads((out / "distance_sweep.manifest.json").read_text())
    assert manifest["spec"]["threshold_p_phys"] == 0.01


def test_output_directory_created(tmp_path):
    nested = tmp_path / "deep" / "nested" / "dir"
    code = main(["iqp-region", "--epsilon-grid", "1e-4", "--out", str(nested)])
    assert code == EXIT_OK
    assert (nested / "iqp_advantage.csv").exists()


def test_iqp_region_values(tmp_path):
    code, out = run_cli(tmp_path, "iqp-region", "--epsilon-grid", "1e-4", "1e-3")
    assert code == EXIT_OK
    lines = (out / "iqp_advantage.csv").read_text().splitlines()
    assert lines[1].startswith("0.0001,52,50")


def test_false_positives_command(tmp_path):
    code, out = run_cli(
        tmp_path,
        "false-positives",
        "--qubits",
        "3",
        "--p-grid",
        "0.001",
        "--layers",
        "5",
        "--shots",
        "2000",
    )
    assert code == EXIT_OK
    lines = (out / "false_positives.csv").read_text().splitlines()
    assert lines[0] == "n,p,fp_total,fp_stab,fp_canc,fp_stab_analytic"
    assert len(lines) == 2


def test_resources_command(tmp_path):
    code, out = run_cli(tmp_path, "resources", "--n", "5", "--layers", "2", "8")
    assert code == EXIT_OK
    lines = (out / "resources.csv").read_text().splitlines()
    assert len(lines) == 1 + 2 * 3


def test_twirl_verify_reports(tmp_path):
    code, out = run_cli(tmp_path, "twirl-verify", "--channels", "4")
    assert code == EXIT_OK
    reports = json.loads((out / "twirl_verify.json").read_text())
    assert all(r["max_offdiag"] < 1e-9 for r in reports)
    variants = {r["variant"] for r in reports}
    assert {"pauli_twirl_1q", "pauli_twirl_2q", "magic_pi", "magic_plus"} <= variants


def test_json_format_option(tmp_path):
    code, out = run_cli(tmp_path, "iqp-region", "--epsilon-grid", "1e-4", "--format", "json")
    assert code == EXIT_OK
    rows = json.loads((out / "iqp_advantage.json").read_text())
    assert rows[0]["max_t_count"] == 52


# ---------------------------------------------------------------------------
# help text golden files
# ---------------------------------------------------------------------------


@pytest.mark.parametrize(
    "name,argv",
    [
        ("help_top", []),
        ("help_accredit", ["accredit"]),
        ("help_sweep", ["sweep"]),
    ],
)
def test_help_text_matches_golden_file(name, argv, monkeypatch):
    monkeypatch.setenv("COLUMNS", "100")
    parser = build_parser()
    if argv:
        sub = {a.dest: a for a in parser._subparsers._group_actions}["command"]
        text = sub.choices[argv[0]].format_help()
    else:
        text = parser.format_help()
    golden = GOLDEN_DIR / f"{name}.txt"
    assert text == golden.read_text(), f"regenerate {golden} if the CLI changed"
