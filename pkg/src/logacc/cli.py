"""Command-line front end: config loading, subcommands, deterministic IO.

Subcommands: accredit, sweep, iqp-region, false-positives, resources,
twirl-verify.  Configuration comes from an optional TOML file; flags
override file values and unknown keys are rejected.  Every command writes
its outputs plus a manifest capturing the spec, seed, and content hashes,
and is reproducible byte-for-byte from that manifest.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import experiments
from .circuits import build_iqp
from .experiments import (
    ADVANTAGE_HEADER,
    FALSE_POSITIVE_HEADER,
    MAGIC_SWEEP_HEADER,
    REGIME_SWEEP_HEADER,
    RESOURCE_HEADER,
    SweepSpec,
    write_csv,
    write_manifest,
)
from .noise import Regime, RegimeConfig
from .protocol import GENERAL, MARKOVIAN, NONMARKOVIAN_GATES, run_protocol
from .traps import Construction
from .twirling import (
    MagicVariant,
    magic_state_vector,
    pauli_group_matrices,
    random_cptp_kraus,
    twirl_channel,
    twirl_magic_state,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNMITIGABLE = 2

_NOISE_KEYS = {"regime", "p_phys", "distance", "t_gate_error"}
_RUN_KEYS = {
    "n",
    "layers",
    "family",
    "traps",
    "beta",
    "epsilon",
    "alpha",
    "construction",
    "cz_density",
    "repetitions",
}

_SOUNDNESS_BY_BETA = {0.0: MARKOVIAN, 0.5: NONMARKOVIAN_GATES, 7 / 8: GENERAL}


class ConfigError(ValueError):
    pass


def load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, "rb") as fh:
            cfg = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}")
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}")
    for section, keys in (("noise", _NOISE_KEYS), ("run", _RUN_KEYS)):
        unknown = set(cfg.get(section, {})) - keys
        if unknown:
            raise ConfigError(f"unknown keys in [{section}]: {sorted(unknown)}")
    unknown_sections = set(cfg) - {"noise", "run"}
    if unknown_sections:
        raise ConfigError(f"unknown config sections: {sorted(unknown_sections)}")
    return cfg


def regime_from_config(cfg: dict, args) -> RegimeConfig:
    noise = dict(cfg.get("noise", {}))
    if args.regime is not None:
        noise["regime"] = args.regime
    if args.p_phys is not None:
        noise["p_phys"] = args.p_phys
    if args.distance is not None:
        noise["distance"] = args.distance
    if getattr(args, "t_gate_error", None) is not None:
        noise["t_gate_error"] = args.t_gate_error
    if "regime" not in noise or "p_phys" not in noise:
        raise ConfigError("noise config needs at least 'regime' and 'p_phys'")
    try:
        regime = Regime(noise["regime"])
        return RegimeConfig(
            regime,
            float(noise["p_phys"]),
            distance=noise.get("distance"),
            t_gate_error=noise.get("t_gate_error"),
        )
    except ValueError as exc:
        raise ConfigError(str(exc))


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _emit(args, command: str, spec: dict, header, rows, stem: str) -> None:
    out = _out_dir(args)
    if args.format == "json":
        data_path = out / f"{stem}.json"
        data_path.write_text(json.dumps(rows, indent=2) + "\n")
    else:
        data_path = write_csv(out / f"{stem}.csv", header, rows)
    write_manifest(out / f"{stem}.manifest.json", command, spec, args.seed, [data_path])
    print(f"wrote {data_path}")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def cmd_accredit(args) -> int:
    cfg = load_config(args.config)
    run_cfg = dict(cfg.get("run", {}))
    regime = regime_from_config(cfg, args)
    n = int(args.n if args.n is not None else run_cfg.get("n", 5))
    layers = int(args.layers if args.layers is not None else run_cfg.get("layers", 10))
    traps = args.traps if args.traps is not None else run_cfg.get("traps")
    beta = float(args.beta if args.beta is not None else run_cfg.get("beta", 0.0))
    epsilon = float(args.epsilon if args.epsilon is not None else run_cfg.get("epsilon", 0.05))
    alpha = float(args.alpha if args.alpha is not None else run_cfg.get("alpha", 0.95))
    construction = Construction(
        args.construction
        if args.construction is not None
        else run_cfg.get("construction", "standard")
    )
    if beta not in _SOUNDNESS_BY_BETA:
        raise ConfigError(f"beta must be one of {sorted(_SOUNDNESS_BY_BETA)}")
    soundness = _SOUNDNESS_BY_BETA[beta]
    if soundness.requires_modified and construction is not Construction.MODIFIED:
        raise ConfigError(
            "beta 7/8 certifies only the modified construction; pass --construction modified"
        )

    repetitions = int(
        args.repetitions if args.repetitions is not None else run_cfg.get("repetitions", 1)
    )
    rng = np.random.default_rng(args.seed)
    target = build_iqp(n, layers, rng, cz_density=float(run_cfg.get("cz_density", 1.0)))
    out = _out_dir(args)
    paths = []
    result = None
    for rep in range(repetitions):
        result = run_protocol(
            target,
            regime,
            soundness,
            rng,
            m=int(traps) if traps is not None else None,
            epsilon=epsilon,
            alpha=alpha,
            construction=construction,
            seed=args.seed,
        )
        name = "accreditation.json" if repetitions == 1 else f"accreditation_{rep:03d}.json"
        path = out / name
        path.write_text(result.to_json() + "\n")
        paths.append(path)
    write_manifest(
        out / "accreditation.manifest.json",
        "accredit",
        {
            "n": n,
            "layers": layers,
            "regime": regime.to_dict(),
            "beta": beta,
            "repetitions": repetitions,
        },
        args.seed,
        paths,
    )
    print(f"wrote {paths[-1]}")
    print(f"gamma = {result.gamma:.6f} (m={result.m}, n_inc={result.n_inc})")
    if args.require_mitigable and not result.mitigation_ok:
        print("mitigation efficiency check failed", file=sys.stderr)
        return EXIT_UNMITIGABLE
    return EXIT_OK


def _sweep_spec_from_args(args, cfg) -> SweepSpec:
    run_cfg = dict(cfg.get("run", {}))
    noise = dict(cfg.get("noise", {}))
    p_grid = tuple(args.p_phys_grid or [noise.get("p_phys", 1e-3)])
    distances = tuple(args.distances or [noise.get("distance", 11)])
    regimes = tuple(Regime(r) for r in (args.regimes or [r.value for r in Regime]))
    return SweepSpec(
        family=args.family or run_cfg.get("family", "iqp"),
        qubit_counts=tuple(args.qubits or [run_cfg.get("n", 5)]),
        layer_counts=tuple(args.layers or [run_cfg.get("layers", 40)]),
        p_phys_grid=tuple(float(p) for p in p_grid),
        distances=tuple(int(d) for d in distances),
        regimes=regimes,
        t_gate_errors=tuple(args.t_gate_errors or []),
        traps_per_run=int(args.traps or run_cfg.get("traps", 500)),
        repetitions=int(args.repetitions or run_cfg.get("repetitions", 5)),
        seed=args.seed,
        cz_density=float(run_cfg.get("cz_density", 1.0)),
        beta=float(args.beta if args.beta is not None else run_cfg.get("beta", 0.0)),
    )


def cmd_sweep(args) -> int:
    cfg = load_config(args.config)
    spec = _sweep_spec_from_args(args, cfg)
    if spec.t_gate_errors:
        rows = experiments.magic_quality_sweep(spec)
        _emit(args, "sweep", spec.to_dict(), MAGIC_SWEEP_HEADER, rows, "magic_sweep")
    elif args.kind == "distance":
        rows = experiments.distance_sweep(spec)
        meta = dict(spec.to_dict(), threshold_p_phys=0.01)
        _emit(args, "sweep", meta, REGIME_SWEEP_HEADER, rows, "distance_sweep")
    else:
        rows = experiments.regime_sweep(spec)
        _emit(args, "sweep", spec.to_dict(), REGIME_SWEEP_HEADER, rows, "regime_sweep")
    return EXIT_OK


def cmd_iqp_region(args) -> int:
    grid = args.epsilon_grid or list(np.geomspace(1e-5, 1e-2, 61))
    rows = experiments.iqp_advantage_region([float(e) for e in grid])
    spec = {"epsilon_t_grid": [float(e) for e in grid]}
    _emit(args, "iqp-region", spec, ADVANTAGE_HEADER, rows, "iqp_advantage")
    return EXIT_OK


def cmd_false_positives(args) -> int:
    rows = experiments.false_positive_analysis(
        [int(n) for n in args.qubits or [5]],
        [float(p) for p in args.p_grid or [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2]],
        layers=int(args.layers or 40),
        shots=int(args.shots),
        seed=args.seed,
    )
    spec = {
        "qubits": [int(n) for n in args.qubits or [5]],
        "p_grid": [float(p) for p in args.p_grid or [1e-3, 2e-3, 5e-3, 1e-2, 2e-2, 5e-2]],
        "layers": int(args.layers or 40),
        "shots": int(args.shots),
    }
    _emit(args, "false-positives", spec, FALSE_POSITIVE_HEADER, rows, "false_positives")
    return EXIT_OK


def cmd_resources(args) -> int:
    layer_grid = [int(l) for l in args.layers or [1, 2, 4, 8, 16, 32, 64, 128, 256]]
    rows = experiments.resource_crossover(
        int(args.n or 10),
        layer_grid,
        p_phys=float(args.p_phys if args.p_phys is not None else 1e-5),
        seed=args.seed,
    )
    spec = {"n": int(args.n or 10), "layers": layer_grid, "p_phys": float(args.p_phys or 1e-5)}
    _emit(args, "resources", spec, RESOURCE_HEADER, rows, "resources")
    return EXIT_OK


def cmd_twirl_verify(args) -> int:
    rng = np.random.default_rng(args.seed)
    reports = []
    for n in (1, 2):
        group = pauli_group_matrices(n)
        for _ in range(args.channels):
            chi = twirl_channel(random_cptp_kraus(n, rng), group)
            reports.append(
                {
                    "variant": f"pauli_twirl_{n}q",
                    "max_offdiag": chi.max_offdiagonal(),
                    "diag_sum": chi.diagonal_sum(),
                }
            )
    z = np.diag([1.0, -1.0])
    for variant in MagicVariant:
        v = magic_state_vector(variant)
        w = z @ v
        basis = np.column_stack([v, w])
        worst = 0.0
        for _ in range(args.channels):
            g = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
            pert = g @ g.conj().T
            rho = 0.75 * np.outer(v, v.conj()) + 0.25 * pert / np.trace(pert)
            out = twirl_magic_state(rho, variant)
            in_basis = basis.conj().T @ out @ basis
            worst = max(worst, abs(in_basis[0, 1]))
        reports.append(
            {
                "variant": f"magic_{variant.value}",
                "max_offdiag": worst,
                "diag_sum": 1.0,
            }
        )
    out = _out_dir(args)
    path = out / "twirl_verify.json"
    path.write_text(json.dumps(reports, indent=2) + "\n")
    write_manifest(
        out / "twirl_verify.manifest.json",
        "twirl-verify",
        {"channels": args.channels},
        args.seed,
        [path],
    )
    print(f"wrote {path}")
    bad = [r for r in reports if r["max_offdiag"] > 1e-9]
    print(f"{len(reports)} channels verified, {len(bad)} above tolerance")
    return EXIT_OK if not bad else EXIT_CONFIG


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="logacc",
        description="Certify logical-circuit runs with trap-based accreditation.",
    )
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML configuration file")
    common.add_argument("--seed", type=int, default=0, help="master RNG seed")
    common.add_argument("--out", default="out", metavar="DIR", help="output directory")
    common.add_argument("--threads", type=int, default=1, help="worker cap for sweeps")
    common.add_argument(
        "--format", choices=("csv", "json"), default="csv", help="tabular output format"
    )

    noise = argparse.ArgumentParser(add_help=False)
    noise.add_argument("--regime", choices=[r.value for r in Regime])
    noise.add_argument("--p-phys", dest="p_phys", type=float)
    noise.add_argument("--distance", type=int)
    noise.add_argument("--t-gate-error", dest="t_gate_error", type=float)

    sub = parser.add_subparsers(dest="command", required=True)

    acc = sub.add_parser(
        "accredit", parents=[common, noise], help="single certified protocol run"
    )
    acc.add_argument("--n", type=int, help="logical qubit count")
    acc.add_argument("--layers", type=int, help="target circuit blocks")
    acc.add_argument("--traps", type=int, help="trap count M (default from epsilon/alpha)")
    acc.add_argument("--beta", type=float, help="cancellation allowance (0, 0.5, 0.875)")
    acc.add_argument("--epsilon", type=float, help="estimator accuracy")
    acc.add_argument("--alpha", type=float, help="confidence level")
    acc.add_argument(
        "--construction", choices=[c.value for c in Construction], help="trap construction"
    )
    acc.add_argument(
        "--repetitions", type=int, help="repeat the run for a certified sample set"
    )
    acc.add_argument(
        "--require-mitigable",
        action="store_true",
        help="exit 2 when the mitigation efficiency check fails",
    )
    acc.set_defaults(func=cmd_accredit)

    sw = sub.add_parser("sweep", parents=[common, noise], help="certified-bound sweeps")
    sw.add_argument("--kind", choices=("regime", "distance"), default="regime")
    sw.add_argument("--family", choices=("iqp", "trotter"))
    sw.add_argument("--qubits", type=int, nargs="+")
    sw.add_argument("--layers", type=int, nargs="+")
    sw.add_argument("--p-phys-grid", dest="p_phys_grid", type=float, nargs="+")
    sw.add_argument("--distances", type=int, nargs="+")
    sw.add_argument("--regimes", nargs="+", choices=[r.value for r in Regime])
    sw.add_argument("--t-gate-errors", dest="t_gate_errors", type=float, nargs="+")
    sw.add_argument("--traps", type=int)
    sw.add_argument("--repetitions", type=int)
    sw.add_argument("--beta", type=float)
    sw.set_defaults(func=cmd_sweep)

    region = sub.add_parser(
        "iqp-region", parents=[common], help="advantage-region closed form"
    )
    region.add_argument("--epsilon-grid", dest="epsilon_grid", type=float, nargs="+")
    region.set_defaults(func=cmd_iqp_region)

    fp = sub.add_parser(
        "false-positives", parents=[common], help="false-positive decomposition"
    )
    fp.add_argument("--qubits", type=int, nargs="+")
    fp.add_argument("--p-grid", dest="p_grid", type=float, nargs="+")
    fp.add_argument("--layers", type=int)
    fp.add_argument("--shots", type=int, default=20_000)
    fp.set_defaults(func=cmd_false_positives)

    res = sub.add_parser(
        "resources", parents=[common], help="physical-qubit crossover analysis"
    )
    res.add_argument("--n", type=int, help="logical qubit count")
    res.add_argument("--layers", type=int, nargs="+")
    res.add_argument("--p-phys", dest="p_phys", type=float)
    res.set_defaults(func=cmd_resources)

    tw = sub.add_parser(
        "twirl-verify", parents=[common], help="dense chi-matrix twirl verification"
    )
    tw.add_argument("--channels", type=int, default=20, help="random channels per case")
    tw.set_defaults(func=cmd_twirl_verify)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
