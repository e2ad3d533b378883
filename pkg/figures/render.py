#!/usr/bin/env python3
"""Render publication-style figures from sweep CSV files.

Consumes only the CSV outputs of the main package's CLI (the schemas are
part of its documented interface) plus a small JSON figure spec:

    {"kind": "regime", "input": "regime_sweep.csv", "output": "fig.png",
     "title": "...", "log_x": true, "log_y": false}

Kinds: regime, layers, distance, magic, advantage, false_positives,
resources.  Rendering is deterministic: fixed style, no timestamps, stable
ordering of series.

Usage: python figures/render.py --spec spec.json
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
matplotlib.rcParams["svg.hashsalt"] = "fixed-figure-ids"
import matplotlib.pyplot as plt  # noqa: E402

SURFACE_CODE_THRESHOLD = 0.01

EXPECTED_HEADERS = {
    "regime": ["regime", "n", "layers", "p_phys", "d", "gamma_mean", "gamma_std"],
    "layers": ["regime", "n", "layers", "p_phys", "d", "gamma_mean", "gamma_std"],
    "distance": ["regime", "n", "layers", "p_phys", "d", "gamma_mean", "gamma_std"],
    "magic": [
        "regime",
        "n",
        "layers",
        "p_phys",
        "d",
        "t_gate_error",
        "gamma_mean",
        "gamma_std",
    ],
    "advantage": ["epsilon_t", "max_t_count", "classical_t_count"],
    "false_positives": ["n", "p", "fp_total", "fp_stab", "fp_canc", "fp_stab_analytic"],
    "resources": [
        "layers",
        "regime",
        "min_distance",
        "min_physical_qubits",
        "optimal_regime",
    ],
}

REGIME_STYLE = {
    "nisq": ("tab:blue", "o"),
    "pftqc": ("tab:green", "s"),
    "ftqc": ("tab:orange", "^"),
}


class SchemaError(ValueError):
    pass


def read_rows(path: Path, kind: str) -> list[dict]:
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        expected = EXPECTED_HEADERS[kind]
        if list(header) != expected:
            raise SchemaError(
                f"{path}: header {header} does not match the {kind!r} schema {expected}"
            )
        rows = list(reader)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _fnum(value: str) -> float:
    return float(value) if value != "" else float("nan")


def _style_axes(ax, spec):
    if spec.get("log_x"):
        ax.set_xscale("log")
    if spec.get("log_y"):
        ax.set_yscale("log")
    ax.grid(True, which="both", alpha=0.3)
    if spec.get("title"):
        ax.set_title(spec["title"])


def render_gamma_series(rows, spec, ax, x_field: str, x_label: str):
    groups: dict[tuple, list] = {}
    for r in rows:
        key = (r["regime"], r["n"], r["d"])
        groups.setdefault(key, []).append(r)
    for key in sorted(groups):
        regime, n, d = key
        series = sorted(groups[key], key=lambda r: _fnum(r[x_field]))
        xs = [_fnum(r[x_field]) for r in series]
        ys = [_fnum(r["gamma_mean"]) for r in series]
        errs = [_fnum(r["gamma_std"]) for r in series]
        color, marker = REGIME_STYLE.get(regime, ("tab:gray", "x"))
        label = f"{regime} (n={n}" + (f", d={d})" if regime != "nisq" else ")")
        ax.errorbar(
            xs, ys, yerr=errs, color=color, marker=marker, capsize=3, label=label
        )
    ax.set_xlabel(x_label)
    ax.set_ylabel("certified TVD bound")
    ax.legend(fontsize=8)


def render_distance(rows, spec, ax):
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r["regime"], r["d"]), []).append(r)
    cmap = plt.get_cmap("viridis")
    distances = sorted({int(r["d"]) for r in rows})
    for (regime, d), series in sorted(groups.items()):
        series = sorted(series, key=lambda r: _fnum(r["p_phys"]))
        xs = [_fnum(r["p_phys"]) for r in series]
        ys = [_fnum(r["gamma_mean"]) for r in series]
        errs = [_fnum(r["gamma_std"]) for r in series]
        shade = cmap(distances.index(int(d)) / max(len(distances) - 1, 1))
        ax.errorbar(xs, ys, yerr=errs, color=shade, marker="o", capsize=3,
                    label=f"{regime} d={d}")
    ax.axvline(SURFACE_CODE_THRESHOLD, color="k", linestyle="--", linewidth=1,
               label="surface-code threshold")
    ax.set_xlabel("physical error rate")
    ax.set_ylabel("certified TVD bound")
    ax.legend(fontsize=7)


def render_magic(rows, spec, ax):
    groups: dict[tuple, list] = {}
    for r in rows:
        groups.setdefault((r["regime"], r["d"]), []).append(r)
    for (regime, d), series in sorted(groups.items()):
        series = sorted(series, key=lambda r: _fnum(r["t_gate_error"]))
        xs = [_fnum(r["t_gate_error"]) for r in series]
        ys = [_fnum(r["gamma_mean"]) for r in series]
        errs = [_fnum(r["gamma_std"]) for r in series]
        ax.errorbar(xs, ys, yerr=errs, marker="o", capsize=3, label=f"{regime} d={d}")
    ax.set_xlabel("magic-state-fed gate error rate")
    ax.set_ylabel("certified TVD bound")
    ax.legend(fontsize=8)


def render_advantage(rows, spec, ax):
    series = sorted(rows, key=lambda r: _fnum(r["epsilon_t"]))
    xs = [_fnum(r["epsilon_t"]) for r in series]
    ys = [_fnum(r["max_t_count"]) for r in series]
    classical = _fnum(series[0]["classical_t_count"])
    ax.plot(xs, ys, color="tab:blue", label="noise threshold")
    ax.axhline(classical, color="k", linestyle="--", label="classical simulation limit")
    upper = [max(y, classical) for y in ys]
    ax.fill_between(
        xs,
        [classical] * len(xs),
        upper,
        where=[y > classical for y in ys],
        alpha=0.25,
        color="tab:green",
        label="possible advantage",
    )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("T-gate error rate")
    ax.set_ylabel("tolerable T-gate count")
    ax.legend(fontsize=8)


def render_false_positives(rows, spec, ax):
    groups: dict[str, list] = {}
    for r in rows:
        groups.setdefault(r["n"], []).append(r)
    for n, series in sorted(groups.items()):
        series = sorted(series, key=lambda r: _fnum(r["p"]))
        xs = [_fnum(r["p"]) for r in series]
        for field, style in (
            ("fp_total", "-o"),
            ("fp_stab", "-s"),
            ("fp_canc", "-^"),
        ):
            ax.plot(xs, [_fnum(r[field]) for r in series], style, label=f"{field} (n={n})")
        ax.plot(
            xs,
            [_fnum(r["fp_stab_analytic"]) for r in series],
            "k--",
            label=f"closed form (n={n})",
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("per-location error rate")
    ax.set_ylabel("false-positive rate")
    ax.legend(fontsize=7)


def render_resources(rows, spec, ax):
    by_regime: dict[str, list] = {}
    optimal: dict[int, tuple] = {}
    for r in rows:
        by_regime.setdefault(r["regime"], []).append(r)
        if r["regime"] == r["optimal_regime"] and r["min_physical_qubits"] != "":
            optimal[int(r["layers"])] = (
                _fnum(r["min_physical_qubits"]),
                r["regime"],
            )
    for regime, series in sorted(by_regime.items()):
        series = [r for r in series if r["min_physical_qubits"] != ""]
        series = sorted(series, key=lambda r: int(r["layers"]))
        color, marker = REGIME_STYLE.get(regime, ("tab:gray", "x"))
        ax.plot(
            [int(r["layers"]) for r in series],
            [_fnum(r["min_physical_qubits"]) for r in series],
            linestyle="none",
            marker=marker,
            color=color,
            label=regime,
        )
    if optimal:
        layers = sorted(optimal)
        ax.plot(
            layers,
            [optimal[l][0] for l in layers],
            "k-",
            linewidth=1,
            label="optimal strategy",
        )
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("circuit layers")
    ax.set_ylabel("physical qubits")
    ax.legend(fontsize=8)


RENDERERS = {
    "regime": lambda rows, spec, ax: render_gamma_series(
        rows, spec, ax, "p_phys", "physical error rate"
    ),
    "layers": lambda rows, spec, ax: render_gamma_series(
        rows, spec, ax, "layers", "circuit layers"
    ),
    "distance": render_distance,
    "magic": render_magic,
    "advantage": render_advantage,
    "false_positives": render_false_positives,
    "resources": render_resources,
}


def render(spec: dict) -> Path:
    kind = spec.get("kind")
    if kind not in RENDERERS:
        raise SchemaError(f"unknown figure kind {kind!r}; choose from {sorted(RENDERERS)}")
    rows = read_rows(Path(spec["input"]), kind)
    fig, ax = plt.subplots(figsize=tuple(spec.get("figsize", (6.0, 4.0))))
    if kind in ("regime", "layers"):
        if spec.get("log_x", True):
            ax.set_xscale("log")
        if spec.get("log_y"):
            ax.set_yscale("log")
    RENDERERS[kind](rows, spec, ax)
    ax.grid(True, which="both", alpha=0.3)
    if spec.get("title"):
        ax.set_title(spec["title"])
    out = Path(spec["output"])
    out.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    metadata = {"Date": None} if out.suffix == ".svg" else {}
    fig.savefig(out, dpi=int(spec.get("dpi", 150)), metadata=metadata)
    plt.close(fig)
    return out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--spec", required=True, help="JSON figure spec (file path)")
    args = parser.parse_args(argv)
    try:
        spec = json.loads(Path(args.spec).read_text())
        specs = spec if isinstance(spec, list) else [spec]
        for one in specs:
            out = render(one)
            print(f"wrote {out}")
    except (SchemaError, FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
