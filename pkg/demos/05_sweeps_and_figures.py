"""Small parameter sweep, CSV emission, and (optionally) a rendered figure.

Run: python demos/05_sweeps_and_figures.py
"""

import subprocess
import sys
from pathlib import Path

from logacc.experiments import (
    REGIME_SWEEP_HEADER,
    SweepSpec,
    iqp_advantage_region,
    regime_sweep,
    write_csv,
    write_manifest,
)

out_dir = Path("demo_out")

# ── A desk-scale regime comparison ──────────────────────────────────

spec = SweepSpec(
    qubit_counts=(4,),
    layer_counts=(10,),
    p_phys_grid=(1e-4, 1e-3, 5e-3, 1e-2),
    distances=(7,),
    traps_per_run=200,
    repetitions=3,
    seed=11,
)
rows = regime_sweep(spec)
csv_path = write_csv(out_dir / "regime_sweep.csv", REGIME_SWEEP_HEADER, rows)
write_manifest(out_dir / "regime_sweep.manifest.json", "demo-sweep", spec.to_dict(), 11, [csv_path])
print(f"wrote {csv_path} ({len(rows)} rows); a taste:")
for row in rows[:3]:
    print("  ", row)

# the advantage-region closed form needs no simulation at all
adv = iqp_advantage_region([1e-5, 1e-4, 1.04e-4, 1e-3])
print("\ntolerable T counts:", {r["epsilon_t"]: r["max_t_count"] for r in adv})

# ── Render a figure if matplotlib is around (secondary component) ───

spec_path = out_dir / "figure_spec.json"
spec_path.write_text(
    '{"kind": "regime", "input": "%s", "output": "%s"}'
    % (csv_path, out_dir / "regime_sweep.png")
)
render = Path(__file__).parents[1] / "figures" / "render.py"
proc = subprocess.run([sys.executable, str(render), "--spec", str(spec_path)])
if proc.returncode == 0:
    print(f"figure written to {out_dir / 'regime_sweep.png'}")
else:
    print("figure rendering skipped (matplotlib unavailable?)")
