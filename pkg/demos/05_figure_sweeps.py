"""Regenerate the two headline curves and emit plot-ready files.

Sweeps error rate against clock frequency (fixed 6.55 km) and against
fibre length (fixed 2 GHz, fibre vs equivalent attenuator), writing CSV
tables and gnuplot scripts under demos/out/. Pass --quick for a coarse,
fast pass.
"""

import argparse
import dataclasses
from pathlib import Path

from b92sim.sweep import emit_results, preset_fig2, preset_fig3, run_sweep

parser = argparse.ArgumentParser(description=__doc__)
parser.add_argument("--out", default=str(Path(__file__).parent / "out"))
parser.add_argument("--workers", type=int, default=4)
parser.add_argument("--quick", action="store_true",
                    help="fewer sifted bits per point (noisier, much faster)")
args = parser.parse_args()

target = 400 if args.quick else 3000

for preset in (preset_fig2, preset_fig3):
    spec = dataclasses.replace(preset(), target_sifted_bits=target)
    rows = run_sweep(spec, workers=args.workers)
    csv_path, gp_path = emit_results(rows, spec, args.out)
    print(f"{spec.name}: {len(rows)} points -> {csv_path}")
    print(f"  render with: gnuplot -c {gp_path.name}  (from {gp_path.parent})")
    for row in rows:
        tag = row.profile if len(spec.modes) == 1 else \
            f"{row.profile}/{row.channel_mode}"
        unit = "GHz" if spec.axis == "clock_hz" else "km"
        value = row.axis_value / 1e9 if spec.axis == "clock_hz" else row.axis_value
        print(f"  {value:6.2f} {unit}  {tag:20s} QBER {row.qber:.4f} "
              f"net {row.net_rate_bps:9.0f} bps")
    print()
