"""A small paired sweep and its log-log fit.

Usage: python demos/04_scaling_sweep.py [output-dir]
The acceptance suite runs the same protocol up to n=4096.
"""
import sys
from pathlib import Path

from cyclemix import ChainParams, SweepConfig, run_sweep, summarize
from cyclemix.lab import format_summary_csv, write_plot_data, write_records

out = Path(sys.argv[1] if len(sys.argv) > 1 else "sweep-demo")
config = SweepConfig(
    model="M2",
    alpha=1.5,
    sizes=(64, 128, 256, 512),
    trials_per_size=6,
    params=ChainParams.for_alpha(1.5),
    r_values=(0.0, 0.15),
    base_seed=1,
)
print(config.describe())

records = run_sweep(config, progress=lambda n, t: print(f"  n={n} trial={t}", end="\r"))
print()
summary = summarize(records, config.trim_fraction)
for row in summary.rows:
    print(f"n={row.n:4d} r={row.r:<4} median t_mix={row.t_mix_median:8.1f}  "
          f"median Phi bound={row.phi_median:.4f}")
for r, (slope, _, rms) in summary.exponents.items():
    print(f"r={r}: slope {slope:.3f} (rms {rms:.3f})")

# same files as `cyclemix sweep`
out.mkdir(parents=True, exist_ok=True)
write_records(out / "records.csv", records, config)
(out / "summary.csv").write_text(format_summary_csv(summary))
write_plot_data(out, summary)
print("wrote", sorted(p.name for p in out.iterdir()))
