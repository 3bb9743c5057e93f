"""Small accuracy sweep comparing all five detectors.

A desk-scale version of the benchmark figures: mean localization error vs
SNR for each detector at two particle radii (20 trials per cell).  Expect a
few minutes of runtime; pass jobs>1 below if you have the cores free.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from symtrack.experiments import ALL_DETECTORS, SweepConfig, run_sweep, write_summary_csv

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

config = SweepConfig(
    detectors=ALL_DETECTORS,
    radii=(10, 50),
    snrs=(0.1, 0.5, 1.0, 3.0, 10.0, 100.0),
    trials_per_cell=20,
    base_seed=42,
    jobs=2,
)
print("running sweep (this takes a few minutes)...")
result = run_sweep(config)
write_summary_csv(result, os.path.join(OUT, "benchmark_summary.csv"))

fig, axes = plt.subplots(1, len(config.radii), figsize=(6 * len(config.radii), 4.5), sharey=True)
for ax, radius in zip(np.atleast_1d(axes), config.radii):
    for det in config.detectors:
        means = [result.cell(det, radius, snr).mean_error for snr in config.snrs]
        ax.loglog(config.snrs, means, "o-", label=det)
    ax.set_title(f"radius {radius}px, {config.trials_per_cell} trials/cell")
    ax.set_xlabel("SNR")
    ax.grid(True, which="both", alpha=0.3)
np.atleast_1d(axes)[0].set_ylabel("mean localization error (px)")
np.atleast_1d(axes)[0].legend()
fig.tight_layout()
fig.savefig(os.path.join(OUT, "benchmark.png"), dpi=110)
plt.close(fig)
print("wrote benchmark.png and benchmark_summary.csv")

print()
print(f"{'detector':8s}" + "".join(f"  r{r}@0.1" for r in config.radii))
for det in config.detectors:
    cells = [result.cell(det, r, 0.1).mean_error for r in config.radii]
    print(f"{det:8s}" + "".join(f"  {m:7.3f}" for m in cells))
