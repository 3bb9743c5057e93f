"""Gallery of the synthetic particle generator.

Renders the three built-in patterns at a few radii, shows color inversion
and background randomization, and walks one particle through the SNR range
used by the benchmarks.  Figures are written next to this script.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from symtrack.image import Point
from symtrack.synth import (
    ParticleSpec,
    TrialConfig,
    add_noise,
    load_radial_profile,
    make_trial,
    render_particle,
)

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

# --- pattern zoo -----------------------------------------------------------
fig, axes = plt.subplots(3, 3, figsize=(9, 9))
for row, pattern in enumerate(("spot", "ring", "airy")):
    for col, radius in enumerate((10, 25, 50)):
        spec = ParticleSpec(radius=radius, true_center=Point(128.0, 128.0), pattern=pattern)
        img = render_particle(spec, 256)
        axes[row, col].imshow(img, cmap="gray", vmin=0, vmax=1)
        axes[row, col].set_title(f"{pattern}, radius {radius}px")
        axes[row, col].axis("off")
fig.suptitle("Built-in radial patterns")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "patterns.png"), dpi=110)
plt.close(fig)
print("wrote patterns.png")

# --- SNR ladder ------------------------------------------------------------
spec = ParticleSpec(radius=25, true_center=Point(96.0, 96.0), pattern="spot", background=0.45)
clean = render_particle(spec, 192)
snrs = [100.0, 10.0, 1.0, 0.5, 0.1]
fig, axes = plt.subplots(1, len(snrs) + 1, figsize=(3 * (len(snrs) + 1), 3.2))
axes[0].imshow(clean, cmap="gray", vmin=0, vmax=1)
axes[0].set_title("noise-free")
axes[0].axis("off")
for ax, snr in zip(axes[1:], snrs):
    noisy, sigma = add_noise(clean, snr, seed=2)
    ax.imshow(noisy, cmap="gray", vmin=0, vmax=1)
    ax.set_title(f"SNR {snr:g}\n(sigma {sigma:.3f})")
    ax.axis("off")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "snr_ladder.png"), dpi=110)
plt.close(fig)
print("wrote snr_ladder.png")

# --- randomized benchmark trials -------------------------------------------
fig, axes = plt.subplots(2, 4, figsize=(12, 6))
for i, ax in enumerate(axes.ravel()):
    image, truth, guess = make_trial(TrialConfig(radius=30, snr=5.0, image_size=256, seed=i))
    ax.imshow(image, cmap="gray", vmin=0, vmax=1)
    ax.plot(truth.x, truth.y, "g+", markersize=12, label="truth")
    ax.plot(guess.x, guess.y, "rx", markersize=8, label="initial guess")
    ax.set_title(f"trial seed {i}")
    ax.axis("off")
axes[0, 0].legend(loc="lower right", fontsize=8)
fig.suptitle("Randomized trials: pattern, polarity, background, position, guess")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "random_trials.png"), dpi=110)
plt.close(fig)
print("wrote random_trials.png")

# --- custom radial profile from CSV -----------------------------------------
csv_path = os.path.join(OUT, "double_ring_profile.csv")
with open(csv_path, "w") as fh:
    fh.write("r_normalized,intensity_offset\n")
    for r, v in ((0.0, 1.0), (0.15, 0.6), (0.3, -0.3), (0.45, 0.8), (0.6, -0.2),
                 (0.75, 0.5), (0.9, 0.0), (1.0, 0.0)):
        fh.write(f"{r},{v}\n")
load_radial_profile(csv_path, name="double-ring")
spec = ParticleSpec(radius=35, true_center=Point(96.0, 96.0), pattern="double-ring")
img = render_particle(spec, 192)
fig, ax = plt.subplots(figsize=(4, 4))
ax.imshow(img, cmap="gray", vmin=0, vmax=1)
ax.set_title("user profile loaded from CSV")
ax.axis("off")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "custom_profile.png"), dpi=110)
plt.close(fig)
print(f"wrote custom_profile.png (profile CSV at {csv_path})")
