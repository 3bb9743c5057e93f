"""Anatomy of the symmetry detector, stage by stage.

Renders one noisy particle, then shows: the four mirror templates at the
best candidate, both correlation maps over the search grid, the collapsed
symmetry profiles with their Hermite interpolation, and the final parabola
fit around the peak.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from symtrack.csym import (
    CsymParams,
    correlation_maps,
    detect,
    extract_templates,
    hermite_interpolate,
    symmetry_profiles,
)
from symtrack.image import Point
from symtrack.synth import ParticleSpec, add_noise, render_particle

OUT = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(OUT, exist_ok=True)

spec = ParticleSpec(radius=20, true_center=Point(96.37, 95.62), pattern="ring", background=0.55)
clean = render_particle(spec, 192)
image, sigma = add_noise(clean, 2.0, seed=7)
guess = Point(97.5, 94.6)
params = CsymParams(roi_n=51)

estimate = detect(image, guess, params)
print(f"truth    ({spec.true_center.x:.3f}, {spec.true_center.y:.3f})")
print(f"guess    ({guess.x:.3f}, {guess.y:.3f})")
print(f"detected ({estimate.x:.4f}, {estimate.y:.4f})")

anchor = (int(round(guess.x)), int(round(guess.y)))
templates = extract_templates(image, anchor, params.roi_n)
fig, axes = plt.subplots(1, 5, figsize=(16, 3.5))
axes[0].imshow(image, cmap="gray", vmin=0, vmax=1)
axes[0].plot(estimate.x, estimate.y, "c+", markersize=10)
axes[0].set_title("noisy frame")
for ax, template, name in zip(axes[1:], templates, ("left-mirrored", "right-mirrored",
                                                    "top-mirrored", "bottom-mirrored")):
    ax.imshow(template, cmap="gray", vmin=0, vmax=1)
    ax.set_title(name)
for ax in axes:
    ax.axis("off")
fig.tight_layout()
fig.savefig(os.path.join(OUT, "templates.png"), dpi=110)
plt.close(fig)
print("wrote templates.png")

maps = correlation_maps(image, anchor, params)
profiles = symmetry_profiles(maps.corr_x, maps.corr_y)
half = params.search_half

fig, axes = plt.subplots(2, 2, figsize=(10, 8))
for ax, data, title in ((axes[0, 0], maps.corr_x, "vertical-symmetry correlation"),
                        (axes[0, 1], maps.corr_y, "horizontal-symmetry correlation")):
    im = ax.imshow(data, cmap="viridis", extent=(-half - 0.5, half + 0.5, half + 0.5, -half - 0.5))
    ax.set_title(title)
    ax.set_xlabel("candidate dx (px)")
    ax.set_ylabel("candidate dy (px)")
    fig.colorbar(im, ax=ax, shrink=0.8)

for ax, profile, axis_name in ((axes[1, 0], profiles.sym_x, "x"), (axes[1, 1], profiles.sym_y, "y")):
    knots = np.arange(profile.size) - half
    pos, vals = hermite_interpolate(profile, params.peak_sample_step)
    ax.plot(pos - half, vals, "-", lw=1.2, label="Hermite interpolant")
    ax.plot(knots, profile, "ko", label="profile knots")
    truth_off = (spec.true_center.x - anchor[0]) if axis_name == "x" else (spec.true_center.y - anchor[1])
    est_off = (estimate.x - anchor[0]) if axis_name == "x" else (estimate.y - anchor[1])
    ax.axvline(truth_off, color="g", ls="--", label="truth")
    ax.axvline(est_off, color="c", ls=":", label="parabola vertex")
    ax.set_title(f"symmetry profile, {axis_name} axis")
    ax.set_xlabel(f"candidate d{axis_name} (px)")
    ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(os.path.join(OUT, "pipeline_stages.png"), dpi=110)
plt.close(fig)
print("wrote pipeline_stages.png")
