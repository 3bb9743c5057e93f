"""Benchmark harness: accuracy/precision sweeps, detector-variant ablation,
sinusoidal oscillation tracking with amplitude fitting and pixel-to-length
calibration, and the consecutive-ROI correlation evaluation on tethered
motion.

Trials are paired: within one trial every detector sees the same image and
the same initial guess.  Per-trial randomness comes from
``SeedSequence(base_seed, spawn_key=(radius_index, snr_index, trial))`` so
results are independent of execution order and safe to parallelize.
"""

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import least_squares

from . import __version__
from .baselines import BaselineParams, detect_cht, detect_com, detect_qi, detect_xcorr
from .csym import CsymParams, detect as detect_csym
from .errors import BoundaryError, CollinearityError, FitError, GeometryError, NoParticleError, SymtrackError
from .image import Point, Region, crop, euclidean_error
from .synth import ParticleSpec, TrialConfig, add_noise, make_trial, render_particle

Detector = Callable[[np.ndarray, Point], Point]

ABLATION_DETECTORS = ("csym", "csym-median", "csym-nohermite", "csym-median-nohermite")
BASELINE_DETECTORS = ("com", "cht", "xcorr", "qi")
ALL_DETECTORS = ("csym",) + BASELINE_DETECTORS
KNOWN_DETECTORS = ABLATION_DETECTORS + BASELINE_DETECTORS


def roi_for_radius(radius: int) -> int:
    """Smallest odd ROI side covering 2.5x the particle radius."""
    n = int(math.ceil(2.5 * radius))
    return n if n % 2 == 1 else n + 1


def cht_range_for_radius(radius: int) -> tuple[int, int]:
    """Default Hough voting radii bracketing the nominal particle radius."""
    return max(3, int(math.floor(0.4 * radius))), int(math.ceil(1.6 * radius))


def make_detector(detector_id: str, radius: int) -> Detector:
    """Build a ``(image, guess) -> Point`` callable for a detector id.

    ROI sizes and the Hough radius range are derived from the nominal
    particle radius.
    """
    if detector_id not in KNOWN_DETECTORS:
        raise ValueError(f"unknown detector {detector_id!r}; known: {KNOWN_DETECTORS}")
    roi_n = roi_for_radius(radius)
    if detector_id.startswith("csym"):
        params = CsymParams(
            roi_n=roi_n,
            use_median_prefilter="median" in detector_id,
            use_hermite="nohermite" not in detector_id,
        )
        return lambda image, guess: detect_csym(image, guess, params)
    params = BaselineParams(roi_n=roi_n, cht_radius_range=cht_range_for_radius(radius))
    if detector_id == "com":
        return lambda image, guess: detect_com(image, guess, params)
    if detector_id == "cht":
        return lambda image, guess: detect_cht(image, params)
    if detector_id == "xcorr":
        return lambda image, guess: detect_xcorr(image, guess, params)
    return lambda image, guess: detect_qi(image, guess, params)


@dataclass(frozen=True)
class SweepConfig:
    """Grid definition for an accuracy/precision sweep."""

    detectors: tuple[str, ...]
    radii: tuple[int, ...]
    snrs: tuple[float, ...]
    trials_per_cell: int = 100
    base_seed: int = 0
    image_size: int = 512
    initial_error_max: float = 2.0
    measure_time: bool = False
    jobs: int = 1

    def __post_init__(self):
        if self.trials_per_cell < 1:
            raise ValueError("trials_per_cell must be >= 1")
        if not (self.detectors and self.radii and self.snrs):
            raise ValueError("detectors, radii, and snrs must be non-empty")
        for det in self.detectors:
            if det not in KNOWN_DETECTORS:
                raise ValueError(f"unknown detector {det!r}; known: {KNOWN_DETECTORS}")
        if self.jobs < 1:
            raise ValueError("jobs must be >= 1")


@dataclass(frozen=True)
class TrialRecord:
    """One benchmark observation; error is NaN when the detector failed."""

    detector: str
    radius: int
    snr: float
    trial: int
    seed: int
    error: float
    elapsed: float
    failed: bool


@dataclass(frozen=True)
class CellStats:
    """Aggregate over one (detector, radius, snr) cell; failures excluded
    from the moments but counted."""

    detector: str
    radius: int
    snr: float
    n_ok: int
    n_failed: int
    mean_error: float
    sd_error: float


@dataclass
class SweepResult:
    config: SweepConfig
    records: list[TrialRecord] = field(default_factory=list)

    def cell_stats(self) -> list[CellStats]:
        """Per-cell mean/SD recomputed from the raw records."""
        cells: dict[tuple[str, int, float], list[TrialRecord]] = {}
        for rec in self.records:
            cells.setdefault((rec.detector, rec.radius, rec.snr), []).append(rec)
        out = []
        for detector in self.config.detectors:
            for radius in self.config.radii:
                for snr in self.config.snrs:
                    recs = cells.get((detector, radius, snr), [])
                    errors = np.array([r.error for r in recs if not r.failed])
                    n_failed = sum(r.failed for r in recs)
                    mean = float(errors.mean()) if errors.size else float("nan")
                    sd = float(errors.std(ddof=1)) if errors.size > 1 else 0.0
                    out.append(CellStats(detector, radius, snr, errors.size, n_failed, mean, sd))
        return out

    def cell(self, detector: str, radius: int, snr: float) -> CellStats:
        for stats in self.cell_stats():
            if (stats.detector, stats.radius, stats.snr) == (detector, radius, snr):
                return stats
        raise KeyError((detector, radius, snr))

    def errors(self, detector: str, radius: int | None = None, snr: float | None = None) -> np.ndarray:
        """Per-trial errors for a detector, ordered by (radius, snr, trial).

        Failed trials contribute NaN, which keeps arrays from different
        detectors aligned pairwise on the same trials.
        """
        selected = [
            r for r in self.records
            if r.detector == detector
            and (radius is None or r.radius == radius)
            and (snr is None or r.snr == snr)
        ]
        selected.sort(key=lambda r: (r.radius, r.snr, r.trial))
        return np.array([r.error for r in selected])


def trial_seed(base_seed: int, radius_index: int, snr_index: int, trial: int) -> int:
    """Deterministic 64-bit seed for one trial of one sweep cell."""
    ss = np.random.SeedSequence(base_seed, spawn_key=(radius_index, snr_index, trial))
    return int(ss.generate_state(1, np.uint64)[0])


def _run_cell_trial(config: SweepConfig, radius_index: int, snr_index: int, trial: int) -> list[TrialRecord]:
    radius = config.radii[radius_index]
    snr = config.snrs[snr_index]
    seed = trial_seed(config.base_seed, radius_index, snr_index, trial)
    trial_cfg = TrialConfig(
        radius=radius,
        snr=snr,
        image_size=config.image_size,
        seed=seed,
        initial_error_max=config.initial_error_max,
    )
    image, truth, guess = make_trial(trial_cfg)
    records = []
    for detector_id in config.detectors:
        detector = make_detector(detector_id, radius)
        start = time.perf_counter() if config.measure_time else 0.0
        try:
            estimate = detector(image, guess)
            error = euclidean_error(estimate, truth)
            failed = False
        except (NoParticleError, BoundaryError, GeometryError):
            error = float("nan")
            failed = True
        elapsed = (time.perf_counter() - start) if config.measure_time else 0.0
        records.append(TrialRecord(detector_id, radius, snr, trial, seed, error, elapsed, failed))
    return records


def _run_task(args) -> list[TrialRecord]:
    return _run_cell_trial(*args)


def run_sweep(config: SweepConfig) -> SweepResult:
    """Run the full grid; detectors are paired on identical trial images."""
    tasks = [
        (config, ri, si, t)
        for ri in range(len(config.radii))
        for si in range(len(config.snrs))
        for t in range(config.trials_per_cell)
    ]
    result = SweepResult(config=config)
    if config.jobs == 1:
        for task in tasks:
            result.records.extend(_run_task(task))
    else:
        with ProcessPoolExecutor(max_workers=config.jobs) as pool:
            for recs in pool.map(_run_task, tasks, chunksize=4):
                result.records.extend(recs)
    return result


def run_ablation(config: SweepConfig) -> SweepResult:
    """Sweep the four symmetry-detector variants (median x Hermite) on paired trials."""
    return run_sweep(replace(config, detectors=ABLATION_DETECTORS))


def write_trials_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "radius", "snr", "trial", "seed", "err_px", "elapsed_s", "failed"])
        for r in result.records:
            err = "" if math.isnan(r.error) else f"{r.error:.9f}"
            writer.writerow([r.detector, r.radius, _fmt_snr(r.snr), r.trial, r.seed, err, f"{r.elapsed:.6f}", int(r.failed)])


def write_summary_csv(result: SweepResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "radius", "snr", "n_ok", "failures", "mean_err_px", "sd_err_px"])
        for c in result.cell_stats():
            mean = "" if math.isnan(c.mean_error) else f"{c.mean_error:.9f}"
            writer.writerow([c.detector, c.radius, _fmt_snr(c.snr), c.n_ok, c.n_failed, mean, f"{c.sd_error:.9f}"])


def write_metadata(path, config: SweepConfig, extra: dict | None = None) -> None:
    """Flat key=value run description (no timestamps, so reruns are identical)."""
    lines = {
        "software": f"symtrack {__version__}",
        "detectors": ",".join(config.detectors),
        "radii_px": ",".join(str(r) for r in config.radii),
        "snrs": ",".join(_fmt_snr(s) for s in config.snrs),
        "snr_spacing": "explicit",
        "trials_per_cell": str(config.trials_per_cell),
        "base_seed": str(config.base_seed),
        "image_size_px": str(config.image_size),
        "initial_error_max_px": str(config.initial_error_max),
        "timing": "wall" if config.measure_time else "off",
    }
    if extra:
        lines.update({k: str(v) for k, v in extra.items()})
    with open(path, "w") as fh:
        for key, value in lines.items():
            fh.write(f"{key}={value}\n")


def _fmt_snr(snr: float) -> str:
    return "inf" if math.isinf(snr) else f"{snr:g}"


def log_snr_steps(lo: float = 0.1, hi: float = 100.0, steps: int = 11) -> tuple[float, ...]:
    """Logarithmically spaced SNR grid (the spacing used by default sweeps)."""
    return tuple(float(v) for v in np.geomspace(lo, hi, steps))


# ---------------------------------------------------------------------------
# Oscillation tracking, sinusoid amplitude fit, and calibration
# ---------------------------------------------------------------------------

@dataclass
class OscillationSeries:
    """Synthetic sequence of a particle oscillating along x."""

    frames: list[np.ndarray]
    amplitude: float
    period: float
    phase: float
    offset: float
    frame_rate: float
    true_x: np.ndarray
    particle: ParticleSpec


def synth_oscillation(spec: ParticleSpec, amplitude: float, period: float, n_frames: int,
                      snr: float, seed: int, phase: float = 0.0,
                      frame_rate: float = 500.0, size: int | None = None) -> OscillationSeries:
    """Render a sinusoidal x-oscillation around the particle's base position.

    Frame i places the particle at x(i) = offset + amplitude*sin(2*pi*i/period
    + phase) with y fixed; each frame gets an independent noise substream.
    Requires at least two full periods of frames.  When no frame size is
    given, the smallest frame accommodating the swing is used.
    """
    if period <= 0:
        raise ValueError("period must be positive")
    if n_frames < 2 * period:
        raise ValueError(f"need at least two periods of frames: {n_frames} < {2 * period:.0f}")
    offset = spec.true_center.x
    indices = np.arange(n_frames)
    true_x = offset + amplitude * np.sin(2.0 * np.pi * indices / period + phase)
    if size is None:
        size = int(math.ceil(max(offset + amplitude, spec.true_center.y) + 2 * spec.radius + 2))
    noise_streams = np.random.SeedSequence(int(seed)).spawn(n_frames)
    frames = []
    for i in range(n_frames):
        frame_spec = replace(spec, true_center=Point(float(true_x[i]), spec.true_center.y))
        clean = render_particle(frame_spec, size)
        noisy, _ = add_noise(clean, snr, noise_streams[i])
        frames.append(noisy)
    return OscillationSeries(frames, amplitude, period, phase, offset, frame_rate, true_x, spec)


def track_series(frames: Sequence[np.ndarray], detector: Detector, start: Point) -> np.ndarray:
    """Per-frame detected positions, shape (n, 2); failed frames are NaN.

    Each frame's guess is the previous successful detection (the start point
    for the first frame).
    """
    positions = np.full((len(frames), 2), np.nan)
    guess = start
    for i, frame in enumerate(frames):
        try:
            pos = detector(frame, guess)
        except (NoParticleError, BoundaryError):
            continue
        positions[i] = pos
        guess = pos
    return positions


@dataclass(frozen=True)
class SinusoidFit:
    """Sinusoid parameters recovered from a position trace (period held fixed)."""

    amplitude: float
    phase: float
    offset: float
    residual_rms: float


def fit_sinusoid(positions: np.ndarray, period: float) -> SinusoidFit:
    """Least-squares fit of a*sin(2*pi*i/period + phase) + offset.

    Gauss-Newton (Levenberg-Marquardt) with four phase starts, one per
    quadrant, to avoid the phase local minimum; the amplitude is returned
    non-negative with the sign absorbed into the phase.  NaN samples
    (failed detections) are ignored.
    """
    pos = np.asarray(positions, dtype=np.float64)
    valid = np.isfinite(pos)
    idx = np.flatnonzero(valid).astype(np.float64)
    vals = pos[valid]
    if vals.size < 4:
        raise FitError(f"need at least 4 valid samples, got {vals.size}")
    if idx[-1] - idx[0] < 2.0 * period:
        raise FitError("need at least two periods of data")
    omega = 2.0 * np.pi / period

    def residuals(p):
        a, phi, d = p
        return a * np.sin(omega * idx + phi) + d - vals

    a0 = max(math.sqrt(2.0) * float(vals.std()), 1e-6)
    d0 = float(vals.mean())
    best = None
    for phi0 in (0.0, 0.5 * np.pi, np.pi, 1.5 * np.pi):
        res = least_squares(residuals, x0=[a0, phi0, d0], method="lm")
        if best is None or res.cost < best.cost:
            best = res
    if best is None or not best.success:
        final = float("nan") if best is None else math.sqrt(2.0 * best.cost / vals.size)
        raise FitError(f"sinusoid fit did not converge (residual rms {final:.4g})")
    a, phi, d = best.x
    if a < 0:
        a, phi = -a, phi + np.pi
    phi = math.remainder(phi, 2.0 * np.pi)
    rms = math.sqrt(2.0 * best.cost / vals.size)
    return SinusoidFit(float(a), float(phi), float(d), rms)


@dataclass(frozen=True)
class CalibrationFit:
    """5th-degree polynomial mapping measured amplitude to real displacement.

    coefficients are ascending: D = c[0] + c[1]*a + ... + c[5]*a^5.
    """

    coefficients: tuple[float, ...]
    fitted: tuple[float, ...]
    mean_rel_error: float
    max_rel_error: float
    mean_abs_error: float
    correlation: float

    def project(self, amplitude: float) -> float:
        return float(np.polynomial.polynomial.polyval(amplitude, np.array(self.coefficients)))


def fit_calibration(measured_amplitudes: Sequence[float], true_displacements: Sequence[float]) -> CalibrationFit:
    """Least-squares 5th-degree calibration polynomial.

    Needs at least 6 distinct amplitude samples; a rank-deficient design
    matrix raises CollinearityError.  Projection errors are reported
    relative to the true displacements (and absolutely, which stays stable
    when displacements approach zero).
    """
    a = np.asarray(measured_amplitudes, dtype=np.float64)
    d = np.asarray(true_displacements, dtype=np.float64)
    if a.size != d.size:
        raise ValueError("amplitude and displacement lists must have equal length")
    if np.unique(a).size < 6:
        raise CollinearityError(f"need at least 6 distinct amplitudes, got {np.unique(a).size}")
    design = np.vander(a, 6, increasing=True)
    rank = np.linalg.matrix_rank(design)
    if rank < 6:
        raise CollinearityError(f"design matrix rank {rank} < 6")
    coefs, *_ = np.linalg.lstsq(design, d, rcond=None)
    fitted = design @ coefs
    abs_err = np.abs(fitted - d)
    denom = np.maximum(np.abs(d), 1e-12)
    rel_err = abs_err / denom
    corr = float(np.corrcoef(fitted, d)[0, 1]) if np.ptp(d) > 0 else 1.0
    return CalibrationFit(
        coefficients=tuple(float(c) for c in coefs),
        fitted=tuple(float(v) for v in fitted),
        mean_rel_error=float(rel_err.mean()),
        max_rel_error=float(rel_err.max()),
        mean_abs_error=float(abs_err.mean()),
        correlation=corr,
    )


@dataclass(frozen=True)
class AmplitudeResult:
    detector: str
    true_amplitude: float
    fitted_amplitude: float
    abs_error: float
    residual_rms: float


def run_oscillation_eval(detector_ids: Sequence[str], peak_to_peak_px: Sequence[float],
                         radius: int = 12, period: float = 50.0, n_frames: int = 200,
                         snr: float = 50.0, image_size: int = 128, seed: int = 0,
                         pattern: str = "spot") -> dict[str, list[AmplitudeResult]]:
    """Track synthetic oscillations and recover amplitudes per detector.

    All detectors see identical frame sequences (paired design).  The spot
    pattern mimics the immobilized-bead scene this experiment stands in for.
    """
    results: dict[str, list[AmplitudeResult]] = {det: [] for det in detector_ids}
    base = Point(image_size / 2.0, image_size / 2.0)
    spec = ParticleSpec(radius=radius, true_center=base, pattern=pattern)
    for seq_index, pk_pk in enumerate(peak_to_peak_px):
        amplitude = pk_pk / 2.0
        series = synth_oscillation(
            spec, amplitude, period, n_frames, snr,
            seed=trial_seed(seed, 0, 0, seq_index), size=image_size,
        )
        start = Point(series.true_x[0], base.y)
        for det in detector_ids:
            detector = make_detector(det, radius)
            xs = track_series(series.frames, detector, start)[:, 0]
            try:
                fit = fit_sinusoid(xs, period)
                err = abs(fit.amplitude - amplitude)
                results[det].append(AmplitudeResult(det, amplitude, fit.amplitude, err, fit.residual_rms))
            except FitError:
                results[det].append(AmplitudeResult(det, amplitude, float("nan"), float("inf"), float("inf")))
    return results


# ---------------------------------------------------------------------------
# Tethered-motion consecutive-ROI correlation
# ---------------------------------------------------------------------------

def make_tether_frames(n_frames: int, radius: int = 12, tether_radius: float = 5.0,
                       step_sigma: float = 1.0, snr: float = 10.0, image_size: int = 128,
                       seed: int = 0, pattern: str = "spot"):
    """Synthetic tethered motion: a Gaussian random walk reflected at the
    tether radius around a fixed anchor.

    Returns (frames, centers, anchor).  Frames carry the "original" noise at
    the given SNR; centers are the true per-frame particle positions.
    """
    root = np.random.SeedSequence(int(seed))
    ss_walk, ss_noise = root.spawn(2)
    rng = np.random.Generator(np.random.PCG64(ss_walk))
    anchor = Point(image_size / 2.0, image_size / 2.0)
    spec = ParticleSpec(radius=radius, true_center=anchor, pattern=pattern)

    centers = np.empty((n_frames, 2))
    pos = np.array([anchor.x, anchor.y])
    for i in range(n_frames):
        step = rng.normal(0.0, step_sigma, 2)
        pos = _reflect_into_tether(pos + step, anchor, tether_radius)
        centers[i] = pos

    noise_streams = ss_noise.spawn(n_frames)
    frames = []
    for i in range(n_frames):
        frame_spec = replace(spec, true_center=Point(centers[i, 0], centers[i, 1]))
        clean = render_particle(frame_spec, image_size)
        noisy, _ = add_noise(clean, snr, noise_streams[i])
        frames.append(noisy)
    return frames, centers, anchor


def _reflect_into_tether(pos: np.ndarray, anchor: Point, tether_radius: float) -> np.ndarray:
    delta = pos - np.array([anchor.x, anchor.y])
    dist = float(np.hypot(*delta))
    while dist > tether_radius:
        dist_new = 2.0 * tether_radius - dist
        if dist_new < 0:
            dist_new = abs(dist_new)
        delta = delta * (dist_new / dist)
        dist = dist_new
    return np.array([anchor.x, anchor.y]) + delta


def roi_correlation(roi_a: np.ndarray, roi_b: np.ndarray) -> float:
    """Zero-mean normalized correlation of two ROIs, clipped into [0, 1]."""
    sa, sb = roi_a.std(), roi_b.std()
    if sa == 0.0 or sb == 0.0:
        return 0.0
    value = ((roi_a - roi_a.mean()) * (roi_b - roi_b.mean())).mean() / (sa * sb)
    return float(np.clip(value, 0.0, 1.0))


@dataclass(frozen=True)
class TetherLevelStats:
    snr: float
    mean_corr: float
    sd_corr: float
    n_pairs: int
    n_skipped: int


def run_tether_eval(frames: Sequence[np.ndarray], detector: Detector, roi_n: int,
                    noise_snr_list: Sequence[float], start_guess: Point,
                    seed: int = 0) -> list[TetherLevelStats]:
    """Consecutive-ROI correlation under per-frame added noise.

    For each target SNR the detector runs on noise-degraded copies of the
    frames (tracking frame to frame from the start guess), a fixed-size ROI
    is cut from the *original* frame at each rounded detected position, and
    consecutive ROIs are correlated.  Frames where detection or the ROI crop
    fails are skipped and counted.
    """
    root = np.random.SeedSequence(int(seed))
    level_streams = root.spawn(len(noise_snr_list))
    out = []
    for level, target_snr in enumerate(noise_snr_list):
        frame_streams = level_streams[level].spawn(len(frames))
        rois: list[np.ndarray | None] = []
        skipped = 0
        guess = start_guess
        for i, frame in enumerate(frames):
            noisy, _ = add_noise(frame, target_snr, frame_streams[i])
            try:
                pos = detector(noisy, guess)
                region = Region(int(round(pos.x)), int(round(pos.y)), roi_n)
                rois.append(crop(frame, region))
                guess = pos
            except (NoParticleError, BoundaryError, SymtrackError):
                rois.append(None)
                skipped += 1
        corrs = [
            roi_correlation(a, b)
            for a, b in zip(rois[:-1], rois[1:])
            if a is not None and b is not None
        ]
        arr = np.array(corrs)
        mean = float(arr.mean()) if arr.size else float("nan")
        sd = float(arr.std(ddof=1)) if arr.size > 1 else 0.0
        out.append(TetherLevelStats(target_snr, mean, sd, arr.size, skipped))
    return out
