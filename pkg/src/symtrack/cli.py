"""Command-line front end.

Commands: detect, generate, sweep, ablation, oscillate, tether.  Every
randomized command takes --seed and reruns byte-identically.  Option
precedence is CLI flag > config file > built-in default; the config file is
flat ``key=value`` text using the long option names (without dashes) and the
same value syntax as the command line.

Coordinates are printed in the package convention ((0, 0) is the center of
the top-left pixel, x rightward, y downward) with 4 decimal places.
"""

import argparse
import csv
import math
import os
import sys

from . import __version__
from .baselines import BaselineParams, detect_cht, detect_com, detect_qi, detect_xcorr
from .csym import CsymParams, detect as detect_csym
from .errors import SymtrackError
from .experiments import (
    ABLATION_DETECTORS,
    ALL_DETECTORS,
    KNOWN_DETECTORS,
    SweepConfig,
    make_detector,
    make_tether_frames,
    fit_calibration,
    roi_for_radius,
    run_oscillation_eval,
    run_sweep,
    run_tether_eval,
    trial_seed,
    write_metadata,
    write_summary_csv,
    write_trials_csv,
)
from .fileio import load_image, write_pgm
from .image import Point
from .synth import BUILTIN_PATTERNS, TrialConfig, make_trial


def _point(text: str) -> Point:
    try:
        x, y = (float(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected X,Y floats, got {text!r}") from None
    return Point(x, y)


def _int_pair(text: str) -> tuple[int, int]:
    try:
        a, b = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected MIN,MAX integers, got {text!r}") from None
    return a, b


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in text.split(","))


def _float_list(text: str) -> tuple[float, ...]:
    return tuple(float(v) for v in text.split(","))


def _detector_list(text: str) -> tuple[str, ...]:
    dets = tuple(v.strip() for v in text.split(",") if v.strip())
    for det in dets:
        if det not in KNOWN_DETECTORS:
            raise argparse.ArgumentTypeError(f"unknown detector {det!r}; known: {','.join(KNOWN_DETECTORS)}")
    return dets


def _bool(text) -> bool:
    if isinstance(text, bool):
        return text
    return str(text).strip().lower() in ("1", "true", "yes", "on")


def _load_config(path) -> dict[str, str]:
    values = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise SymtrackError(f"{path}:{lineno}: expected key=value, got {line!r}")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


def _resolve(ns, key: str, default, convert):
    """CLI flag if given, else config-file value, else the default."""
    cli_value = getattr(ns, key)
    if cli_value is not None:
        return cli_value
    cfg = getattr(ns, "_config_values", {})
    if key in cfg:
        return convert(cfg[key])
    return default


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="symtrack",
        description="Subpixel particle localization and benchmark harness.",
    )
    parser.add_argument("--version", action="version", version=f"symtrack {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("detect", help="locate a particle in one image")
    p.add_argument("image", help="PGM (P5) or grayscale PNG file")
    p.add_argument("--algo", required=True, choices=ALL_DETECTORS)
    p.add_argument("--guess", type=_point, help="initial X,Y estimate (all detectors except cht)")
    p.add_argument("--roi", type=int, help="odd ROI side length in pixels")
    p.add_argument("--search-half", type=int, dest="search_half")
    p.add_argument("--median", action="store_true", default=None, help="enable the 3x3 median prefilter")
    p.add_argument("--no-hermite", action="store_true", default=None, dest="no_hermite")
    p.add_argument("--radius-range", type=_int_pair, dest="radius_range", help="MIN,MAX Hough radii (cht)")
    p.add_argument("--config")
    p.set_defaults(handler=cmd_detect)

    p = sub.add_parser("generate", help="write synthetic trial frames as PGM")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--count", type=int)
    p.add_argument("--radius", type=int)
    p.add_argument("--snr", type=float)
    p.add_argument("--size", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--bits", type=int, choices=(8, 16))
    p.add_argument("--pattern", choices=("random",) + BUILTIN_PATTERNS)
    p.add_argument("--config")
    p.set_defaults(handler=cmd_generate)

    for name, help_text in (("sweep", "accuracy/precision sweep over radii and SNRs"),
                            ("ablation", "sweep the four symmetry-detector variants")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--out-dir", dest="out_dir", required=True)
        if name == "sweep":
            p.add_argument("--detectors", type=_detector_list)
        p.add_argument("--radii", type=_int_list)
        p.add_argument("--snrs", type=_float_list)
        p.add_argument("--trials", type=int)
        p.add_argument("--seed", type=int)
        p.add_argument("--image-size", type=int, dest="image_size")
        p.add_argument("--jobs", type=int)
        p.add_argument("--timing", action="store_true", default=None,
                       help="record wall-clock per-trial timings (output no longer byte-stable)")
        p.add_argument("--config")
        p.set_defaults(handler=cmd_sweep if name == "sweep" else cmd_ablation)

    p = sub.add_parser("oscillate", help="track synthetic oscillations and fit amplitudes")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--detectors", type=_detector_list)
    p.add_argument("--peak-to-peak", type=_float_list, dest="peak_to_peak", help="peak-to-peak displacements in px")
    p.add_argument("--radius", type=int)
    p.add_argument("--period", type=float, help="frames per oscillation period")
    p.add_argument("--frames", type=int)
    p.add_argument("--snr", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--nm-per-px", type=float, dest="nm_per_px")
    p.add_argument("--config")
    p.set_defaults(handler=cmd_oscillate)

    p = sub.add_parser("tether", help="consecutive-ROI correlation on synthetic tethered motion")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--detectors", type=_detector_list)
    p.add_argument("--frames", type=int)
    p.add_argument("--radius", type=int)
    p.add_argument("--tether-radius", type=float, dest="tether_radius")
    p.add_argument("--step-sigma", type=float, dest="step_sigma")
    p.add_argument("--snr", type=float, help="SNR of the original frames")
    p.add_argument("--noise-snrs", type=_float_list, dest="noise_snrs")
    p.add_argument("--roi", type=int, help="odd evaluation ROI side")
    p.add_argument("--seed", type=int)
    p.add_argument("--config")
    p.set_defaults(handler=cmd_tether)

    return parser


def cmd_detect(ns) -> int:
    image = load_image(ns.image)
    roi = _resolve(ns, "roi", 25, int)
    if ns.algo == "cht":
        radius_range = _resolve(ns, "radius_range", None, _int_pair)
        if radius_range is None:
            raise SymtrackError("--radius-range is required for --algo cht")
        params = BaselineParams(roi_n=roi, cht_radius_range=radius_range)
        pos = detect_cht(image, params)
    else:
        guess = _resolve(ns, "guess", None, _point)
        if guess is None:
            raise SymtrackError(f"--guess is required for --algo {ns.algo}")
        if ns.algo == "csym":
            params = CsymParams(
                roi_n=roi,
                search_half=_resolve(ns, "search_half", 3, int),
                use_median_prefilter=_resolve(ns, "median", False, _bool),
                use_hermite=not _resolve(ns, "no_hermite", False, _bool),
            )
            pos = detect_csym(image, guess, params)
        else:
            params = BaselineParams(roi_n=roi)
            detector = {"com": detect_com, "xcorr": detect_xcorr, "qi": detect_qi}[ns.algo]
            pos = detector(image, guess, params)
    print(f"{pos.x:.4f},{pos.y:.4f}")
    return 0


def cmd_generate(ns) -> int:
    count = _resolve(ns, "count", 10, int)
    radius = _resolve(ns, "radius", 20, int)
    snr = _resolve(ns, "snr", 10.0, float)
    size = _resolve(ns, "size", 512, int)
    seed = _resolve(ns, "seed", 0, int)
    bits = _resolve(ns, "bits", 8, int)
    pattern = _resolve(ns, "pattern", "random", str)
    patterns = BUILTIN_PATTERNS if pattern == "random" else (pattern,)

    os.makedirs(ns.out_dir, exist_ok=True)
    rows = []
    for i in range(count):
        frame_seed = trial_seed(seed, 0, 0, i)
        cfg = TrialConfig(radius=radius, snr=snr, image_size=size, seed=frame_seed, patterns=patterns)
        image, truth, guess = make_trial(cfg)
        name = f"frame_{i:04d}.pgm"
        write_pgm(os.path.join(ns.out_dir, name), image, bits=bits)
        rows.append([i, name, f"{truth.x:.6f}", f"{truth.y:.6f}", f"{guess.x:.6f}", f"{guess.y:.6f}", frame_seed])
    with open(os.path.join(ns.out_dir, "truth.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["frame", "path", "true_x", "true_y", "guess_x", "guess_y", "seed"])
        writer.writerows(rows)
    with open(os.path.join(ns.out_dir, "metadata.txt"), "w") as fh:
        for key, value in (("software", f"symtrack {__version__}"), ("count", count), ("radius_px", radius),
                           ("snr", snr), ("image_size_px", size), ("base_seed", seed), ("bits", bits),
                           ("pattern", pattern)):
            fh.write(f"{key}={value}\n")
    print(f"wrote {count} frames to {ns.out_dir}")
    return 0


def _sweep_config(ns, detectors) -> SweepConfig:
    return SweepConfig(
        detectors=detectors,
        radii=_resolve(ns, "radii", (10, 50, 100), _int_list),
        snrs=_resolve(ns, "snrs", (0.1, 1.0, 10.0, 100.0), _float_list),
        trials_per_cell=_resolve(ns, "trials", 100, int),
        base_seed=_resolve(ns, "seed", 0, int),
        image_size=_resolve(ns, "image_size", 512, int),
        measure_time=_resolve(ns, "timing", False, _bool),
        jobs=_resolve(ns, "jobs", 1, int),
    )


def _write_sweep_outputs(result, out_dir, extra=None) -> None:
    os.makedirs(out_dir, exist_ok=True)
    write_trials_csv(result, os.path.join(out_dir, "trials.csv"))
    write_summary_csv(result, os.path.join(out_dir, "summary.csv"))
    write_metadata(os.path.join(out_dir, "metadata.txt"), result.config, extra)


def cmd_sweep(ns) -> int:
    detectors = _resolve(ns, "detectors", ALL_DETECTORS, _detector_list)
    result = run_sweep(_sweep_config(ns, detectors))
    _write_sweep_outputs(result, ns.out_dir)
    print(f"wrote sweep results to {ns.out_dir}")
    return 0


def cmd_ablation(ns) -> int:
    result = run_sweep(_sweep_config(ns, ABLATION_DETECTORS))
    _write_sweep_outputs(result, ns.out_dir, {"mode": "ablation"})
    print(f"wrote ablation results to {ns.out_dir}")
    return 0


def cmd_oscillate(ns) -> int:
    detectors = _resolve(ns, "detectors", ALL_DETECTORS, _detector_list)
    peak_to_peak = _resolve(ns, "peak_to_peak", (1.0, 2.0, 5.0, 10.0, 15.0, 20.0), _float_list)
    radius = _resolve(ns, "radius", 12, int)
    period = _resolve(ns, "period", 50.0, float)
    frames = _resolve(ns, "frames", 200, int)
    snr = _resolve(ns, "snr", 50.0, float)
    seed = _resolve(ns, "seed", 0, int)
    nm_per_px = _resolve(ns, "nm_per_px", 84.7, float)

    results = run_oscillation_eval(detectors, peak_to_peak, radius=radius, period=period,
                                   n_frames=frames, snr=snr, seed=seed)
    os.makedirs(ns.out_dir, exist_ok=True)
    with open(os.path.join(ns.out_dir, "amplitudes.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "true_amp_px", "fitted_amp_px", "abs_err_px", "abs_err_nm", "residual_rms_px"])
        for det in detectors:
            for r in results[det]:
                writer.writerow([det, f"{r.true_amplitude:.6f}", f"{r.fitted_amplitude:.6f}",
                                 f"{r.abs_error:.6f}", f"{r.abs_error * nm_per_px:.6f}", f"{r.residual_rms:.6f}"])
    if len(peak_to_peak) >= 6:
        with open(os.path.join(ns.out_dir, "calibration.csv"), "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["detector", "mean_rel_err", "max_rel_err", "correlation",
                             "p1", "p2", "p3", "p4", "p5", "p6"])
            for det in detectors:
                measured = [r.fitted_amplitude for r in results[det]]
                true_nm = [r.true_amplitude * nm_per_px for r in results[det]]
                if not all(math.isfinite(v) for v in measured):
                    writer.writerow([det, "nan", "nan", "nan"] + [""] * 6)
                    continue
                cal = fit_calibration(measured, true_nm)
                writer.writerow([det, f"{cal.mean_rel_error:.9f}", f"{cal.max_rel_error:.9f}",
                                 f"{cal.correlation:.9f}"] + [f"{c:.9g}" for c in cal.coefficients])
    with open(os.path.join(ns.out_dir, "metadata.txt"), "w") as fh:
        for key, value in (("software", f"symtrack {__version__}"), ("detectors", ",".join(detectors)),
                           ("peak_to_peak_px", ",".join(f"{v:g}" for v in peak_to_peak)),
                           ("radius_px", radius), ("period_frames", period), ("frames", frames),
                           ("snr", snr), ("base_seed", seed), ("nm_per_px", nm_per_px)):
            fh.write(f"{key}={value}\n")
    print(f"wrote oscillation results to {ns.out_dir}")
    return 0


def cmd_tether(ns) -> int:
    detectors = _resolve(ns, "detectors", ("csym", "com", "xcorr", "qi"), _detector_list)
    n_frames = _resolve(ns, "frames", 100, int)
    radius = _resolve(ns, "radius", 12, int)
    tether_radius = _resolve(ns, "tether_radius", 5.0, float)
    step_sigma = _resolve(ns, "step_sigma", 1.0, float)
    snr = _resolve(ns, "snr", 10.0, float)
    noise_snrs = _resolve(ns, "noise_snrs", (0.1, 0.5, 1.0, 3.0, 10.0), _float_list)
    roi = _resolve(ns, "roi", None, int)
    seed = _resolve(ns, "seed", 0, int)
    if roi is None:
        roi = roi_for_radius(radius)

    frames, _centers, anchor = make_tether_frames(
        n_frames, radius=radius, tether_radius=tether_radius, step_sigma=step_sigma,
        snr=snr, seed=seed,
    )
    os.makedirs(ns.out_dir, exist_ok=True)
    with open(os.path.join(ns.out_dir, "tether.csv"), "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["detector", "noise_snr", "mean_corr", "sd_corr", "n_pairs", "skipped"])
        for det in detectors:
            detector = make_detector(det, radius)
            stats = run_tether_eval(frames, detector, roi, noise_snrs, anchor, seed=seed + 1)
            for s in stats:
                writer.writerow([det, f"{s.snr:g}", f"{s.mean_corr:.9f}", f"{s.sd_corr:.9f}", s.n_pairs, s.n_skipped])
    with open(os.path.join(ns.out_dir, "metadata.txt"), "w") as fh:
        for key, value in (("software", f"symtrack {__version__}"), ("detectors", ",".join(detectors)),
                           ("frames", n_frames), ("radius_px", radius), ("tether_radius_px", tether_radius),
                           ("step_sigma_px", step_sigma), ("original_snr", snr),
                           ("noise_snrs", ",".join(f"{v:g}" for v in noise_snrs)),
                           ("roi_px", roi), ("base_seed", seed)):
            fh.write(f"{key}={value}\n")
    print(f"wrote tether results to {ns.out_dir}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    config_path = getattr(ns, "config", None)
    try:
        ns._config_values = _load_config(config_path) if config_path else {}
        return ns.handler(ns)
    except SymtrackError as exc:
        origin = exc.__class__.__module__
        print(f"error:{origin}:{exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error:symtrack.cli:{exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
