"""Command-line front end for the decomposition pipeline.

Subcommands: decompose a signal file, filter a signal against a reference
oscillation, synthesize benchmark signals, dump a time-frequency matrix,
and summarize a finished run directory.  All series files are CSV, all
structured metadata JSON; every run records its seed and effective
configuration so it can be reproduced bit for bit.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .orchestrator import (DecomposeConfig, DecompositionError,
                           DecompositionResult, decompose,
                           filter_by_reference)
from .synth import RECIPES, NoiseSpec, SynthSpec, generate
from .tfr import ConfigError, Signal, compute_tfr, default_config

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_CONFIG = 3
EXIT_DECOMP = 4

FMT = "%.9g"


class InputError(RuntimeError):
    pass


def _fmt(x) -> str:
    return FMT % float(x)


def _read_csv(path: str) -> np.ndarray:
    """Numeric CSV loader tolerating one optional header line."""
    try:
        with open(path) as f:
            first = f.readline()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")
    skip = 0
    try:
        [float(v) for v in first.strip().split(",") if v != ""]
    except ValueError:
        skip = 1
    try:
        return np.genfromtxt(path, delimiter=",", comments="#",
                             skip_header=skip)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")


def read_signal(path: str, fs: float | None) -> Signal:
    """Load a CSV signal: one value column plus --fs, or two columns t,x.

    A time column must be uniform; relative jitter above 1e-6 of the mean
    step is rejected.
    """
    data = _read_csv(path)
    if data.ndim == 0 or data.size == 0 or not np.isfinite(data).all():
        raise InputError(f"{path}: empty or non-numeric data")
    if data.ndim == 1:
        if fs is None:
            raise InputError("single-column input needs --fs")
        return Signal(np.asarray(data, float), fs)
    if data.shape[1] < 2:
        raise InputError(f"{path}: need 1 or 2 columns")
    t, x = data[:, 0], data[:, 1]
    dt = np.diff(t)
    if dt.size == 0 or np.any(dt <= 0):
        raise InputError(f"{path}: time column not increasing")
    mean_dt = float(np.mean(dt))
    if np.max(np.abs(dt - mean_dt)) > 1e-6 * mean_dt:
        raise InputError(f"{path}: non-uniform time grid")
    if fs is not None and abs(fs * mean_dt - 1.0) > 1e-6:
        raise InputError(f"{path}: --fs disagrees with the time column")
    return Signal(np.asarray(x, float), 1.0 / mean_dt)


def write_series(path: Path, columns: dict):
    names = list(columns)
    arrs = [np.asarray(columns[k], float) for k in names]
    with open(path, "w") as f:
        f.write(",".join(names) + "\n")
        for row in zip(*arrs):
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _config_from_args(args) -> DecomposeConfig:
    bands = tuple(tuple(float(v) for v in b.split(":")) for b in args.band)
    for b in bands:
        if len(b) != 2 or not 0 < b[0] < b[1]:
            raise ConfigError(f"bad band {b}; expected LO:HI in Hz")
    return DecomposeConfig(kind=args.kind, f0=args.f0, seed=args.seed,
                           n_time_surrogates=args.nd,
                           n_noise_surrogates=args.ns,
                           freq_min=args.freq_min, freq_max=args.freq_max,
                           bands=bands, threads=args.threads)


def _config_echo(config: DecomposeConfig) -> dict:
    """Configuration as written to summaries.

    The FFT worker cap is dropped: it cannot influence any number in the
    outputs, so identical runs stay byte-identical across machines.
    """
    d = dataclasses.asdict(config)
    d.pop("threads")
    return d


def _write_mode(outdir: Path, i: int, mode, t: np.ndarray):
    A, phi, nu = mode.refined[1.0]
    write_series(outdir / f"mode_{i}.csv",
                 {"t": t, "x": mode.series, "A": A, "phi": phi, "nu": nu})
    entries = []
    for h, _est, verdict in mode.harmonics:
        entries.append({
            "h": h,
            "a_h": next(a for hh, a, _ in mode.waveform if hh == h),
            "varphi_h": next(p for hh, _, p in mode.waveform if hh == h),
            "rho": verdict.rho,
            "significance": verdict.significance,
            "f0_used": verdict.f0_used,
            "method": verdict.method,
        })
    with open(outdir / f"harmonics_{i}.json", "w") as f:
        json.dump(entries, f, indent=2)


def _write_result(outdir: Path, result: DecompositionResult,
                  config: DecomposeConfig, fs: float, failure: str | None):
    outdir.mkdir(parents=True, exist_ok=True)
    n = result.residual.n
    t = np.arange(n) / fs
    for i, mode in enumerate(result.modes):
        _write_mode(outdir, i, mode, t)
    write_series(outdir / "residual.csv",
                 {"t": t, "x": result.residual.samples})
    write_series(outdir / "trend.csv", {"t": t, "x": result.trend})
    summary = {
        "version": __version__,
        "n_modes": len(result.modes),
        "harmonic_sets": [m.harmonic_set for m in result.modes],
        "noise_tests": [{"is_noise": r.is_noise,
                         "significance": r.significance}
                        for r in result.noise_tests],
        "trend_coefficients": [list(map(float, c))
                               for c in result.trend_coefficients],
        "fs": fs,
        "seed": config.seed,
        "config": _config_echo(config),
        "failure": failure,
    }
    with open(outdir / "summary.json", "w") as f:
        json.dump(summary, f, indent=2)


def cmd_decompose(args) -> int:
    signal = read_signal(args.input, args.fs)
    config = _config_from_args(args)
    outdir = Path(args.output)
    failure = None
    try:
        result = decompose(signal, config)
    except DecompositionError as e:
        if e.partial is None:
            raise
        result, failure = e.partial, str(e)
    _write_result(outdir, result, config, signal.fs, failure)
    if args.tfr_dump:
        _dump_tfr(outdir / "tfr.csv", signal, args.kind, args.f0,
                  args.freq_min, args.freq_max)
    return EXIT_OK if failure is None else EXIT_DECOMP


def cmd_filter(args) -> int:
    signal = read_signal(args.input, args.fs)
    ref = _read_csv(args.reference)
    if ref.ndim != 2 or ref.shape[1] < 3:
        raise InputError("reference needs columns t, phase, freq")
    if ref.shape[0] != signal.n:
        raise InputError("reference length differs from the target signal")
    config = _config_from_args(args)
    outdir = Path(args.output)
    outdir.mkdir(parents=True, exist_ok=True)
    mode = filter_by_reference(signal, ref[:, 1], ref[:, 2], config)
    t = np.arange(signal.n) / signal.fs
    if mode is not None:
        _write_mode(outdir, 0, mode, t)
        write_series(outdir / "residual.csv",
                     {"t": t, "x": signal.samples - mode.series})
    summary = {
        "version": __version__,
        "accepted": mode is not None,
        "harmonic_set": mode.harmonic_set if mode is not None else [],
        "fs": signal.fs,
        "seed": config.seed,
        "config": _config_echo(config),
    }
    with open(outdir / "summary.json", "w") as f:
        json.dump(summary, f, indent=2)
    return EXIT_OK


def _parse_noise(text: str | None) -> NoiseSpec | None:
    if text is None:
        return None
    parts = text.split(":")
    kind = parts[0]
    sigma = float(parts[1]) if len(parts) > 1 else 1.0
    band = ((float(parts[2]), float(parts[3])) if len(parts) > 3
            else (0.01, 0.2))
    return NoiseSpec(kind=kind, sigma=sigma, band=band)


def cmd_synth(args) -> int:
    harmonics = tuple(
        (float(p.split(":")[0]), float(p.split(":")[1]),
         float(p.split(":")[2]) if p.count(":") > 1 else 0.0)
        for p in args.harmonic) or ((1, 1.0, 0.0),)
    spec = SynthSpec(recipe=args.recipe, fs=args.fs, duration=args.duration,
                     seed=args.seed, noise=_parse_noise(args.noise),
                     freq_hz=args.freq, amp=args.amp, harmonics=harmonics,
                     am_depth=args.am_depth, am_freq=args.am_freq,
                     fm_depth=args.fm_depth, fm_freq=args.fm_freq)
    signal, truth = generate(spec)
    t = signal.times
    write_series(Path(args.output), {"t": t, "x": signal.samples})
    if args.truth:
        cols = {"t": t, "noise": truth.noise}
        for i, m in enumerate(truth.modes):
            cols[f"mode_{i}"] = m.series
            cols[f"A_{i}"] = m.A
            cols[f"phi_{i}"] = m.phi
            cols[f"nu_{i}"] = m.nu
        write_series(Path(args.truth), cols)
    return EXIT_OK


def _dump_tfr(path: Path, signal: Signal, kind: str, f0: float,
              freq_min: float | None, freq_max: float | None):
    """Amplitude matrix, one row per frequency, header = time grid."""
    k = "wft" if kind == "auto" else kind
    lo = 2 * np.pi * freq_min if freq_min is not None else None
    hi = 2 * np.pi * freq_max if freq_max is not None else None
    cfg = default_config(signal, k, f0, freq_min=lo, freq_max=hi)
    tfr = compute_tfr(signal, cfg)
    with open(path, "w") as f:
        f.write("freq," + ",".join(_fmt(t) for t in tfr.times) + "\n")
        amp = np.abs(tfr.values)
        for i, w in enumerate(tfr.freqs):
            f.write(_fmt(w / (2 * np.pi)) + ","
                    + ",".join(_fmt(v) for v in amp[i]) + "\n")


def cmd_tfr(args) -> int:
    signal = read_signal(args.input, args.fs)
    _dump_tfr(Path(args.output), signal, args.kind, args.f0,
              args.freq_min, args.freq_max)
    return EXIT_OK


def cmd_report(args) -> int:
    path = Path(args.rundir) / "summary.json"
    try:
        with open(path) as f:
            summary = json.load(f)
    except OSError as e:
        raise InputError(f"cannot read {path}: {e}")
    print(f"run summary ({path})")
    print(f"  modes: {summary.get('n_modes', summary.get('accepted'))}")
    for i, hs in enumerate(summary.get("harmonic_sets", [])):
        print(f"  mode {i}: harmonics {hs}")
    for i, nt in enumerate(summary.get("noise_tests", [])):
        verdict = "noise" if nt["is_noise"] else "component"
        print(f"  noise test {i}: {verdict} "
              f"(significance {nt['significance']:.3f})")
    if summary.get("failure"):
        print(f"  FAILED: {summary['failure']}")
    print(f"  seed: {summary.get('seed')}")
    return EXIT_OK


def _add_common(p):
    p.add_argument("--fs", type=float, default=None,
                   help="sampling rate in Hz (required for 1-column input)")
    p.add_argument("--kind", choices=("auto", "wft", "wt"), default="auto")
    p.add_argument("--f0", type=float, default=1.0,
                   help="resolution parameter of the preliminary transform")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--nd", type=int, default=100,
                   help="time-shift surrogate count for harmonic tests")
    p.add_argument("--ns", type=int, default=40,
                   help="spectrum-preserving surrogate count for noise tests")
    p.add_argument("--freq-min", type=float, default=None, help="Hz")
    p.add_argument("--freq-max", type=float, default=None, help="Hz")
    p.add_argument("--band", action="append", default=[],
                   metavar="LO:HI", help="restrict extraction to a band; "
                   "may repeat")
    p.add_argument("--threads", type=int, default=0,
                   help="FFT worker cap, 0 = all cores (results identical)")
    p.add_argument("-o", "--output", default="nmd_out",
                   help="output directory")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="nmd", description="Nonlinear mode decomposition of time series")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("decompose", help="decompose a signal into modes")
    p.add_argument("input")
    _add_common(p)
    p.add_argument("--tfr-dump", action="store_true",
                   help="also write the preliminary transform matrix")
    p.set_defaults(func=cmd_decompose)

    p = sub.add_parser("filter", help="extract the mode related to a "
                       "reference oscillation")
    p.add_argument("input")
    p.add_argument("--reference", required=True,
                   help="CSV with columns t, phase, freq (rad, rad/s)")
    _add_common(p)
    p.set_defaults(func=cmd_filter)

    p = sub.add_parser("synth", help="generate a benchmark signal")
    p.add_argument("recipe", choices=RECIPES)
    p.add_argument("--fs", type=float, default=100.0)
    p.add_argument("--duration", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--noise", default=None, metavar="KIND:SIGMA[:LO:HI]",
                   help="override the recipe's noise process")
    p.add_argument("--freq", type=float, default=1.0)
    p.add_argument("--amp", type=float, default=1.0)
    p.add_argument("--harmonic", action="append", default=[],
                   metavar="H:A[:PHI]", help="custom-recipe harmonic term; "
                   "may repeat")
    p.add_argument("--am-depth", type=float, default=0.0)
    p.add_argument("--am-freq", type=float, default=0.05)
    p.add_argument("--fm-depth", type=float, default=0.0)
    p.add_argument("--fm-freq", type=float, default=0.1)
    p.add_argument("-o", "--output", default="signal.csv")
    p.add_argument("--truth", default=None,
                   help="also write ground-truth series to this CSV")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("tfr", help="write a time-frequency amplitude matrix")
    p.add_argument("input")
    p.add_argument("--fs", type=float, default=None)
    p.add_argument("--kind", choices=("auto", "wft", "wt"), default="wft")
    p.add_argument("--f0", type=float, default=1.0)
    p.add_argument("--freq-min", type=float, default=None, help="Hz")
    p.add_argument("--freq-max", type=float, default=None, help="Hz")
    p.add_argument("-o", "--output", default="tfr.csv")
    p.set_defaults(func=cmd_tfr)

    p = sub.add_parser("report", help="print the summary of a run directory")
    p.add_argument("rundir")
    p.set_defaults(func=cmd_report)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as e:
        print(f"input error: {e}", file=sys.stderr)
        return EXIT_INPUT
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DecompositionError as e:
        print(f"decomposition failed: {e}", file=sys.stderr)
        return EXIT_DECOMP


if __name__ == "__main__":
    sys.exit(main())
