"""Seeded generators for benchmark signals with known ground truth.

Each recipe produces a signal made of one or more modes with fixed harmonic
amplitude ratios and phase shifts, plus an additive noise process, together
with the exact mode series so that decomposition accuracy can be scored.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.fft as sfft
from scipy.integrate import cumulative_trapezoid

from .tfr import ConfigError, Signal

RECIPES = ("example1", "example2", "fig1", "puretone", "amnm", "fmnm",
           "custom")

WHITE = "white"
BROWNIAN = "brownian"
FILTERED_BROWNIAN = "filtered_brownian"


@dataclass(frozen=True)
class NoiseSpec:
    kind: str = WHITE
    sigma: float = 0.0
    band: tuple = (0.01, 0.2)   # Hz, for the filtered variant

    def __post_init__(self):
        if self.kind not in (WHITE, BROWNIAN, FILTERED_BROWNIAN):
            raise ConfigError(f"unknown noise kind {self.kind!r}")
        if self.sigma < 0:
            raise ConfigError("noise sigma must be non-negative")


@dataclass(frozen=True)
class SynthSpec:
    recipe: str = "puretone"
    fs: float = 100.0
    duration: float = 100.0
    seed: int = 0
    noise: NoiseSpec | None = None
    # custom-recipe knobs (also used as overrides where sensible)
    freq_hz: float = 1.0
    amp: float = 1.0
    harmonics: tuple = ((1, 1.0, 0.0),)   # (h, a_h, varphi_h)
    am_depth: float = 0.0
    am_freq: float = 0.05
    fm_depth: float = 0.0
    fm_freq: float = 0.1

    def __post_init__(self):
        if self.recipe not in RECIPES:
            raise ConfigError(f"unknown recipe {self.recipe!r}")
        n = self.fs * self.duration
        if abs(n - round(n)) > 1e-9 or n < 4:
            raise ConfigError("fs * duration must be a whole number >= 4")
        if not self.fs > 0 or not self.duration > 0:
            raise ConfigError("fs and duration must be positive")

    @property
    def n(self) -> int:
        return int(round(self.fs * self.duration))


@dataclass
class ModeTruth:
    """One mode's exact series and construction parameters."""

    series: np.ndarray
    A: np.ndarray               # fundamental amplitude A(t)
    phi: np.ndarray             # fundamental phase, unwrapped
    nu: np.ndarray              # fundamental frequency (rad/s)
    harmonics: list             # (h, a_h, varphi_h)


@dataclass
class GroundTruth:
    modes: list
    noise: np.ndarray

    def total(self) -> np.ndarray:
        out = self.noise.copy()
        for m in self.modes:
            out += m.series
        return out


def white_noise(n: int, sigma: float, rng: np.random.Generator) -> np.ndarray:
    return sigma * rng.standard_normal(n)


def brownian_noise(n: int, sigma: float,
                   rng: np.random.Generator) -> np.ndarray:
    """Normalized cumulative sum of white noise, scaled to deviation sigma."""
    b = np.cumsum(rng.standard_normal(n))
    s = np.std(b)
    return sigma * b / (s if s > 0 else 1.0)


def filtered_brownian(n: int, fs: float, band, sigma: float,
                      rng: np.random.Generator) -> np.ndarray:
    """Unit-deviation Brownian noise brick-wall filtered to a band, scaled."""
    b = brownian_noise(n, 1.0, rng)
    spec = sfft.rfft(b)
    f = sfft.rfftfreq(n, d=1.0 / fs)
    spec[(f < band[0]) | (f > band[1])] = 0.0
    out = sfft.irfft(spec, n)
    s = np.std(out)
    return sigma * out / (s if s > 0 else 1.0)


def _make_noise(spec: NoiseSpec | None, n: int, fs: float,
                rng: np.random.Generator) -> np.ndarray:
    if spec is None or spec.sigma == 0:
        return np.zeros(n)
    if spec.kind == WHITE:
        return white_noise(n, spec.sigma, rng)
    if spec.kind == BROWNIAN:
        return brownian_noise(n, spec.sigma, rng)
    return filtered_brownian(n, fs, spec.band, spec.sigma, rng)


def _mode(t, A, nu_rad, harmonics, phi0=0.0) -> ModeTruth:
    """Assemble a mode from amplitude, frequency and harmonic table."""
    phi = phi0 + np.concatenate(
        ([0.0], cumulative_trapezoid(nu_rad, t)))
    series = np.zeros_like(t)
    for h, a_h, varphi in harmonics:
        series += A * a_h * np.cos(h * phi + varphi)
    return ModeTruth(series=series, A=np.broadcast_to(A, t.shape).copy(),
                     phi=phi, nu=nu_rad.copy(),
                     harmonics=[tuple(x) for x in harmonics])


def generate(spec: SynthSpec):
    """Build the signal and ground truth for a synthesis spec."""
    n = spec.n
    t = np.arange(n) / spec.fs
    ss = np.random.SeedSequence(spec.seed)
    rng_noise, rng_a, rng_b = [np.random.default_rng(s)
                               for s in ss.spawn(3)]

    if spec.recipe == "example1":
        # single mode near 1 Hz with slow AM and FM, harmonics 1, 3, 4, 7,
        # buried in strong Brownian noise
        nu = 2 * np.pi * spec.freq_hz * (
            1 + 0.12 * np.sin(2 * np.pi * 0.1 * t))
        A = 2.0 * (1 + 0.1 * np.sin(2 * np.pi * 0.03 * t + 1.0))
        harmonics = [(1, 1.0, 0.0), (3, 0.6, 0.25 * np.pi),
                     (4, 0.45, -np.pi / 3), (7, 0.3, 0.5 * np.pi)]
        modes = [_mode(t, A, nu, harmonics)]
        noise_spec = spec.noise or NoiseSpec(BROWNIAN, 4.0)
    elif spec.recipe == "example2":
        # two modes with nearly commensurate fundamentals (1 and 2 Hz) whose
        # harmonics overlap, in heavy white noise
        drift1 = 0.01 * filtered_brownian(n, spec.fs, (0.01, 0.2), 1.0, rng_a)
        drift2 = 0.01 * filtered_brownian(n, spec.fs, (0.01, 0.2), 1.0, rng_b)
        nu1 = 2 * np.pi * (1.0 + drift1)
        nu2 = 2 * np.pi * (2.0 + drift2)
        h1 = [(1, 1.0, 0.0), (3, 0.75, -0.20 * np.pi), (5, 0.5, 0.25 * np.pi)]
        h2 = [(1, 1.0, 0.0), (2, 0.5, 0.50 * np.pi), (3, 0.25, -0.33 * np.pi)]
        modes = [_mode(t, 1.0, nu1, h1), _mode(t, 0.8, nu2, h2)]
        noise_spec = spec.noise or NoiseSpec(WHITE, 1.725)
    elif spec.recipe == "fig1":
        # illustrative non-sinusoidal oscillation: two harmonics, mild AM
        nu = 2 * np.pi * spec.freq_hz * np.ones(n)
        A = spec.amp * (1 + 0.3 * np.sin(2 * np.pi * 0.05 * t))
        harmonics = [(1, 1.0, 0.0), (2, 0.4, 0.3 * np.pi)]
        modes = [_mode(t, A, nu, harmonics)]
        noise_spec = spec.noise
    elif spec.recipe == "puretone":
        nu = 2 * np.pi * spec.freq_hz * np.ones(n)
        modes = [_mode(t, spec.amp, nu, [(1, 1.0, 0.0)])]
        noise_spec = spec.noise
    elif spec.recipe == "amnm":
        nu = 2 * np.pi * spec.freq_hz * np.ones(n)
        A = spec.amp * (1 + spec.am_depth * np.sin(2 * np.pi * spec.am_freq * t))
        modes = [_mode(t, A, nu, [(1, 1.0, 0.0)])]
        noise_spec = spec.noise
    elif spec.recipe == "fmnm":
        nu = 2 * np.pi * spec.freq_hz * (
            1 + spec.fm_depth * np.sin(2 * np.pi * spec.fm_freq * t))
        modes = [_mode(t, spec.amp, nu, [(1, 1.0, 0.0)])]
        noise_spec = spec.noise
    else:   # custom
        nu = 2 * np.pi * spec.freq_hz * (
            1 + spec.fm_depth * np.sin(2 * np.pi * spec.fm_freq * t))
        A = spec.amp * (1 + spec.am_depth * np.sin(2 * np.pi * spec.am_freq * t))
        modes = [_mode(t, A, nu, list(spec.harmonics))]
        noise_spec = spec.noise

    noise = _make_noise(noise_spec, n, spec.fs, rng_noise)
    truth = GroundTruth(modes=modes, noise=noise)
    return Signal(truth.total(), spec.fs), truth
