"""Nonlinear Mode Decomposition.

Decomposes a real time series into oscillatory modes, each consisting of a
fundamental and its phase-locked harmonics, plus residual noise.  Built on
adaptively tuned windowed Fourier and wavelet transforms with surrogate
significance testing of every extracted component.
"""

from .tfr import (WFT, WT, ConfigError, DegenerateInputError, Signal, Tfr,
                  TfrConfig, compute_tfr, default_config, extract_skeleton)
from .ridge import RidgeCurve, extract_ridge
from .reconstruct import (DIRECT, RIDGE, ComponentEstimate,
                          reconstruct_direct, reconstruct_ridge,
                          select_method)
from .harmonics import HarmonicVerdict, SurrogateConfig, evaluate_harmonic
from .noisetest import NoiseTestResult, test_against_noise
from .orchestrator import (DecomposeConfig, DecompositionError,
                           DecompositionResult, NonlinearMode, decompose,
                           filter_by_reference)
from .synth import GroundTruth, NoiseSpec, SynthSpec, generate

__version__ = "0.1.0"

__all__ = [
    "WFT", "WT", "ConfigError", "DegenerateInputError", "Signal", "Tfr",
    "TfrConfig", "compute_tfr", "default_config", "extract_skeleton",
    "RidgeCurve", "extract_ridge", "ComponentEstimate", "RIDGE", "DIRECT",
    "reconstruct_ridge", "reconstruct_direct", "select_method",
    "HarmonicVerdict", "SurrogateConfig", "evaluate_harmonic",
    "NoiseTestResult", "test_against_noise",
    "DecomposeConfig", "DecompositionError", "DecompositionResult",
    "NonlinearMode", "decompose", "filter_by_reference",
    "GroundTruth", "NoiseSpec", "SynthSpec", "generate",
    "__version__",
]
