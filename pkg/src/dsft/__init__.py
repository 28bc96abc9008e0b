"""Sparse discrete Fourier transforms from sublinearly many samples.

A length-N vector is filtered by a bank of modulated periodized Gaussians,
the filtered function is evaluated off-grid by a short truncated convolution,
and a pluggable sparse Fourier engine recovers each passband.
"""

from .core import FrequencyBand, SparseSpectrum, centered_dft, centered_idft, eval_trig_poly
from .driver import ENGINES, PRESETS, DsftConfig, RecoveryResult, dsft
from .filter import FilterParams, PassbandPlan, passband_plan, select_params
from .inner import InnerSftConfig

__all__ = [
    "FrequencyBand",
    "SparseSpectrum",
    "centered_dft",
    "centered_idft",
    "eval_trig_poly",
    "ENGINES",
    "PRESETS",
    "DsftConfig",
    "RecoveryResult",
    "dsft",
    "FilterParams",
    "PassbandPlan",
    "passband_plan",
    "select_params",
    "InnerSftConfig",
]
