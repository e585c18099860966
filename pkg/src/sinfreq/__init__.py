"""Maximum-likelihood frequency estimation of 1-D and 2-D complex tones.

The cost ``|c(f)|**2`` is sampled on a zero-padded FFT grid, interpolated
with a barycentric band-limited kernel, and maximised by Newton's method from
the coarse FFT peak.
"""

__version__ = "0.1.0"

from .baselines import CrbReport, SubspaceVectors, SvdNotConverged, crb, crb_1d, dominant_svd, subspace_estimate
from .dft import (
    CostSurface1D,
    CostSurface2D,
    DegenerateInput,
    SignalFrame,
    coarse_peak,
    correlation_surface_1d,
    correlation_surface_2d,
    default_fft_size,
)
from .estimator import Estimate, NewtonConfig, refine_1d, refine_2d
from .interp import BaryKernel, InterpValue, error_spectrum, interpolate, make_kernel, modulo_decompose
from .simkit import TrialConfig, TrialReport, interp_error_sweep, run_sweep, synthesize, threshold_snr

__all__ = [
    "BaryKernel",
    "CostSurface1D",
    "CostSurface2D",
    "CrbReport",
    "DegenerateInput",
    "Estimate",
    "InterpValue",
    "NewtonConfig",
    "SignalFrame",
    "SubspaceVectors",
    "SvdNotConverged",
    "TrialConfig",
    "TrialReport",
    "coarse_peak",
    "correlation_surface_1d",
    "correlation_surface_2d",
    "crb",
    "crb_1d",
    "default_fft_size",
    "dominant_svd",
    "error_spectrum",
    "interp_error_sweep",
    "interpolate",
    "make_kernel",
    "modulo_decompose",
    "refine_1d",
    "refine_2d",
    "run_sweep",
    "subspace_estimate",
    "synthesize",
    "threshold_snr",
]
