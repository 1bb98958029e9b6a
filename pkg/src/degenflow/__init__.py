"""Time averages, Sobolev norms and density of states for degenerate periodic flows on the annulus."""

from .core import (DomainError, ExperimentRecord, FiberedFunction, FlowProfile, MGrid, NotInSpaceError,
                   ParameterError, SeparableModes, SpectralParams, TabulatedProfile, make_mgrid,
                   phi_eval, validate_params)
from .ensemble import EnsembleSpec, make_random, make_separable, normalize
from .evolution import AveragingResult, error_norm, flow, project_mean, time_average, time_average_oracle
from .experiments import RateFit, alpha_sweep, envelope_check, rate_experiment
from .sobolev import fourier_holder_check, full_norm, hgamma_fiber_norm, holder_check, membership
from .spectral import (BandSpectrum, DosSample, band_spectrum, dos_bound_envelope, dos_oracle, dos_series,
                       spectral_distribution)
from .toy import EmbeddedEigenvalueError, EnergyBranch, dos_toy, dos_toy_oracle, is_regular, preimages

__version__ = "0.1.0"

__all__ = [
    "AveragingResult", "BandSpectrum", "DomainError", "DosSample", "EmbeddedEigenvalueError", "EnergyBranch",
    "EnsembleSpec", "ExperimentRecord", "FiberedFunction", "FlowProfile", "MGrid", "NotInSpaceError",
    "ParameterError", "RateFit", "SeparableModes", "SpectralParams", "TabulatedProfile", "alpha_sweep",
    "band_spectrum", "dos_bound_envelope", "dos_oracle", "dos_series", "dos_toy", "dos_toy_oracle",
    "envelope_check", "error_norm", "flow", "fourier_holder_check", "full_norm", "hgamma_fiber_norm",
    "holder_check", "is_regular", "make_mgrid", "make_random", "make_separable", "membership", "normalize",
    "phi_eval", "preimages", "project_mean", "rate_experiment", "spectral_distribution", "time_average",
    "time_average_oracle", "validate_params",
]
