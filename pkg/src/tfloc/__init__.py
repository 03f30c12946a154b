"""Hilbert-Schmidt norms, spectra and rearrangement deficits of Gaussian
time-frequency localization operators."""

from . import asymmetry, deficit_lab, hs_engine, hyperbolic, phase_space, rearrange, spectral, stft
from .asymmetry import fraenkel
from .deficit_lab import deficit, sweep_dilate, sweep_dumbbell, sweep_eps
from .errors import DegenerateFit, InputError, NumericalError, TflocError
from .hs_engine import hs_norm_sq, hs_norm_sq_grid, hs_norm_sq_radial
from .phase_space import GridField, GridRegion, GridSpec, RadialRegion, read_region, write_region
from .spectral import spectrum

__version__ = "0.1.0"

__all__ = [
    "asymmetry",
    "deficit_lab",
    "hs_engine",
    "hyperbolic",
    "phase_space",
    "rearrange",
    "spectral",
    "stft",
    "fraenkel",
    "deficit",
    "sweep_eps",
    "sweep_dilate",
    "sweep_dumbbell",
    "hs_norm_sq",
    "hs_norm_sq_grid",
    "hs_norm_sq_radial",
    "spectrum",
    "GridSpec",
    "GridRegion",
    "GridField",
    "RadialRegion",
    "read_region",
    "write_region",
    "TflocError",
    "InputError",
    "NumericalError",
    "DegenerateFit",
]
