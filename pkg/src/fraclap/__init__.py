"""Fractional Laplacian toolkit.

Spectral and singular-integral realisations of ``(-Delta)^{beta/2}`` on a
periodic box, checks of Ju's pointwise inequality, test-function scaling
measurements, critical-exponent arithmetic and a pseudospectral blow-up
simulator for ``u_t + (-Delta)^{beta/2}(|u|^p) = |u|^q``.
"""

from fraclap.grid import Descriptor, Field, GridSpec, Spectrum, from_spectrum, make_grid, norms, sample, to_spectrum
from fraclap.kernels import BACKEND as KERNEL_BACKEND
from fraclap.operators import (
    OperatorSpec,
    calibrate_constant,
    frac_lap,
    normalization_constant,
    singular_frac_lap,
    spectral_frac_lap,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "Descriptor",
    "Field",
    "GridSpec",
    "OperatorSpec",
    "Spectrum",
    "calibrate_constant",
    "frac_lap",
    "from_spectrum",
    "make_grid",
    "normalization_constant",
    "norms",
    "sample",
    "singular_frac_lap",
    "spectral_frac_lap",
    "to_spectrum",
]
