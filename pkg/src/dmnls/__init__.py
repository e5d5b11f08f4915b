"""Pseudo-spectral lab for the averaged dispersion-managed cubic NLS.

Simulates i u_t + u_xx = c * avg_tau[ e^{-iD Delta}( |e^{iD Delta}u|^2 e^{iD Delta}u ) ]
on a large periodic domain, tracks the decay and modified-scattering
diagnostics of the small-data regime, and fits the long-time rates.
"""

__version__ = "0.1.0"

from .grid import Field, Grid, forward_transform, inverse_transform, norm, spectral_derivative
from .dispersion import DispersionProfile, TauQuadrature, build_quadrature
from .integrator import SimConfig, run
from .oracle import run_oracle

__all__ = [
    "Field",
    "Grid",
    "forward_transform",
    "inverse_transform",
    "norm",
    "spectral_derivative",
    "DispersionProfile",
    "TauQuadrature",
    "build_quadrature",
    "SimConfig",
    "run",
    "run_oracle",
    "__version__",
]
