"""Free Schroedinger group, its stationary-phase factorization, and J(t).

e^{it Delta} is the exact frequency multiplier e^{-it xi^2}.  The
factorized form M(t) D(t) F M(t), with M(t) = e^{ix^2/4t} and D(t) a
(2it)^{-1/2} dilation, is implemented for validation and for the
pointwise-decay mechanism; under the e^{+ix xi} forward kernel used
here the dilation samples the transform at -x/(2t).
"""

from __future__ import annotations

import numpy as np

from .grid import Field, FieldError, spectral_derivative

T_MIN_FACTORIZED = 1e-3


def free_evolve(f: Field, t: float) -> Field:
    """Apply e^{it Delta}; unitary on L2 for any finite t."""
    if not np.isfinite(t):
        raise ValueError(f"non-finite evolution time {t}")
    g = f.grid
    if f.space == "frequency":
        return Field(g, np.exp(-1j * t * g.xi**2) * f.values, "frequency")
    hat = g.forward_raw(f.values)
    return Field(g, g.inverse_raw(np.exp(-1j * t * g.xi**2) * hat), "position")


def factorized_evolve(f: Field, t: float, return_coverage: bool = False):
    """Evaluate e^{it Delta}f through M(t) D(t) F M(t).

    The dilation needs the transform of M(t)f at xi = -x/(2t), obtained by
    linear interpolation on the frequency lattice.  Singular as t -> 0, so
    t >= T_MIN_FACTORIZED is required.  With return_coverage=True also
    returns the fraction of x-nodes whose dilation argument falls inside
    the covered frequency range.
    """
    if f.space != "position":
        raise FieldError("factorized_evolve expects a position-space field")
    if not (np.isfinite(t) and t >= T_MIN_FACTORIZED):
        raise ValueError(f"factorized evolution requires t >= {T_MIN_FACTORIZED}")
    g = f.grid
    chirp = np.exp(1j * g.x**2 / (4.0 * t))
    hat = g.forward_raw(chirp * f.values)
    xi_star = -g.x / (2.0 * t)
    inside = (xi_star >= g.xi[0]) & (xi_star <= g.xi[-1])
    coverage = float(np.mean(inside))
    sampled = np.interp(xi_star, g.xi, hat.real) + 1j * np.interp(xi_star, g.xi, hat.imag)
    sampled[~inside] = 0.0
    out = Field(g, chirp * sampled / np.sqrt(2j * t), "position")
    if return_coverage:
        return out, coverage
    return out


def galilean_J(u: Field, t: float) -> Field:
    """J(t)u = x u + 2it u_x with the spectral derivative."""
    if u.space != "position":
        raise FieldError("galilean_J expects a position-space field")
    ux = spectral_derivative(u).values
    return Field(u.grid, u.grid.x * u.values + 2j * t * ux, "position")
