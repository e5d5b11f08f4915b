import numpy as np
import pytest

from dmnls.dispersion import DispersionProfile, build_quadrature
from dmnls.grid import Field, FieldError, norm
from dmnls.nonlinearity import (
    averaged_nonlinearity,
    cubic,
    gauge_covariance_check,
)


def test_cubic_pointwise(grid, gaussian):
    out = cubic(gaussian)
    exact = np.abs(gaussian.values) ** 2 * gaussian.values
    assert np.max(np.abs(out.values - exact)) < 1e-12


def test_cubic_homogeneity(grid, gaussian):
    lam = 1.7
    scaled = Field(grid, lam * gaussian.values, "position")
    out = cubic(scaled).values
    assert np.max(np.abs(out - lam**3 * cubic(gaussian).values)) < 1e-12


def test_cubic_dealias_agrees_on_bandlimited(grid, gaussian):
    a = cubic(gaussian, dealias=True).values
    b = cubic(gaussian, dealias=False).values
    # width-1 Gaussian triples to bandwidth ~ 3 sigma_xi << xi_max = 40
    assert np.max(np.abs(a - b)) < 1e-12


def test_space_tag_required(grid, quad16):
    hat = Field(grid, np.zeros(grid.n), "frequency")
    with pytest.raises(FieldError):
        cubic(hat)
    with pytest.raises(FieldError):
        averaged_nonlinearity(hat, quad16, 1.0)


def test_gauge_covariance(gaussian, quad16):
    assert gauge_covariance_check(gaussian, np.pi / 3.0, quad16) < 1e-12


def test_mass_symmetry(grid, gaussian, quad16):
    """Im <u, N[u]> = 0: the averaged nonlinearity conserves mass."""
    nl = averaged_nonlinearity(gaussian, quad16, c=1.0)
    ip = grid.dx * np.sum(np.conj(gaussian.values) * nl.values)
    assert abs(ip.imag) < 1e-12 * abs(ip.real)


def test_degenerate_profile_reduces_to_cubic(grid, gaussian):
    q = build_quadrature(DispersionProfile.constant(), 4)
    nl = averaged_nonlinearity(gaussian, q, c=1.0)
    plain = cubic(gaussian)
    assert np.max(np.abs(nl.values - plain.values)) < 1e-13


def test_linearity_in_coupling(gaussian, quad16):
    one = averaged_nonlinearity(gaussian, quad16, c=1.0).values
    two = averaged_nonlinearity(gaussian, quad16, c=2.0).values
    assert np.max(np.abs(two - 2.0 * one)) < 1e-14


def test_quadrature_convergence_exponential(grid, gaussian, tent_profile):
    """The tau integrand oscillates like e^{-iD(tau) xi^2}, so Gauss
    refinement converges exponentially once the order resolves the phase;
    order 32 is converged to ~1e-9 while order 8 is pre-asymptotic."""
    ref = averaged_nonlinearity(gaussian, build_quadrature(tent_profile, 96), 1.0).values
    scale = float(np.linalg.norm(ref))
    errs = {}
    for order in (8, 16, 32, 64):
        val = averaged_nonlinearity(gaussian, build_quadrature(tent_profile, order), 1.0).values
        errs[order] = float(np.linalg.norm(val - ref)) / scale
    assert errs[16] < errs[8] / 10.0
    assert errs[32] < errs[16] / 10.0
    assert errs[32] < 1e-9
    assert errs[64] < 1e-12
