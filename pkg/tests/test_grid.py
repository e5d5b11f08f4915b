import math

import numpy as np
import pytest

from dmnls.grid import (
    Field,
    FieldError,
    Grid,
    boundary_mass_fraction,
    forward_transform,
    inverse_transform,
    norm,
    read_field_csv,
    spectral_derivative,
    write_field_csv,
)


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(7, 10.0)
    with pytest.raises(ValueError):
        Grid(100, 10.0)  # not a power of two
    with pytest.raises(ValueError):
        Grid(64, -1.0)
    g = Grid(64, 16.0)
    assert g.dx == 0.25
    assert g.dxi == pytest.approx(2 * math.pi / 16.0)
    assert g.x[0] == -8.0
    assert g.xi[0] == pytest.approx(-g.dxi * 32)
    assert np.all(np.diff(g.xi) > 0)


def test_gaussian_self_dual(grid):
    """e^{-x^2/2} is a fixed point of the unitary transform."""
    f = Field(grid, np.exp(-0.5 * grid.x**2).astype(complex), "position")
    hat = forward_transform(f)
    assert hat.space == "frequency"
    assert np.max(np.abs(hat.values - np.exp(-0.5 * grid.xi**2))) < 1e-12


def test_round_trip_and_parseval(grid):
    rng = np.random.default_rng(7)
    raw = rng.normal(size=grid.n) + 1j * rng.normal(size=grid.n)
    # band-limit so the field is smooth on the lattice
    hat0 = np.exp(-0.1 * grid.xi**2) * raw
    f = Field(grid, grid.inverse_raw(hat0), "position")
    back = inverse_transform(forward_transform(f))
    assert np.max(np.abs(back.values - f.values)) < 1e-12 * np.max(np.abs(f.values))
    assert norm(forward_transform(f), "L2") == pytest.approx(norm(f, "L2"), rel=1e-12)


def test_forward_kernel_sign(grid):
    """F[e^{-x^2/2 + ibx}](xi) must be centered at xi = -b for the
    e^{+ix xi} kernel (a flipped kernel centers it at +b)."""
    b = 2.0
    f = Field(grid, np.exp(-0.5 * grid.x**2 + 1j * b * grid.x), "position")
    hat = forward_transform(f)
    peak_xi = grid.xi[int(np.argmax(np.abs(hat.values)))]
    assert peak_xi == pytest.approx(-b, abs=2 * grid.dxi)


def test_spectral_derivative(grid):
    f = Field(grid, np.exp(-0.5 * grid.x**2).astype(complex), "position")
    d = spectral_derivative(f)
    exact = -grid.x * np.exp(-0.5 * grid.x**2)
    assert np.max(np.abs(d.values - exact)) < 1e-12


def test_l2_norm_gaussian_closed_form(grid):
    eps = 0.1
    f = Field(grid, eps * np.exp(-grid.x**2).astype(complex), "position")
    exact = eps * (math.pi / 2.0) ** 0.25
    assert abs(norm(f, "L2") - exact) / exact < 1e-8


def test_h11_is_h1_plus_weighted(grid):
    f = Field(grid, np.exp(-grid.x**2).astype(complex), "position")
    assert norm(f, "H11") == pytest.approx(norm(f, "H1") + norm(f, "weightedL2"))


def test_norm_space_requirements(grid):
    hat = Field(grid, np.exp(-0.5 * grid.xi**2).astype(complex), "frequency")
    assert norm(hat, "L2") > 0  # allowed on either tag
    with pytest.raises(FieldError):
        norm(hat, "H1")
    with pytest.raises(ValueError):
        norm(Field(grid, np.zeros(grid.n), "position"), "H7")


def test_field_validation(grid):
    with pytest.raises(FieldError):
        Field(grid, np.zeros(grid.n), "momentum")
    with pytest.raises(FieldError):
        Field(grid, np.zeros(grid.n - 1), "position")
    bad = np.zeros(grid.n)
    bad[3] = np.nan
    with pytest.raises(FieldError):
        Field(grid, bad, "position")


def test_boundary_mass_fraction(grid):
    u = np.zeros(grid.n, dtype=complex)
    u[np.abs(grid.x) < 1.0] = 1.0
    assert boundary_mass_fraction(Field(grid, u, "position")) == 0.0
    v = np.zeros(grid.n, dtype=complex)
    v[np.abs(grid.x) > 0.45 * grid.length] = 1.0
    assert boundary_mass_fraction(Field(grid, v, "position")) == 1.0
    assert boundary_mass_fraction(Field(grid, np.zeros(grid.n), "position")) == 0.0


def test_csv_round_trip(tmp_path, grid, gaussian):
    path = tmp_path / "field.csv"
    write_field_csv(gaussian, path, t=1.5)
    back, t = read_field_csv(path)
    assert t == 1.5
    assert back.space == "position"
    assert back.grid == grid
    assert np.array_equal(back.values, gaussian.values)
