import math

import numpy as np
import pytest

from dmnls.dispersion import DispersionProfile, build_quadrature
from dmnls.grid import Grid
from dmnls.integrator import SimConfig, run
from dmnls.scattering import (
    PhaseAccumulator,
    accumulate_theta,
    asymptotic_field,
    dtg_diagnostic,
    dyadic_profile_differences,
    extract_scattering_data,
    fit_power_law,
    renormalized_profile,
    residual_series,
    theta_kernel_constant,
)


def test_accumulate_theta_closed_form(quad16):
    """For constant |f_hat|^2 = A on the default tent,
    Theta(T) = (cA/2)[(T+1)ln(T+1) - T ln T - 2 ln 2]."""
    A, c, T, h = 0.7, 1.3, 50.0, 0.025
    acc = PhaseAccumulator.zeros(4)
    Aarr = np.full(4, A)
    t = 1.0
    while t < T - 1e-9:
        step = min(h, T - t)
        accumulate_theta(acc, (t, t + step / 2, t + step), (Aarr, Aarr, Aarr), quad16, c=c)
        t += step
    exact = 0.5 * c * A * ((T + 1) * math.log(T + 1) - T * math.log(T) - 2 * math.log(2))
    assert acc.theta[0] == pytest.approx(exact, rel=1e-9)
    assert acc.last_update_time == pytest.approx(T)
    # monotone in every bin for nonnegative integrand
    assert np.all(acc.theta > 0)


def test_renormalized_profile_preserves_modulus():
    f_hat = np.array([1.0 + 1j, 0.5, -2j])
    theta = np.array([0.3, 1.2, -0.7])
    g = renormalized_profile(f_hat, theta)
    assert np.max(np.abs(np.abs(g) - np.abs(f_hat))) < 1e-15


def test_fit_power_law_exact_and_refusals():
    t = np.geomspace(1.0, 100.0, 20)
    exp_, pref, r2 = fit_power_law(t, 3.0 * t**-0.5)
    assert exp_ == pytest.approx(-0.5, abs=1e-12)
    assert pref == pytest.approx(3.0, rel=1e-12)
    assert r2 == pytest.approx(1.0)
    with pytest.raises(ValueError):
        fit_power_law(t[:3], (3.0 * t**-0.5)[:3])  # too few points
    with pytest.raises(ValueError):
        fit_power_law(t, np.zeros_like(t))  # nonpositive values
    with pytest.raises(ValueError):
        fit_power_law(np.linspace(1, 5, 8), np.ones(8))  # window span under 6x


def test_theta_kernel_constant(quad16):
    """|K(s) - 1/(2s)| <= C s^-2 with C ~ 1/4 for the unit tent."""
    C = theta_kernel_constant(quad16)
    assert math.isfinite(C)
    assert C == pytest.approx(0.25, abs=0.01)


@pytest.fixture(scope="module")
def short_traj():
    """Managed run to t = 8 with dyadic snapshot pairs available."""
    cfg = SimConfig(epsilon=0.2, t_end=8.0, n=1024, length=256.0, quad_order=8, dt=0.05)
    traj = run(cfg)
    assert traj.status == "completed"
    return traj


def test_dyadic_differences_decrease(short_traj):
    fit = dyadic_profile_differences(short_traj)
    assert len(fit.times) >= 2
    assert np.all(fit.values > 0)
    # g(t) is converging: the pair differences shrink with t
    assert fit.values[-1] < fit.values[0]


def test_dtg_diagnostic_series(short_traj):
    fit = dtg_diagnostic(short_traj, fit_t_min=2.0)
    assert len(fit.times) >= 3
    assert np.all(np.asarray(fit.values) > 0)
    # the window [2, 8] spans less than a factor of 6, so the fit must
    # refuse cleanly and leave an explanatory note
    assert fit.note != "" and math.isnan(fit.exponent)


def test_extract_scattering_guards(short_traj):
    with pytest.raises(ValueError):
        extract_scattering_data(short_traj, 8.0)  # T_final < 50
    uncert = run(
        SimConfig(epsilon=0.2, t_end=2.0, n=512, length=64.0, quad_order=4, dt=0.5)
    )
    uncert.certification["mass"] = False
    with pytest.raises(ValueError):
        extract_scattering_data(uncert, 60.0)


def test_asymptotic_field_linear_flow():
    """For c = 0 the comparator with W = u0_hat reproduces the free
    evolution up to the stationary-phase error, which decays in t."""
    cfg = SimConfig(
        epsilon=0.1, t_end=16.0, n=2048, length=512.0,
        profile=DispersionProfile.default(c=0.0), quad_order=4, dt=0.5,
    )
    traj = run(cfg)
    assert traj.status == "completed"
    # build the result by hand: Theta = 0 for c = 0, so W = f_hat
    from dmnls.scattering import ScatteringResult

    snap = traj.snapshots[-1]
    W = renormalized_profile(snap.f_hat, snap.theta)
    assert np.max(np.abs(snap.theta)) == 0.0
    res = ScatteringResult(
        xi=traj.grid.xi.copy(), W0=W, Phi_inf=np.zeros_like(snap.theta.copy()), W=W,
        T_final=snap.t,
    )
    errors = []
    for s in traj.snapshots:
        if s.t < 4.0:
            continue
        u = traj.grid.inverse_raw(np.exp(-1j * s.t * traj.grid.xi**2) * s.f_hat)
        approx = asymptotic_field(res, s.t, traj.grid)
        errors.append((s.t, float(np.max(np.abs(u - approx)))))
    # stationary-phase error decreases with t and is far below the field size
    assert errors[-1][1] < errors[0][1]
    assert errors[-1][1] < 2e-3 * float(np.max(np.abs(traj.grid.inverse_raw(snap.f_hat))))


def test_asymptotic_field_coverage_guard():
    """At large t the dilation arguments -x/(2t) shrink toward zero; once
    they no longer span the profile's support the evaluation must refuse."""
    g = Grid(512, 40.0)
    from dmnls.scattering import ScatteringResult

    res = ScatteringResult(
        xi=g.xi, W0=np.ones(512, complex), Phi_inf=np.zeros(512),
        W=np.ones(512, complex), T_final=50.0,
    )
    with pytest.raises(ValueError):
        asymptotic_field(res, 500.0, g)  # arguments span only +-0.02
    with pytest.raises(ValueError):
        asymptotic_field(res, 0.5, g)  # t < 1
