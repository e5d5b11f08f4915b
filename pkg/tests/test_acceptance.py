"""Acceptance suite: one printed PASS/FAIL line per criterion.

The reference configuration is eps = 0.1, the default tent dispersion
profile (d_plus = 3, d_minus = 1, t_plus = 1/2), n = 2^14, L = 6400,
dt = 0.05, t_end = 200, tau-quadrature order 16.  A companion run at
eps = 0.2 supports the cubic-in-eps scaling check.  The two long runs
take several minutes each; every criterion below consumes their cached
trajectories.
"""

import math
import sys
import time

import numpy as np
import pytest

from dmnls.dispersion import DispersionProfile
from dmnls.integrator import (
    ENERGY_TOL,
    MASS_TOL,
    SimConfig,
    run,
)
from dmnls.oracle import run_oracle
from dmnls.scattering import (
    dtg_diagnostic,
    dyadic_profile_differences,
    extract_scattering_data,
    residual_series,
)
from dmnls.verify import fast_checks

REFERENCE = dict(t_end=200.0, n=2**14, length=6400.0, quad_order=16, dt=0.05)


def report(criterion: str, passed: bool, detail: str):
    line = f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}\n"
    sys.__stdout__.write(line)
    sys.__stdout__.flush()
    assert passed, line.strip()


@pytest.fixture(scope="session")
def reference_run():
    return run(SimConfig(epsilon=0.1, **REFERENCE))


@pytest.fixture(scope="session")
def companion_run():
    return run(SimConfig(epsilon=0.2, **REFERENCE))


@pytest.fixture(scope="session")
def reference_scattering(reference_run):
    return extract_scattering_data(
        reference_run, reference_run.snapshots[-1].t, fit_t_min=25.0
    )


def test_criterion_1_conservation(reference_run):
    traj = reference_run
    ok = (
        traj.status == "completed"
        and traj.mass_drift < MASS_TOL
        and traj.energy_drift < ENERGY_TOL
        and traj.wall_time < 1800.0
    )
    report(
        "1 conservation",
        ok,
        f"mass drift {traj.mass_drift:.2e} (< {MASS_TOL}), "
        f"energy drift {traj.energy_drift:.2e} (< {ENERGY_TOL}), "
        f"wall {traj.wall_time:.0f}s (< 1800s)",
    )


def test_criterion_2_oracle_equivalence():
    const = DispersionProfile.constant()
    common = dict(
        epsilon=0.1, t_end=10.0, n=2048, length=320.0, profile=const,
        quad_order=1, snapshot_times=(10.0,),
    )
    main = run(SimConfig(dt=0.01, **common), order_check=False)
    orac = run_oracle(SimConfig(dt=0.002, **common))
    xi_sq = main.grid.xi**2
    u_main = main.grid.inverse_raw(np.exp(-10j * xi_sq) * main.snapshots[-1].f_hat)
    u_orac = orac.grid.inverse_raw(np.exp(-10j * xi_sq) * orac.snapshots[-1].f_hat)
    err = float(np.max(np.abs(u_main - u_orac)))
    report("2 oracle equivalence", err < 1e-6, f"sup error {err:.2e} at t=10 (< 1e-6)")


def test_criterion_3_decay_rate(reference_run, reference_scattering):
    fit = reference_scattering.fits["decay"]
    exp_ = reference_scattering.decay_exponent
    ok = -0.55 <= exp_ <= -0.45 and fit.r_squared > 0.99
    report(
        "3 decay rate",
        ok,
        f"|u|_inf ~ t^{exp_:.4f} over t in [25,200] "
        f"(target [-0.55,-0.45]), r^2 = {fit.r_squared:.5f} (> 0.99)",
    )


def test_criterion_4_profile_convergence(reference_run, companion_run):
    ref_fit = dyadic_profile_differences(reference_run)
    comp_fit = dyadic_profile_differences(companion_run)
    decreasing = ref_fit.exponent <= 0.0 and ref_fit.values[-1] < ref_fit.values[0]
    # cubic-in-eps scaling of the dyadic-difference level at matched times
    shared = [
        (va, vb)
        for ta, va in zip(ref_fit.times, ref_fit.values)
        for tb, vb in zip(comp_fit.times, comp_fit.values)
        if abs(ta - tb) < 1e-9
    ]
    ratios = np.array([vb / va for va, vb in shared])
    level_ratio = float(np.median(ratios))
    ok = decreasing and 6.0 <= level_ratio <= 10.0
    report(
        "4 profile convergence",
        ok,
        f"dyadic |g(2t)-g(t)|_inf fitted exponent {ref_fit.exponent:.4f} (<= 0, "
        f"prediction -1/20), eps-doubling level ratio {level_ratio:.2f} (in [6,10])",
    )


def test_criterion_5_residual(reference_run, reference_scattering):
    resid = residual_series(reference_run, reference_scattering, t_min=25.0)
    beta = -resid.exponent
    t = np.asarray(resid.times)
    v = np.asarray(resid.values) * np.sqrt(t)
    window = t >= 25.0
    trend = np.polyfit(np.log(t[window]), np.log(v[window]), 1)[0]
    ok = beta >= 0.52 and trend < 0.0
    report(
        "5 modified-scattering residual",
        ok,
        f"residual ~ t^-{beta:.4f} (beta >= 0.52), "
        f"sqrt(t)-weighted trend slope {trend:.4f} (< 0) over t in [25,200]",
    )


def test_criterion_6_dtg_diagnostic(reference_run):
    fit = dtg_diagnostic(reference_run, fit_t_min=25.0)
    ok = fit.exponent <= -1.0
    report(
        "6 dt-g diagnostic",
        ok,
        f"|Delta g / Delta t|_inf ~ t^{fit.exponent:.4f} over t in [25,200] (<= -1.0)",
    )


def test_criterion_7_identity_suite():
    t0 = time.perf_counter()
    checks = fast_checks()
    elapsed = time.perf_counter() - t0
    failed = [c.name for c in checks if not c.passed]
    ok = not failed and elapsed < 60.0
    report(
        "7 identity suite",
        ok,
        f"{len(checks)} named invariants, failed: {failed or 'none'}, "
        f"runtime {elapsed:.1f}s (< 60s)",
    )


def test_criterion_8_self_convergence(reference_run):
    rk4_order = reference_run.observed_order
    # independent Strang dt-halving triple on the degenerate problem
    from dmnls.grid import Field
    from dmnls.integrator import prepare_initial
    from dmnls.oracle import strang_step

    const = DispersionProfile.constant()
    cfg = SimConfig(
        epsilon=0.2, t_end=5.0, n=1024, length=160.0, profile=const,
        quad_order=1, dt=0.05, snapshot_times=(5.0,),
    )
    fields = []
    for divisor in (1, 2, 4):
        state = prepare_initial(cfg)
        u = Field(cfg.grid, cfg.grid.inverse_raw(state.f_hat), "position")
        h = cfg.dt / divisor
        for _ in range(round(cfg.t_end / h)):
            u = strang_step(u, h, const.c)
        fields.append(u.values)
    e1 = float(np.max(np.abs(fields[0] - fields[1])))
    e2 = float(np.max(np.abs(fields[1] - fields[2])))
    strang_order = math.log2(e1 / e2)
    ok = rk4_order >= 3.5 and strang_order >= 1.8
    report(
        "8 self-convergence",
        ok,
        f"integrator observed order {rk4_order:.2f} (>= 3.5), "
        f"oracle observed order {strang_order:.2f} (>= 1.8)",
    )
