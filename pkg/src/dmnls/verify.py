"""Named invariant suites behind `dmnls verify`.

fast  - analytic identities and closed forms, seconds to run
full  - adds self-convergence, conservation-drift, and oracle-equivalence
        checks on short trajectories
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dispersion import (
    DispersionProfile,
    averaged_inverse_kernel,
    build_quadrature,
    D_of_tau,
    tent_reduction_oracle,
)
from .grid import Field, Grid, forward_transform, inverse_transform, norm, spectral_derivative
from .integrator import Integrator, SimConfig, prepare_initial, run, self_test_order
from .nonlinearity import averaged_nonlinearity, cubic, gauge_covariance_check
from .oracle import run_oracle, strang_step
from .propagator import factorized_evolve, free_evolve, galilean_J
from .scattering import fit_power_law


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _check(name, passed, detail):
    return CheckResult(name=name, passed=bool(passed), detail=detail)


def _rng_field(grid, seed=0):
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n)
    # taper so the field is smooth and boundary-negligible
    v *= np.exp(-((grid.x / (0.2 * grid.length)) ** 2))
    return Field(grid, v, "position")


def fast_checks() -> list[CheckResult]:
    out = []
    g = Grid(1024, 40.0)
    gauss = Field(g, np.exp(-0.5 * g.x**2).astype(complex), "position")

    # transform pair
    hat = forward_transform(gauss)
    err = np.max(np.abs(hat.values - np.exp(-0.5 * g.xi**2)))
    out.append(_check("gaussian-self-dual-transform", err < 1e-10, f"max err {err:.2e}"))

    f = _rng_field(g, seed=1)
    rt = inverse_transform(forward_transform(f))
    rel = norm(Field(g, rt.values - f.values, "position"), "L2") / norm(f, "L2")
    out.append(_check("transform-round-trip", rel < 1e-12, f"rel err {rel:.2e}"))

    rel = abs(norm(forward_transform(f), "L2") - norm(f, "L2")) / norm(f, "L2")
    out.append(_check("parseval", rel < 1e-12, f"rel err {rel:.2e}"))

    d = spectral_derivative(gauss)
    err = np.max(np.abs(d.values - (-g.x * np.exp(-0.5 * g.x**2))))
    out.append(_check("spectral-derivative-gaussian", err < 1e-8, f"sup err {err:.2e}"))

    # free propagator: closed-form Gaussian evolution (phase-sensitive; a
    # flipped transform sign passes Parseval but fails here)
    g2 = Grid(2048, 60.0)
    u0 = Field(g2, np.exp(-g2.x**2).astype(complex), "position")
    t = 1.0
    exact = np.exp(-g2.x**2 / (1 + 4j * t)) / np.sqrt(1 + 4j * t)
    err = np.max(np.abs(free_evolve(u0, t).values - exact))
    out.append(_check("free-evolve-gaussian-closed-form", err < 1e-8, f"sup err {err:.2e}"))

    back = free_evolve(free_evolve(u0, 0.7), -0.7)
    err = np.max(np.abs(back.values - u0.values))
    out.append(_check("free-evolve-group-property", err < 1e-12, f"sup err {err:.2e}"))

    rel = abs(norm(free_evolve(u0, 3.3), "L2") - norm(u0, "L2")) / norm(u0, "L2")
    out.append(_check("free-evolve-unitarity", rel < 1e-12, f"rel err {rel:.2e}"))

    # J-identity ||J(t)u||_2 = ||x f||_2
    t = 2.0
    u = free_evolve(u0, t)
    j = norm(galilean_J(u, t), "L2")
    xf = norm(u0, "weightedL2")  # f = e^{-it Delta}u = u0
    rel = abs(j - xf) / xf
    out.append(_check("galilean-J-identity", rel < 1e-6, f"rel err {rel:.2e}"))

    # commutation J(t) e^{it Delta}u0 = e^{it Delta}(x u0); the box must
    # hold the ballistic spread x ~ 2 t xi of every populated frequency,
    # else the x-weight wraps and pollutes the left-hand side
    g3 = Grid(4096, 120.0)
    u0w = Field(g3, np.exp(-g3.x**2).astype(complex), "position")
    lhs = galilean_J(free_evolve(u0w, t), t).values
    rhs = free_evolve(Field(g3, g3.x * u0w.values, "position"), t).values
    rel = np.max(np.abs(lhs - rhs)) / np.max(np.abs(rhs))
    out.append(_check("galilean-J-commutation", rel < 1e-6, f"rel err {rel:.2e}"))

    # MDFM factorization vs the exact multiplier; the domain must be large
    # enough that the spread Gaussian has negligible wrap at t = 5
    g3 = Grid(4096, 120.0)
    u3 = Field(g3, np.exp(-g3.x**2).astype(complex), "position")
    err = np.max(np.abs(factorized_evolve(u3, 5.0).values - free_evolve(u3, 5.0).values))
    out.append(_check("mdfm-factorization-gaussian-t5", err < 1e-4, f"sup err {err:.2e}"))

    # chain rule for J on the cubic term (p = 2), dealiased products
    z = free_evolve(u0, 0.4)
    jz = galilean_J(z, 0.4).values
    lhs = galilean_J(cubic(z), 0.4).values
    rhs = 2.0 * np.abs(z.values) ** 2 * jz - z.values**2 * np.conj(jz)
    resid = norm(Field(g2, lhs - rhs, "position"), "L2") / norm(z, "L2") ** 3
    out.append(_check("galilean-chain-rule-cubic", resid < 1e-6, f"scaled resid {resid:.2e}"))

    # dispersion map and tau quadrature
    p = DispersionProfile.default()
    ok = D_of_tau(p, 0.0) == 0.0 and abs(D_of_tau(p, 1.0)) < 1e-15 and D_of_tau(p, 0.5) == 1.0
    out.append(_check("dispersion-D-closed-form", ok, "D(0)=D(1)=0, D(1/2)=1"))

    q8, q16, q32 = (build_quadrature(p, k) for k in (8, 16, 32))
    mean_D = float(np.dot(q16.weights, q16.D))
    out.append(_check("quadrature-mean-D", abs(mean_D - 0.5) < 1e-12, f"int D = {mean_D}"))
    s = 1.7
    rel = abs(averaged_inverse_kernel(q16, s) - averaged_inverse_kernel(q32, s))
    out.append(_check("quadrature-refinement", rel < 1e-10, f"order 16 vs 32: {rel:.2e}"))
    out.append(_check("quadrature-D-nonnegative", float(np.min(q16.D)) >= 0.0, "default tent"))

    # averaged nonlinearity identities
    gq = Grid(512, 40.0)
    uq = Field(gq, (0.3 * np.exp(-gq.x**2)).astype(complex), "position")
    q = build_quadrature(p, 8)
    disc = gauge_covariance_check(uq, math.pi / 3.0, q)
    out.append(_check("gauge-covariance", disc < 1e-12, f"L2 discrepancy {disc:.2e}"))

    nl = averaged_nonlinearity(uq, q, c=1.0)
    ip = gq.dx * np.sum(np.conj(uq.values) * nl.values)
    rel = abs(ip.imag) / abs(ip.real)
    out.append(_check("mass-symmetry", rel < 1e-12, f"Im<u,N u>/Re = {rel:.2e}"))

    # tau-average vs tent change-of-variables oracle; the tau-integrand
    # oscillates like e^{-i D(tau) xi^2}, so both sides need enough nodes
    # to be in the converged regime before they can be compared tightly
    nl64 = averaged_nonlinearity(uq, build_quadrature(p, 64), c=1.0)
    u_hat = gq.forward_raw(uq.values)

    def g_of_a(a):
        ph = np.exp(-1j * a * gq.xi**2)
        w = gq.forward_raw(np.abs(gq.inverse_raw(ph * u_hat)) ** 2 * gq.inverse_raw(ph * u_hat))
        return np.conj(ph) * w

    # compare a scalar functional of both averages
    probe = np.exp(-gq.xi**2)
    direct = float(np.real(np.sum(probe * gq.forward_raw(nl64.values))))
    oracle = tent_reduction_oracle(
        lambda a: float(np.real(np.sum(probe * g_of_a(a)))), p, npoints=96
    )
    out.append(
        _check("tent-reduction-oracle", abs(direct - oracle) < 1e-9, f"diff {abs(direct - oracle):.2e}")
    )

    # kernel bound |int dtau/(2(s+D)) - 1/(2s)| <= C s^-2
    svals = 2.0 ** np.arange(0, 11)
    kv = averaged_inverse_kernel(q16, svals)
    bracket = np.all((kv >= 0.5 / (svals + 1.0) - 1e-15) & (kv <= 0.5 / svals + 1e-15))
    C = float(np.max(np.abs(kv - 0.5 / svals) * svals**2))
    out.append(_check("theta-kernel-bound", bracket and C < 1.0, f"fitted C = {C:.4f}"))

    # rate fitting on synthetic data
    tt = np.geomspace(1, 100, 12)
    exp_, pref, r2 = fit_power_law(tt, 3.0 * tt**-0.5)
    ok = abs(exp_ + 0.5) < 1e-12 and abs(pref - 3.0) < 1e-10 and abs(r2 - 1.0) < 1e-12
    out.append(_check("power-law-fit-exact", ok, f"({exp_:.3f}, {pref:.3f}, {r2:.6f})"))
    noisy = tt**-0.55 * (1.0 + 0.01 * (-1.0) ** np.arange(tt.size))
    exp_, _, _ = fit_power_law(tt, noisy)
    out.append(_check("power-law-fit-noisy", abs(exp_ + 0.55) < 0.01, f"exponent {exp_:.4f}"))

    return out


def full_checks() -> list[CheckResult]:
    out = fast_checks()

    # RK4 self-convergence on the managed flow
    cfg = SimConfig(
        epsilon=0.2, t_end=10.0, n=1024, length=320.0, quad_order=4, dt=0.2,
        snapshot_times=(10.0,),
    )
    order = self_test_order(cfg, t_test=10.0)
    out.append(_check("integrator-self-convergence", order >= 3.5, f"observed order {order:.2f}"))

    # Strang self-convergence
    const = DispersionProfile.constant()
    ocfg = SimConfig(
        epsilon=0.2, t_end=5.0, n=1024, length=160.0, profile=const, quad_order=1,
        dt=0.05, snapshot_times=(5.0,),
    )
    errs = []
    ref = None
    for divisor in (1, 2, 4):
        state = prepare_initial(ocfg)
        u = Field(ocfg.grid, ocfg.grid.inverse_raw(state.f_hat), "position")
        h = ocfg.dt / divisor
        for _ in range(round(ocfg.t_end / h)):
            u = strang_step(u, h, const.c)
        if ref is not None:
            errs.append(float(np.max(np.abs(u.values - ref))))
        ref = u.values
    oorder = math.log2(errs[0] / errs[1])
    out.append(_check("oracle-self-convergence", oorder >= 1.8, f"observed order {oorder:.2f}"))

    # mass and energy drift on a short managed run
    cfg2 = SimConfig(
        epsilon=0.1, t_end=2.0, n=1024, length=64.0, quad_order=8, dt=0.05,
        snapshot_times=(1.0, 2.0),
    )
    traj = run(cfg2, order_check=False)
    out.append(_check("mass-drift-short-run", traj.mass_drift < 1e-10 * cfg2.t_end,
                      f"relative drift {traj.mass_drift:.2e} over t={cfg2.t_end}"))
    out.append(_check("energy-drift-short-run", traj.energy_drift < 1e-9,
                      f"relative drift {traj.energy_drift:.2e}"))

    # oracle equivalence on the degenerate (d0 == 0) problem at t = 10
    eq_cfg = SimConfig(
        epsilon=0.1, t_end=10.0, n=2048, length=320.0, profile=const, quad_order=1,
        dt=0.01, snapshot_times=(10.0,),
    )
    main = run(eq_cfg, order_check=False)
    eq_cfg_strang = SimConfig(
        epsilon=0.1, t_end=10.0, n=2048, length=320.0, profile=const, quad_order=1,
        dt=0.002, snapshot_times=(10.0,),
    )
    orac = run_oracle(eq_cfg_strang)
    u_main = main.grid.inverse_raw(
        np.exp(-1j * 10.0 * main.grid.xi**2) * main.snapshots[-1].f_hat
    )
    u_orac = orac.grid.inverse_raw(
        np.exp(-1j * 10.0 * orac.grid.xi**2) * orac.snapshots[-1].f_hat
    )
    err = float(np.max(np.abs(u_main - u_orac)))
    out.append(_check("oracle-equivalence-t10", err < 1e-6, f"sup err {err:.2e}"))

    return out


def run_checks(level: str = "fast") -> list[CheckResult]:
    if level == "fast":
        return fast_checks()
    if level == "full":
        return full_checks()
    raise ValueError(f"unknown verify level {level!r}")
