"""Modified-scattering analysis: accumulated phase, renormalized profile,
limit extraction, and power-law rate fits.

The self-phase Theta(t, xi) integrates (2(s + D(tau)))^-1 |f_hat(s, xi)|^2
over the tau average and over s in [1, t].  The renormalized profile
g = e^{i Theta} f_hat converges to a limit W0; the non-logarithmic phase
remainder converges to Phi_inf; W = e^{-i Phi_inf} W0 is the scattering
profile entering the asymptotic comparator

    u(t, x) ~ (2it)^{-1/2} e^{ix^2/4t} exp{-(i/2)|W|^2 log t} W

with W sampled at -x/(2t) (the dilation argument carries a reflection
under the e^{+ix xi} forward transform convention used throughout).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from scipy.stats import linregress

from .dispersion import TauQuadrature, averaged_inverse_kernel
from .grid import Grid
from .observables import RATE_EXPONENT


@dataclass
class PhaseAccumulator:
    """Theta(t, xi) on the frequency lattice; owned by the stepping loop."""

    theta: np.ndarray
    last_update_time: float = 1.0

    @classmethod
    def zeros(cls, n: int) -> "PhaseAccumulator":
        return cls(theta=np.zeros(n), last_update_time=1.0)


def accumulate_theta(
    acc: PhaseAccumulator,
    s_points: tuple[float, float, float],
    fhat_sq: tuple[np.ndarray, np.ndarray, np.ndarray],
    q: TauQuadrature,
    c: float = 1.0,
) -> PhaseAccumulator:
    """Simpson update of Theta over [s0, s2] from |f_hat|^2 stage samples.

    The integrand c * K(s) |f_hat(s)|^2 with K(s) = int dtau / (2(s+D)) is
    nonnegative for D >= 0, so every update is monotone per xi-bin.
    """
    s0, s1, s2 = s_points
    h = s2 - s0
    k0, k1, k2 = (averaged_inverse_kernel(q, s) for s in s_points)
    acc.theta += (c * h / 6.0) * (k0 * fhat_sq[0] + 4.0 * k1 * fhat_sq[1] + k2 * fhat_sq[2])
    acc.last_update_time = s2
    return acc


def renormalized_profile(f_hat: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """g = e^{i Theta} f_hat; |g| = |f_hat| exactly."""
    return np.exp(1j * theta) * f_hat


def fit_power_law(t, y) -> tuple[float, float, float]:
    """Least squares of log y on log t: returns (exponent, prefactor, r^2)."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    if t.size < 5:
        raise ValueError(f"power-law fit needs >= 5 points, got {t.size}")
    if np.any(y <= 0.0):
        raise ValueError("power-law fit needs strictly positive values")
    if np.max(t) < 6.0 * np.min(t):
        raise ValueError("power-law fit needs t spanning at least a factor of 6")
    res = linregress(np.log(t), np.log(y))
    return float(res.slope), float(math.exp(res.intercept)), float(res.rvalue**2)


@dataclass
class SeriesFit:
    times: np.ndarray
    values: np.ndarray
    exponent: float = math.nan
    prefactor: float = math.nan
    r_squared: float = math.nan
    window: tuple[float, float] = (math.nan, math.nan)
    note: str = ""


def _fit_series(times, values, t_min) -> SeriesFit:
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    sel = times >= t_min
    fit = SeriesFit(times=times, values=values)
    if np.any(sel):
        fit.window = (float(np.min(times[sel])), float(np.max(times[sel])))
    try:
        fit.exponent, fit.prefactor, fit.r_squared = fit_power_law(
            times[sel], values[sel]
        )
    except ValueError as exc:
        fit.note = str(exc)
    return fit


def _window_snapshots(traj, t_min: float):
    return [s for s in traj.snapshots if s.t >= t_min]


def dtg_diagnostic(traj, fit_t_min: float = 25.0) -> SeriesFit:
    """||Delta g / Delta t||_Linf between consecutive snapshots, plus rate fit.

    Stand-in for the remainder term driving d/dt g; predicted decay
    t^(-1 - 1/20) for small data.
    """
    snaps = _window_snapshots(traj, 1.0)
    if len(snaps) < 3:
        raise ValueError("dtg_diagnostic needs at least 3 snapshots with t >= 1")
    times, values = [], []
    for a, b in zip(snaps, snaps[1:]):
        ga = renormalized_profile(a.f_hat, a.theta)
        gb = renormalized_profile(b.f_hat, b.theta)
        times.append(math.sqrt(a.t * b.t))
        values.append(float(np.max(np.abs(gb - ga))) / (b.t - a.t))
    return _fit_series(times, values, fit_t_min)


def dyadic_profile_differences(traj, fit_t_min: float = 1.0) -> SeriesFit:
    """||g(2t) - g(t)||_Linf over snapshot pairs (t, 2t), plus rate fit."""
    snaps = _window_snapshots(traj, 1.0)
    by_time = {round(s.t, 9): s for s in snaps}
    times, values = [], []
    for s in snaps:
        partner = by_time.get(round(2.0 * s.t, 9))
        if partner is None:
            continue
        ga = renormalized_profile(s.f_hat, s.theta)
        gb = renormalized_profile(partner.f_hat, partner.theta)
        times.append(s.t)
        values.append(float(np.max(np.abs(gb - ga))))
    if len(times) < 2:
        raise ValueError("no dyadic snapshot pairs with t >= 1 found")
    return _fit_series(times, values, fit_t_min)


@dataclass
class ScatteringResult:
    xi: np.ndarray
    W0: np.ndarray
    Phi_inf: np.ndarray
    W: np.ndarray
    T_final: float
    decay_exponent: float = math.nan
    residual_exponent: float = math.nan
    g_convergence_rate: float = math.nan
    stable: bool = True
    fits: dict = dc_field(default_factory=dict)


def extract_scattering_data(
    traj,
    T_final: float,
    fit_t_min: float = 25.0,
    require_certified: bool = True,
) -> ScatteringResult:
    """Read W0, Phi_inf, W off the latest profile and fit the headline rates.

    Phi_inf is estimated at the single time T_final; halving T_final must
    move W by less than the fitted t^(-1/20) dyadic envelope, otherwise
    the result is flagged unstable.
    """
    if require_certified and not traj.certified:
        raise ValueError(f"trajectory is not certified ({traj.status}, {traj.certification})")
    if T_final < 50.0:
        raise ValueError(f"T_final must be >= 50, got {T_final}")

    def nearest(t_target):
        return min(traj.snapshots, key=lambda s: abs(s.t - t_target))

    snap = nearest(T_final)
    W0 = renormalized_profile(snap.f_hat, snap.theta)
    Phi_inf = snap.theta - 0.5 * np.abs(W0) ** 2 * math.log(snap.t) if snap.t > 0 else snap.theta.copy()
    W = np.exp(-1j * Phi_inf) * W0
    result = ScatteringResult(
        xi=traj.grid.xi.copy(), W0=W0, Phi_inf=Phi_inf, W=W, T_final=snap.t
    )

    records = [s.record for s in traj.snapshots if s.record is not None and s.t > 0]
    linf = _fit_series([r.t for r in records], [r.linf_u for r in records], fit_t_min)
    result.decay_exponent = linf.exponent
    result.fits["decay"] = linf

    try:
        dyadic = dyadic_profile_differences(traj)
        result.g_convergence_rate = dyadic.exponent
        result.fits["g_convergence"] = dyadic
    except ValueError as exc:
        dyadic = None
        result.fits["g_convergence"] = SeriesFit(
            times=np.array([]), values=np.array([]), note=str(exc)
        )

    resid = residual_series(traj, result, t_min=fit_t_min)
    result.residual_exponent = -resid.exponent if not math.isnan(resid.exponent) else math.nan
    result.fits["residual"] = resid

    # stability of W under halving the extraction time
    half = nearest(snap.t / 2.0)
    if half.t >= 1.0 and half.t < snap.t:
        g_half = renormalized_profile(half.f_hat, half.theta)
        change = float(np.max(np.abs(W0 - g_half)))
        if dyadic is not None and not math.isnan(dyadic.exponent):
            envelope = 4.0 * dyadic.prefactor * half.t**dyadic.exponent
        else:
            envelope = 0.5 * float(np.max(np.abs(W0))) + 1e-12
        result.stable = change <= envelope
        result.fits["stability"] = {"change": change, "envelope": envelope, "t_half": half.t}
    return result


def asymptotic_field(result, t: float, grid: Grid) -> np.ndarray:
    """Evaluate the modified-scattering comparator at time t on grid.x.

    W is interpolated linearly at -x/(2t) (zero outside the stored
    frequency range); raises if the dilation arguments fail to cover 99%
    of W's L2 mass, i.e. the box is too small for this time.
    """
    if t < 1.0:
        raise ValueError("asymptotic comparator is defined for t >= 1")
    W = result.W if hasattr(result, "W") else np.asarray(result)
    xi = result.xi if hasattr(result, "xi") else grid.xi
    xi_star = -grid.x / (2.0 * t)
    lo, hi = float(np.min(xi_star)), float(np.max(xi_star))
    mass = np.abs(W) ** 2
    total = float(np.sum(mass))
    covered = float(np.sum(mass[(xi >= lo) & (xi <= hi)]))
    coverage = covered / total if total > 0 else 1.0
    if coverage < 0.99:
        raise ValueError(
            f"dilation arguments cover only {coverage:.3f} of the scattering "
            "profile's mass; the box is too small for this time"
        )
    inside = (xi_star >= xi[0]) & (xi_star <= xi[-1])
    Ws = np.interp(xi_star, xi, W.real) + 1j * np.interp(xi_star, xi, W.imag)
    Ws[~inside] = 0.0
    log_phase = np.exp(-0.5j * np.abs(Ws) ** 2 * math.log(t))
    chirp = np.exp(1j * grid.x**2 / (4.0 * t))
    return chirp * log_phase * Ws / np.sqrt(2j * t)


def residual_series(traj, result, t_min: float = 25.0) -> SeriesFit:
    """||u(t) - comparator(t)||_Linf per snapshot with a companion beta fit.

    The stored exponent is the log-log slope (negative); the headline
    residual exponent beta is its negation.
    """
    times, values = [], []
    for s in traj.snapshots:
        if s.t < 1.0:
            continue
        u = traj.grid.inverse_raw(np.exp(-1j * s.t * traj.grid.xi**2) * s.f_hat)
        try:
            approx = asymptotic_field(result, s.t, traj.grid)
        except ValueError:
            continue
        times.append(s.t)
        values.append(float(np.max(np.abs(u - approx))))
    return _fit_series(times, values, t_min)


def theta_kernel_constant(q: TauQuadrature, s_values=None) -> float:
    """Fitted C in |int dtau/(2(s+D)) - 1/(2s)| <= C s^-2 over dyadic s."""
    if s_values is None:
        s_values = 2.0 ** np.arange(0, 11)
    s_values = np.asarray(s_values, dtype=float)
    diff = np.abs(averaged_inverse_kernel(q, s_values) - 0.5 / s_values)
    return float(np.max(diff * s_values**2))
