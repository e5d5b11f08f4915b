"""Run-directory layout: manifest, observables table, snapshot files.

Every artifact is written to a temporary file and renamed into place, so
an aborted process never leaves a partially written CSV behind.  A run
directory is self-describing: the manifest echoes the full resolved
configuration and the certification flags, and scatter analysis can be
re-run from the directory alone, bit-for-bit.
"""

from __future__ import annotations

import dataclasses
import json
import math
import os
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .dispersion import DispersionProfile, build_quadrature
from .grid import Field, Grid, read_field_csv, write_field_csv
from .integrator import SimConfig, Snapshot, Trajectory
from .observables import CSV_COLUMNS, ObservablesRecord
from .scattering import ScatteringResult


def _atomic_write(path: Path, writer):
    tmp = path.with_name(path.name + ".tmp")
    writer(tmp)
    os.replace(tmp, path)


def _atomic_text(path: Path, text: str):
    _atomic_write(path, lambda tmp: tmp.write_text(text))


def config_to_dict(config: SimConfig) -> dict:
    p = config.profile
    return {
        "initial.epsilon": config.epsilon,
        "initial.shape": config.initial_shape,
        "initial.file": config.initial_file,
        "grid.n": config.n,
        "grid.length": config.grid.length,
        "grid.dealias": config.dealias,
        "dispersion.d_plus": p.d_plus,
        "dispersion.d_minus": p.d_minus,
        "dispersion.t_plus": p.t_plus,
        "dispersion.d_av": p.d_av,
        "dispersion.c": p.c,
        "dispersion.quad_order": config.quad_order,
        "time.dt": config.dt,
        "time.t_end": config.t_end,
        "time.snapshot_times": list(config.snapshot_times)
        if config.snapshot_times is not None
        else None,
    }


def config_from_dict(d: dict) -> SimConfig:
    profile = DispersionProfile(
        d_plus=d["dispersion.d_plus"],
        d_minus=d["dispersion.d_minus"],
        t_plus=d["dispersion.t_plus"],
        d_av=d["dispersion.d_av"],
        c=d["dispersion.c"],
    )
    return SimConfig(
        epsilon=d["initial.epsilon"],
        t_end=d["time.t_end"],
        n=d["grid.n"],
        length=d["grid.length"],
        profile=profile,
        quad_order=d["dispersion.quad_order"],
        dt=d["time.dt"],
        snapshot_times=tuple(d["time.snapshot_times"])
        if d.get("time.snapshot_times") is not None
        else None,
        initial_shape=d["initial.shape"],
        initial_file=d.get("initial.file"),
        dealias=d["grid.dealias"],
    )


def _snapshot_name(index: int, kind: str) -> str:
    return f"{kind}_{index:04d}.csv"


def write_run_dir(traj: Trajectory, out_dir, started_at: str | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    manifest = {
        "code_version": __version__,
        "scheme": traj.scheme,
        "started_at": started_at or datetime.now(timezone.utc).isoformat(),
        "finished_at": datetime.now(timezone.utc).isoformat(),
        "wall_time_seconds": traj.wall_time,
        "status": traj.status,
        "certification": traj.certification,
        "mass_drift": traj.mass_drift,
        "energy_drift": traj.energy_drift,
        "observed_order": traj.observed_order,
        "crude_bound_ratio": traj.crude_bound_ratio,
        "config": config_to_dict(traj.config),
        "snapshot_times": [s.t for s in traj.snapshots],
    }
    _atomic_text(out / "manifest.json", json.dumps(manifest, indent=2))

    rows = [CSV_COLUMNS]
    rows += [s.record.csv_row() for s in traj.snapshots if s.record is not None]
    _atomic_text(out / "observables.csv", "\n".join(rows) + "\n")

    for i, snap in enumerate(traj.snapshots):
        f = Field(traj.grid, snap.f_hat, "frequency")
        _atomic_write(
            out / _snapshot_name(i, "snapshot"),
            lambda tmp, f=f, t=snap.t: write_field_csv(f, tmp, t),
        )
        theta_rows = ["xi,theta"] + [
            f"{float(xi)!r},{float(th)!r}" for xi, th in zip(traj.grid.xi, snap.theta)
        ]
        _atomic_text(out / _snapshot_name(i, "theta"), "\n".join(theta_rows) + "\n")
    return out


def _read_records(path: Path) -> dict[float, ObservablesRecord]:
    records = {}
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        for line in fh:
            values = dict(zip(header, (float(v) for v in line.strip().split(","))))
            records[values["t"]] = ObservablesRecord(**values)
    return records


def load_trajectory(run_dir) -> Trajectory:
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise FileNotFoundError(f"{run_dir} has no manifest.json; not a run directory")
    manifest = json.loads(manifest_path.read_text())
    config = config_from_dict(manifest["config"])
    grid = config.grid
    quad = build_quadrature(config.profile, config.quad_order)
    records = _read_records(run_dir / "observables.csv")

    snapshots = []
    for i in range(len(manifest["snapshot_times"])):
        f, t = read_field_csv(run_dir / _snapshot_name(i, "snapshot"))
        theta = np.loadtxt(run_dir / _snapshot_name(i, "theta"), delimiter=",", skiprows=1)[:, 1]
        snapshots.append(Snapshot(t=t, f_hat=f.values, theta=theta, record=records.get(t)))

    return Trajectory(
        config=config,
        grid=grid,
        quad=quad,
        snapshots=snapshots,
        status=manifest["status"],
        certification=manifest["certification"],
        mass_drift=manifest["mass_drift"],
        energy_drift=manifest["energy_drift"],
        observed_order=manifest["observed_order"],
        crude_bound_ratio=manifest["crude_bound_ratio"],
        wall_time=manifest["wall_time_seconds"],
        scheme=manifest["scheme"],
    )


def _fit_to_dict(fit) -> dict:
    if isinstance(fit, dict):
        return fit
    return {
        "exponent": fit.exponent,
        "prefactor": fit.prefactor,
        "r_squared": fit.r_squared,
        "window": list(fit.window),
        "points": len(fit.times),
        "note": fit.note,
    }


def write_scattering(result: ScatteringResult, traj: Trajectory, run_dir) -> Path:
    run_dir = Path(run_dir)
    rows = ["xi,W0_re,W0_im,Phi_inf,W_re,W_im"]
    for xi, w0, phi, w in zip(result.xi, result.W0, result.Phi_inf, result.W):
        rows.append(
            f"{float(xi)!r},{float(w0.real)!r},{float(w0.imag)!r},"
            f"{float(phi)!r},{float(w.real)!r},{float(w.imag)!r}"
        )
    _atomic_text(run_dir / "scattering.csv", "\n".join(rows) + "\n")

    decay_bound_ratios = [
        s.record.decay_bound_ratio
        for s in traj.snapshots
        if s.record is not None and not math.isnan(s.record.decay_bound_ratio)
    ]
    rates = {
        "decay_exponent": result.decay_exponent,
        "residual_exponent": result.residual_exponent,
        "g_convergence_rate": result.g_convergence_rate,
        "decay_bound_constant": max(decay_bound_ratios) if decay_bound_ratios else None,
        "theta_kernel_constant": None,  # filled by the caller (needs the quadrature)
        "T_final": result.T_final,
        "stable": result.stable,
        "fits": {name: _fit_to_dict(fit) for name, fit in result.fits.items()},
    }
    from .scattering import theta_kernel_constant

    rates["theta_kernel_constant"] = theta_kernel_constant(traj.quad)
    _atomic_text(run_dir / "rates.json", json.dumps(rates, indent=2))
    return run_dir
