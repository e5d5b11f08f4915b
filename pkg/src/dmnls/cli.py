"""Command-line entry point.

    dmnls run <config>             integrate and write a run directory
    dmnls verify [--level ...]     named invariant suites (fast | full)
    dmnls scatter <run_dir>        extract W0/Phi_inf/W and fit the rates
    dmnls sweep <config> [--jobs]  Cartesian parameter sweeps

Exit codes: 0 success, 1 failed verification, 2 config error,
3 numerical abort, 4 certification failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from datetime import datetime, timezone
from pathlib import Path

from .config import build_sim_config, parse_config, sweep_cells
from .integrator import ConfigurationError, run
from .runio import load_trajectory, write_run_dir, write_scattering
from .scattering import extract_scattering_data

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_CERTIFICATION = 4

PREDICTED = {"decay": -0.5, "residual": -(0.5 + 1.0 / 20.0), "g_rate": -1.0 / 20.0}


def _out_root(entries) -> Path:
    env = os.environ.get("DMNLS_OUT")
    if env:
        return Path(env)
    if "output.dir" in entries:
        return Path(entries["output.dir"])
    return Path("runs")


def cmd_run(args) -> int:
    try:
        entries = parse_config(args.config)
        config = build_sim_config(entries)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    started = datetime.now(timezone.utc).isoformat()
    traj = run(config, log=print if args.verbose else None)
    if args.out:
        out_dir = Path(args.out)
    else:
        stamp = datetime.now(timezone.utc).strftime("%Y%m%dT%H%M%S")
        out_dir = _out_root(entries) / f"{Path(args.config).stem}-{stamp}"
    write_run_dir(traj, out_dir, started_at=started)
    print(f"run directory: {out_dir}")
    print(f"status: {traj.status}; certification: {traj.certification}")
    if traj.status != "completed":
        print(f"numerical abort: {traj.status}", file=sys.stderr)
        return EXIT_NUMERICAL
    if not traj.certified:
        failing = [k for k, v in traj.certification.items() if not v]
        print(f"certification failed: {failing}", file=sys.stderr)
        return EXIT_CERTIFICATION
    return EXIT_OK


def cmd_verify(args) -> int:
    from .verify import run_checks

    checks = run_checks(args.level)
    failed = [c for c in checks if not c.passed]
    for c in checks:
        print(f"{'PASS' if c.passed else 'FAIL'}  {c.name}: {c.detail}")
    if failed:
        print(f"{len(failed)} invariant(s) failed: {[c.name for c in failed]}",
              file=sys.stderr)
        return EXIT_VERIFY_FAILED
    print(f"all {len(checks)} invariants passed ({args.level})")
    return EXIT_OK


def cmd_scatter(args) -> int:
    try:
        traj = load_trajectory(args.run_dir)
    except FileNotFoundError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not traj.certified:
        print(
            f"run directory is not certified (status={traj.status}, "
            f"certification={traj.certification})",
            file=sys.stderr,
        )
        return EXIT_CERTIFICATION
    t_final = traj.snapshots[-1].t
    try:
        result = extract_scattering_data(traj, t_final, fit_t_min=args.t_min)
    except ValueError as exc:
        print(f"scatter failed: {exc}", file=sys.stderr)
        return EXIT_CERTIFICATION
    write_scattering(result, traj, args.run_dir)

    def fmt(v):
        return "n/a (fit refused)" if math.isnan(v) else f"{v:+.4f}"

    print(f"{'quantity':<22}{'fitted':>20}{'predicted':>12}")
    print(f"{'decay exponent':<22}{fmt(result.decay_exponent):>20}{PREDICTED['decay']:>12}")
    print(f"{'residual exponent':<22}{fmt(-result.residual_exponent):>20}{PREDICTED['residual']:>12}")
    print(f"{'g-convergence rate':<22}{fmt(result.g_convergence_rate):>20}{PREDICTED['g_rate']:>12}")
    for name, fit in result.fits.items():
        if hasattr(fit, "note") and fit.note:
            print(f"note ({name}): {fit.note}")
    if not result.stable:
        print("warning: W changed beyond the dyadic envelope under T_final halving",
              file=sys.stderr)
    print(f"wrote scattering.csv and rates.json to {args.run_dir}")
    return EXIT_OK


def _sweep_cell(cell_entries: dict, out_dir: str) -> dict:
    """Run one sweep cell; returns the aggregate row. Runs in a worker."""
    row = {
        "eps": cell_entries.get("initial.epsilon", ""),
        "d_plus": cell_entries.get("dispersion.d_plus", "3"),
        "d_minus": cell_entries.get("dispersion.d_minus", "1"),
        "t_plus": cell_entries.get("dispersion.t_plus", "0.5"),
        "decay_exp": "",
        "residual_exp": "",
        "g_rate": "",
        "status": "ok",
    }
    try:
        config = build_sim_config(cell_entries)
    except ConfigurationError:
        row["status"] = "config_error"
        return row
    try:
        traj = run(config)
        write_run_dir(traj, out_dir)
        if traj.status != "completed":
            row["status"] = traj.status
            return row
        if not traj.certified:
            row["status"] = "uncertified"
            return row
        result = extract_scattering_data(traj, traj.snapshots[-1].t)
        write_scattering(result, traj, out_dir)
        row["decay_exp"] = repr(result.decay_exponent)
        row["residual_exp"] = repr(result.residual_exponent)
        row["g_rate"] = repr(result.g_convergence_rate)
    except Exception as exc:  # cell failures must not kill the sweep
        row["status"] = f"error: {type(exc).__name__}"
    return row


def cmd_sweep(args) -> int:
    try:
        entries = parse_config(args.config)
        cells = sweep_cells(entries)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    root = Path(args.out) if args.out else _out_root(entries) / (Path(args.config).stem + "-sweep")
    root.mkdir(parents=True, exist_ok=True)
    cell_dirs = [str(root / f"cell-{i:03d}") for i in range(len(cells))]

    if args.jobs > 1:
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_cell, cells, cell_dirs))
    else:
        rows = [_sweep_cell(c, d) for c, d in zip(cells, cell_dirs)]

    header = "eps,d_plus,d_minus,t_plus,decay_exp,residual_exp,g_rate,status"
    lines = [header] + [",".join(str(r[k]) for k in header.split(",")) for r in rows]
    tmp = root / "sweep.csv.tmp"
    tmp.write_text("\n".join(lines) + "\n")
    os.replace(tmp, root / "sweep.csv")
    print(f"wrote {root / 'sweep.csv'} ({len(rows)} cells)")
    for r in rows:
        print(f"  eps={r['eps']} d+={r['d_plus']} d-={r['d_minus']} "
              f"t+={r['t_plus']}: {r['status']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dmnls", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="integrate a config and write a run directory")
    p_run.add_argument("config")
    p_run.add_argument("--out", help="explicit run directory")
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(func=cmd_run)

    p_verify = sub.add_parser("verify", help="run the named invariant suites")
    p_verify.add_argument("--level", choices=("fast", "full"), default="fast")
    p_verify.set_defaults(func=cmd_verify)

    p_scatter = sub.add_parser("scatter", help="scattering analysis of a run directory")
    p_scatter.add_argument("run_dir")
    p_scatter.add_argument("--t-min", type=float, default=25.0, dest="t_min",
                           help="transient exclusion for rate fits")
    p_scatter.set_defaults(func=cmd_scatter)

    p_sweep = sub.add_parser("sweep", help="Cartesian sweep over list-valued keys")
    p_sweep.add_argument("config")
    p_sweep.add_argument("--jobs", type=int, default=1)
    p_sweep.add_argument("--out", help="sweep output root")
    p_sweep.set_defaults(func=cmd_sweep)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
