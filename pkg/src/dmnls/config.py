"""Flat key = value config files with dotted section keys.

Example:

    # reference run
    grid.n = 16384
    grid.length = 6400
    dispersion.d_plus = 3
    dispersion.d_minus = 1
    dispersion.t_plus = 0.5
    initial.epsilon = 0.1
    time.dt = 0.05
    time.t_end = 200

List-valued keys (comma-separated) are only meaningful for sweeps.
"""

from __future__ import annotations

from pathlib import Path

from .dispersion import DispersionProfile
from .integrator import ConfigurationError, SimConfig

# keys the parser understands; anything else is a config error
KNOWN_KEYS = {
    "grid.n",
    "grid.length",
    "grid.dealias",
    "dispersion.d_plus",
    "dispersion.d_minus",
    "dispersion.t_plus",
    "dispersion.d_av",
    "dispersion.c",
    "dispersion.quad_order",
    "initial.shape",
    "initial.epsilon",
    "initial.file",
    "time.dt",
    "time.t_end",
    "time.snapshot_times",
    "output.dir",
}

SWEEPABLE_KEYS = {
    "initial.epsilon",
    "dispersion.d_plus",
    "dispersion.d_minus",
    "dispersion.t_plus",
    "dispersion.d_av",
    "dispersion.c",
}


def parse_config_text(text: str, source: str = "<config>") -> dict[str, str]:
    entries: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigurationError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in KNOWN_KEYS:
            raise ConfigurationError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigurationError(f"{source}:{lineno}: duplicate key {key!r}")
        entries[key] = value
    return entries


def parse_config(path) -> dict[str, str]:
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    return parse_config_text(path.read_text(), source=str(path))


def _as_bool(value: str, key: str) -> bool:
    v = value.strip().lower()
    if v in ("true", "yes", "1", "on"):
        return True
    if v in ("false", "no", "0", "off"):
        return False
    raise ConfigurationError(f"{key}: expected a boolean, got {value!r}")


def _get(entries, key, cast, default):
    if key not in entries:
        return default
    try:
        return cast(entries[key])
    except ConfigurationError:
        raise
    except ValueError as exc:
        raise ConfigurationError(f"{key}: {exc}") from exc


def build_sim_config(entries: dict[str, str]) -> SimConfig:
    """Assemble a SimConfig from parsed entries; raises ConfigurationError."""
    d_plus = _get(entries, "dispersion.d_plus", float, 3.0)
    d_minus = _get(entries, "dispersion.d_minus", float, 1.0)
    t_plus = _get(entries, "dispersion.t_plus", float, 0.5)
    d_av = _get(entries, "dispersion.d_av", float, None)
    c = _get(entries, "dispersion.c", float, 1.0)
    if d_av is None:
        d_av = d_plus * t_plus - d_minus * (1.0 - t_plus)
    try:
        profile = DispersionProfile(
            d_plus=d_plus, d_minus=d_minus, t_plus=t_plus, d_av=d_av, c=c
        )
    except ValueError as exc:
        raise ConfigurationError(f"dispersion: {exc}") from exc

    snapshot_times = None
    if "time.snapshot_times" in entries:
        try:
            snapshot_times = tuple(
                float(v) for v in entries["time.snapshot_times"].split(",") if v.strip()
            )
        except ValueError as exc:
            raise ConfigurationError(f"time.snapshot_times: {exc}") from exc

    if "time.t_end" not in entries:
        raise ConfigurationError("time.t_end is required")
    if "initial.epsilon" not in entries and entries.get("initial.shape") != "custom-file":
        raise ConfigurationError("initial.epsilon is required")

    return SimConfig(
        epsilon=_get(entries, "initial.epsilon", float, 0.0),
        t_end=_get(entries, "time.t_end", float, None),
        n=_get(entries, "grid.n", int, 2**14),
        length=_get(entries, "grid.length", float, None),
        profile=profile,
        quad_order=_get(entries, "dispersion.quad_order", int, 16),
        dt=_get(entries, "time.dt", float, 0.05),
        snapshot_times=snapshot_times,
        initial_shape=entries.get("initial.shape", "gaussian"),
        initial_file=entries.get("initial.file"),
        dealias=_get(entries, "grid.dealias", lambda v: _as_bool(v, "grid.dealias"), True),
    )


def sweep_cells(entries: dict[str, str]) -> list[dict[str, str]]:
    """Expand comma-separated values of sweepable keys into a Cartesian grid."""
    lists: dict[str, list[str]] = {}
    for key in SWEEPABLE_KEYS:
        if key in entries and "," in entries[key]:
            lists[key] = [v.strip() for v in entries[key].split(",") if v.strip()]
    cells = [dict(entries)]
    for key, values in sorted(lists.items()):
        cells = [dict(cell, **{key: v}) for cell in cells for v in values]
    return cells
