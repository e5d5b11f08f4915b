"""Uniform periodic grid and the discrete Fourier transform pair.

The continuum convention is

    F[f](xi)  = (2*pi)^(-1/2) * integral e^{+i x xi} f(x) dx
    F^{-1}[F](x) = (2*pi)^(-1/2) * integral e^{-i x xi} F(xi) dxi

so that d/dx corresponds to multiplication by -i*xi and the free
propagator e^{it Delta} to the multiplier e^{-it xi^2}.  Note the
*plus* sign in the forward kernel: this is the opposite of the usual
FFT convention, and the wrapping below is the single place where the
two conventions meet.  Frequency arrays are stored in monotonically
increasing xi order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np
from numpy.fft import fft, ifft, fftshift, ifftshift

_SQRT_2PI = math.sqrt(2.0 * math.pi)

# alternating-sign arrays, keyed by n (they encode e^{-i pi m})
_SIGN_CACHE: dict[int, np.ndarray] = {}


class FieldError(ValueError):
    """Raised for space-tag mismatches and non-finite samples."""


def _signs(n: int) -> np.ndarray:
    s = _SIGN_CACHE.get(n)
    if s is None:
        s = np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
        _SIGN_CACHE[n] = s
    return s


@dataclass(frozen=True)
class Grid:
    """Uniform lattice on [-L/2, L/2) with its dual frequency lattice."""

    n: int
    length: float

    def __post_init__(self):
        if self.n < 8 or (self.n & (self.n - 1)) != 0:
            raise ValueError(f"n must be a power of two >= 8, got {self.n}")
        if not (self.length > 0 and np.isfinite(self.length)):
            raise ValueError(f"length must be positive and finite, got {self.length}")

    @property
    def dx(self) -> float:
        return self.length / self.n

    @property
    def dxi(self) -> float:
        return 2.0 * math.pi / self.length

    @property
    def x(self) -> np.ndarray:
        return -0.5 * self.length + self.dx * np.arange(self.n)

    @property
    def xi(self) -> np.ndarray:
        # m = -n/2 .. n/2-1; the single Nyquist mode -n/2 is unpaired
        return self.dxi * np.arange(-(self.n // 2), self.n // 2)

    # -- raw array transforms (batched over leading axes, natural xi order) --

    def forward_raw(self, values: np.ndarray) -> np.ndarray:
        """Position samples -> frequency samples under the e^{+ix xi} kernel."""
        n = self.n
        scale = self.dx * n / _SQRT_2PI
        return fftshift(_signs(n) * ifft(values, axis=-1), axes=-1) * scale

    def inverse_raw(self, values: np.ndarray) -> np.ndarray:
        """Exact inverse of :meth:`forward_raw`."""
        n = self.n
        scale = self.dx * n / _SQRT_2PI
        return fft(ifftshift(values, axes=-1) * _signs(n), axis=-1) / scale

    def l2_weight(self, space: str) -> float:
        return self.dx if space == "position" else self.dxi


@dataclass(frozen=True)
class Field:
    """Complex samples on a Grid, tagged position- or frequency-space."""

    grid: Grid
    values: np.ndarray
    space: str  # "position" | "frequency"

    def __post_init__(self):
        if self.space not in ("position", "frequency"):
            raise FieldError(f"unknown space tag {self.space!r}")
        v = np.asarray(self.values, dtype=complex)
        if v.shape != (self.grid.n,):
            raise FieldError(
                f"values shape {v.shape} does not match grid size {self.grid.n}"
            )
        if not np.all(np.isfinite(v.view(float))):
            raise FieldError("field contains non-finite samples")
        object.__setattr__(self, "values", v)

    @property
    def coords(self) -> np.ndarray:
        return self.grid.x if self.space == "position" else self.grid.xi


def _require(f: Field, space: str, op: str):
    if f.space != space:
        raise FieldError(f"{op} expects a {space}-space field, got {f.space}")


def forward_transform(f: Field) -> Field:
    """Discrete realization of F[f](xi) = (2 pi)^(-1/2) int e^{+ix xi} f dx."""
    _require(f, "position", "forward_transform")
    return Field(f.grid, f.grid.forward_raw(f.values), "frequency")


def inverse_transform(F: Field) -> Field:
    _require(F, "frequency", "inverse_transform")
    return Field(F.grid, F.grid.inverse_raw(F.values), "position")


def spectral_derivative(f: Field) -> Field:
    """d/dx via the multiplier -i xi (matching the e^{+i x xi} forward kernel)."""
    _require(f, "position", "spectral_derivative")
    hat = f.grid.forward_raw(f.values)
    return Field(f.grid, f.grid.inverse_raw(-1j * f.grid.xi * hat), "position")


def norm(f: Field, kind: str) -> float:
    """Lattice norms: L2, Linf, H1, H11 (= H1 + ||x f||_2), weightedL2."""
    g = f.grid
    if kind == "Linf":
        return float(np.max(np.abs(f.values)))
    if kind == "L2":
        w = g.l2_weight(f.space)
        return float(math.sqrt(w * np.sum(np.abs(f.values) ** 2)))
    _require(f, "position", f"norm kind {kind!r}")
    if kind == "weightedL2":
        return float(math.sqrt(g.dx * np.sum(g.x**2 * np.abs(f.values) ** 2)))
    hat = g.forward_raw(f.values)
    h1 = math.sqrt(g.dxi * np.sum((1.0 + g.xi**2) * np.abs(hat) ** 2))
    if kind == "H1":
        return float(h1)
    if kind == "H11":
        return float(h1) + norm(f, "weightedL2")
    raise ValueError(f"unknown norm kind {kind!r}")


def boundary_mass_fraction(u: Field) -> float:
    """Fraction of the L2 mass in the outer 10% of the spatial domain."""
    _require(u, "position", "boundary_mass_fraction")
    g = u.grid
    dens = np.abs(u.values) ** 2
    total = float(np.sum(dens))
    if total == 0.0:
        return 0.0
    outer = np.abs(g.x) > 0.45 * g.length
    return float(np.sum(dens[outer]) / total)


# -- CSV serialization: columns coord,re,im with a one-line metadata header --

def write_field_csv(f: Field, path, t: float):
    with open(path, "w") as fh:
        fh.write(f"# space={f.space} t={t!r} n={f.grid.n} L={f.grid.length!r}\n")
        fh.write("coord,re,im\n")
        for c, v in zip(f.coords, f.values):
            fh.write(f"{float(c)!r},{float(v.real)!r},{float(v.imag)!r}\n")


def read_field_csv(path) -> tuple[Field, float]:
    """Returns (field, snapshot time)."""
    with open(path) as fh:
        header = fh.readline().strip()
        if not header.startswith("# "):
            raise FieldError(f"{path}: missing metadata header")
        meta = dict(item.split("=", 1) for item in header[2:].split())
        fh.readline()  # column names
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = Grid(int(meta["n"]), float(meta["L"]))
    values = data[:, 1] + 1j * data[:, 2]
    return Field(grid, values, meta["space"]), float(meta["t"])
