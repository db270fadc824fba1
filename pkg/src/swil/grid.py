"""Torus grid and spectral primitives.

Fields live on the square torus of side 2*pi*L sampled N x N (L is the period
scale, N the points per axis), so the frequency lattice is xi = k/L with
integer k per axis in [-N/2, N/2). Transforms are unitary (norm="ortho").

Scaling conventions, used throughout the package:
  * a physical field equal to sum_k c_k exp(i xi_k . x) has spectral values
    N * c_k in the arrays stored here;
  * a field sampled from a function on the plane whose Fourier transform is F
    (in the convention f(x) = integral of F(xi) exp(i x.xi) dxi) has
    c_k = F(xi_k) / L**2 up to periodization, i.e. spectral values
    N * F(xi_k) / L**2. `continuum_equivalent` undoes this.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.fft as sfft

from .errors import ConfigError, RepresentationError

PHYSICAL = "physical"
SPECTRAL = "spectral"

# scipy.fft worker count; set_fft_workers plumbs the CLI --workers flag through.
_FFT_WORKERS: int | None = None


def set_fft_workers(workers: int | None) -> None:
    global _FFT_WORKERS
    _FFT_WORKERS = workers


def fft2o(values: np.ndarray) -> np.ndarray:
    """Unitary 2D FFT over the last two axes."""
    return sfft.fft2(values, norm="ortho", workers=_FFT_WORKERS)


def ifft2o(values: np.ndarray) -> np.ndarray:
    """Unitary 2D inverse FFT over the last two axes."""
    return sfft.ifft2(values, norm="ortho", workers=_FFT_WORKERS)


def _int_floor(v: float) -> int:
    return math.floor(v + 1e-12)


def _int_ceil(v: float) -> int:
    return math.ceil(v - 1e-12)


@dataclass(frozen=True)
class GridSpec:
    """Square torus grid: side 2*pi*period_scale, points_per_axis per axis."""

    points_per_axis: int = 256
    period_scale: float = 16.0

    def __post_init__(self) -> None:
        if self.points_per_axis <= 0 or self.points_per_axis % 2 != 0:
            raise ConfigError(f"points_per_axis must be even and positive, got {self.points_per_axis}")
        if not (self.period_scale > 0):
            raise ConfigError(f"period_scale must be positive, got {self.period_scale}")

    # -- scalar geometry ---------------------------------------------------

    @property
    def freq_spacing(self) -> float:
        return 1.0 / self.period_scale

    @property
    def nyquist(self) -> float:
        return self.points_per_axis / (2.0 * self.period_scale)

    @property
    def spacing(self) -> float:
        return 2.0 * np.pi * self.period_scale / self.points_per_axis

    @property
    def cell_area(self) -> float:
        return self.spacing ** 2

    @property
    def freq_cell_area(self) -> float:
        return self.freq_spacing ** 2

    @property
    def dealias_index(self) -> int:
        # Strict two-thirds rule: keep |k| <= K with K = floor((N-1)/3), so a
        # product of kept modes (index up to 2K) aliases only onto indices
        # >= N - 2K >= K + 1, all of which the mask removes.
        return (self.points_per_axis - 1) // 3

    @property
    def dealias_cutoff(self) -> float:
        return self.dealias_index / self.period_scale

    @property
    def resolved_band(self) -> tuple[int, int]:
        """Dyadic indices [j_min, j_max] whose annuli lie fully on the lattice.

        2^j_min * 3/4 >= 1/L and 2^j_max * 8/3 <= Nyquist.
        """
        j_min = _int_ceil(math.log2(4.0 / (3.0 * self.period_scale)))
        j_max = _int_floor(math.log2(3.0 * self.nyquist / 8.0))
        return j_min, j_max

    @property
    def extended_band(self) -> tuple[int, int]:
        """Dyadic indices whose annuli meet the nonzero frequency lattice at all.

        Complete for homogeneous norms: every lattice frequency except the
        origin is covered, so no truncation happens inside this range.
        """
        lo_radius = self.freq_spacing
        hi_radius = math.sqrt(2.0) * self.nyquist
        j_lo = _int_floor(math.log2(3.0 * lo_radius / 8.0)) + 1
        j_hi = _int_ceil(math.log2(4.0 * hi_radius / 3.0)) - 1
        return j_lo, j_hi

    # -- cached lattice arrays ----------------------------------------------

    @cached_property
    def index_1d(self) -> np.ndarray:
        """Signed integer mode index per axis, FFT layout."""
        return np.rint(sfft.fftfreq(self.points_per_axis) * self.points_per_axis).astype(np.int64)

    @cached_property
    def freqs_1d(self) -> np.ndarray:
        return self.index_1d / self.period_scale

    @property
    def xi1(self) -> np.ndarray:
        return self.freqs_1d[:, None]

    @property
    def xi2(self) -> np.ndarray:
        return self.freqs_1d[None, :]

    @cached_property
    def freq_sq(self) -> np.ndarray:
        f = self.freqs_1d
        return (f * f)[:, None] + (f * f)[None, :]

    @cached_property
    def freq_radius(self) -> np.ndarray:
        return np.sqrt(self.freq_sq)

    @cached_property
    def coords_1d(self) -> np.ndarray:
        return np.arange(self.points_per_axis) * self.spacing

    @cached_property
    def dealias_keep_1d(self) -> np.ndarray:
        return np.abs(self.index_1d) <= self.dealias_index

    # -- helpers -------------------------------------------------------------

    def heat_factor(self, t: float) -> np.ndarray:
        return np.exp(-t * self.freq_sq)

    def apply_dealias(self, spec_values: np.ndarray) -> np.ndarray:
        """Zero modes with either axis index above the two-thirds cutoff."""
        keep = self.dealias_keep_1d
        return spec_values * keep[:, None] * keep[None, :]

    def continuum_equivalent(self, spec_values: np.ndarray) -> np.ndarray:
        """Convert stored spectral values to plane-transform values F(xi_k)."""
        return spec_values * (self.period_scale ** 2 / self.points_per_axis)

    def max_mode_index(self, spec_values: np.ndarray, tol: float = 0.0) -> int:
        """Largest per-axis |index| carrying spectral mass above tol."""
        mag = np.abs(spec_values)
        act1 = mag.max(axis=1) > tol
        act2 = mag.max(axis=0) > tol
        idx = np.abs(self.index_1d)
        m1 = int(idx[act1].max()) if act1.any() else 0
        m2 = int(idx[act2].max()) if act2.any() else 0
        return max(m1, m2)


@dataclass(frozen=True, eq=False)
class Field2D:
    """Complex samples on a torus grid, tagged physical or spectral."""

    grid: GridSpec
    rep: str
    values: np.ndarray

    def __post_init__(self) -> None:
        if self.rep not in (PHYSICAL, SPECTRAL):
            raise RepresentationError(f"unknown representation {self.rep!r}")
        n = self.grid.points_per_axis
        v = np.asarray(self.values, dtype=np.complex128)
        if v.shape != (n, n):
            raise ValueError(f"values shape {v.shape} does not match grid ({n}, {n})")
        object.__setattr__(self, "values", v)
        v.setflags(write=False)

    @classmethod
    def physical(cls, grid: GridSpec, values: np.ndarray) -> "Field2D":
        return cls(grid, PHYSICAL, values)

    @classmethod
    def spectral(cls, grid: GridSpec, values: np.ndarray) -> "Field2D":
        return cls(grid, SPECTRAL, values)

    @classmethod
    def zero(cls, grid: GridSpec, rep: str = PHYSICAL) -> "Field2D":
        return cls(grid, rep, np.zeros((grid.points_per_axis,) * 2, dtype=np.complex128))

    @property
    def is_physical(self) -> bool:
        return self.rep == PHYSICAL


def to_spectral(f: Field2D) -> Field2D:
    if f.rep != PHYSICAL:
        raise RepresentationError("to_spectral expects a physical-representation field")
    return Field2D.spectral(f.grid, fft2o(f.values))


def to_physical(f: Field2D) -> Field2D:
    if f.rep != SPECTRAL:
        raise RepresentationError("to_physical expects a spectral-representation field")
    return Field2D.physical(f.grid, ifft2o(f.values))


def as_spectral(f: Field2D) -> Field2D:
    return f if f.rep == SPECTRAL else to_spectral(f)


def as_physical(f: Field2D) -> Field2D:
    return f if f.rep == PHYSICAL else to_physical(f)


def _rep_like(f: Field2D, spec_values: np.ndarray) -> Field2D:
    out = Field2D.spectral(f.grid, spec_values)
    return out if f.rep == SPECTRAL else to_physical(out)


def derivative(f: Field2D, axis: int) -> Field2D:
    """Spectral derivative along axis 1 or 2; returns the input's representation."""
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    s = as_spectral(f).values
    g = f.grid
    mult = 1j * (g.xi1 if axis == 1 else g.xi2)
    return _rep_like(f, s * mult)


def heat_propagate(f: Field2D, t: float) -> Field2D:
    """Multiply each spectral coefficient by exp(-t |xi|^2); t >= 0."""
    if t < 0:
        raise ValueError(f"heat_propagate needs t >= 0, got {t}")
    s = as_spectral(f).values
    return _rep_like(f, s * f.grid.heat_factor(t))


def dealias(f: Field2D) -> Field2D:
    if f.rep != SPECTRAL:
        raise RepresentationError("dealias expects a spectral-representation field")
    return Field2D.spectral(f.grid, f.grid.apply_dealias(f.values))


def lp_norm(f: Field2D, p: float) -> float:
    """Cell-weighted L^p norm of |f| over the torus; p in [1, inf]."""
    return lp_norm_values(as_physical(f).values, f.grid, p)


def lp_norm_values(phys_values: np.ndarray, grid: GridSpec, p: float) -> float:
    if p < 1:
        raise ValueError(f"lp_norm needs p >= 1, got {p}")
    mag = np.abs(phys_values)
    if np.isinf(p):
        return float(mag.max())
    return float((np.sum(mag ** p) * grid.cell_area) ** (1.0 / p))


def lp_norm_vector(f1: Field2D, f2: Field2D, p: float) -> float:
    """L^p norm of the pointwise Euclidean magnitude of a two-component field."""
    v1 = as_physical(f1).values
    v2 = as_physical(f2).values
    mag = np.sqrt(np.abs(v1) ** 2 + np.abs(v2) ** 2)
    return lp_norm_values(mag, f1.grid, p)
