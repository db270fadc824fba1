"""Dyadic Littlewood-Paley decomposition on the torus grid.

The annulus generator is built by telescoping a smooth radial cutoff:
chi(rho) = 1 for rho <= 3/4 and 0 for rho >= 4/3 (exp-glue bridge between),
phi(rho) = chi(rho/2) - chi(rho), supported exactly on 3/4 <= rho <= 8/3 with
a plateau phi = 1 on [4/3, 3/2]. Telescoping makes sum_j phi(2^-j rho) = 1
for every rho > 0 and keeps blocks two or more indices apart exactly disjoint.

Weight arrays are cached per (grid, j); clear_weight_cache drops them.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ConfigError
from .grid import Field2D, GridSpec, as_spectral, to_physical


def smooth_step(u: np.ndarray | float) -> np.ndarray:
    """C-infinity step: 0 for u <= 0, 1 for u >= 1, strictly monotone between."""
    arr = np.asarray(u, dtype=float)
    uc = np.clip(arr, 0.0, 1.0)
    with np.errstate(divide="ignore"):
        a = np.exp(-1.0 / np.maximum(uc, 1e-300))
        b = np.exp(-1.0 / np.maximum(1.0 - uc, 1e-300))
    a = np.where(uc > 0.0, a, 0.0)
    b = np.where(uc < 1.0, b, 0.0)
    return a / (a + b)


_CHI_LO = 0.75
_CHI_WIDTH = 4.0 / 3.0 - 0.75  # = 7/12


def chi_profile(rho: np.ndarray | float) -> np.ndarray:
    """Radial low-pass cutoff: 1 for rho <= 3/4, 0 for rho >= 4/3."""
    return 1.0 - smooth_step((np.asarray(rho, dtype=float) - _CHI_LO) / _CHI_WIDTH)


def phi_profile(rho: np.ndarray | float) -> np.ndarray:
    """Annulus generator chi(rho/2) - chi(rho), supported on [3/4, 8/3]."""
    rho = np.asarray(rho, dtype=float)
    return chi_profile(rho / 2.0) - chi_profile(rho)


def data_bump_profile(rho: np.ndarray | float) -> np.ndarray:
    """Radial bump exp(-1/(1 - (2 rho)^2)) for |rho| < 1/2, else 0."""
    arr = np.asarray(rho, dtype=float)
    pos = 1.0 - 4.0 * arr * arr
    with np.errstate(divide="ignore"):
        v = np.exp(-1.0 / np.maximum(pos, 1e-300))
    return np.where(np.abs(arr) < 0.5, v, 0.0)


@dataclass(frozen=True)
class BumpProfile:
    """Smooth radial profile with its support interval."""

    kind: str
    support: tuple[float, float]
    profile: Callable[[np.ndarray], np.ndarray]

    def __call__(self, rho: np.ndarray | float) -> np.ndarray:
        return self.profile(rho)


LP_GENERATOR = BumpProfile("lp_generator", (0.75, 8.0 / 3.0), phi_profile)
DATA_BUMP = BumpProfile("data_bump", (0.0, 0.5), data_bump_profile)


def build_lp_generator() -> BumpProfile:
    return LP_GENERATOR


# -- cached multiplier weights on a grid -------------------------------------

_weight_cache: dict[tuple[int, float, int, str], np.ndarray] = {}


def clear_weight_cache() -> None:
    _weight_cache.clear()


def _cached_weight(grid: GridSpec, j: int, kind: str) -> np.ndarray:
    key = (grid.points_per_axis, grid.period_scale, j, kind)
    w = _weight_cache.get(key)
    if w is None:
        scaled = grid.freq_radius * (2.0 ** (-j))
        w = phi_profile(scaled) if kind == "phi" else chi_profile(scaled)
        w.setflags(write=False)
        _weight_cache[key] = w
    return w


def block_weight(grid: GridSpec, j: int) -> np.ndarray:
    """Multiplier phi(2^-j |xi|) on the frequency lattice."""
    return _cached_weight(grid, j, "phi")


def lowpass_weight(grid: GridSpec, j: int) -> np.ndarray:
    """Multiplier chi(2^-j |xi|); equals the sum of blocks below j on the lattice."""
    return _cached_weight(grid, j, "chi")


def _check_block_index(grid: GridSpec, j: int, slack: int = 0) -> None:
    lo, hi = grid.extended_band
    if not (lo - slack <= j <= hi + slack):
        raise ConfigError(
            f"dyadic index {j} outside the lattice-supported band [{lo}, {hi}] "
            f"(fully resolved band {grid.resolved_band})"
        )


def _multiply(f: Field2D, w: np.ndarray) -> Field2D:
    out = Field2D.spectral(f.grid, as_spectral(f).values * w)
    return out if f.rep == "spectral" else to_physical(out)


def dyadic_block(f: Field2D, j: int) -> Field2D:
    """Frequency block: spectral multiplication by phi(2^-j |xi|)."""
    _check_block_index(f.grid, j)
    return _multiply(f, block_weight(f.grid, j))


def low_freq_cutoff(f: Field2D, j: int) -> Field2D:
    """Partial sum of blocks below j, via the chi(2^-j |xi|) multiplier."""
    _check_block_index(f.grid, j, slack=2)
    return _multiply(f, lowpass_weight(f.grid, j))


def bony_parts(f: Field2D, g: Field2D) -> tuple[Field2D, Field2D, Field2D]:
    """Paraproduct split of f*g: (low(f) high(g), low(g) high(f), remainder).

    Requires the true product spectrum to fit under the dealias cutoff, so all
    sub-products are computed alias-free and the three parts sum exactly to
    the pointwise product.
    """
    grid = f.grid
    if g.grid != grid:
        raise ConfigError("bony_parts needs both fields on the same grid")
    fs = as_spectral(f).values
    gs = as_spectral(g).values
    if grid.max_mode_index(fs) + grid.max_mode_index(gs) > grid.dealias_index:
        raise ConfigError(
            "product of these fields would alias: per-axis support indices "
            f"{grid.max_mode_index(fs)} + {grid.max_mode_index(gs)} exceed the "
            f"dealias cutoff {grid.dealias_index}"
        )

    from .grid import fft2o, ifft2o

    lo, hi = grid.extended_band
    js = range(lo, hi + 1)
    blocks_f = {j: ifft2o(fs * block_weight(grid, j)) for j in js}
    blocks_g = {j: ifft2o(gs * block_weight(grid, j)) for j in js}
    lows_f = {j: ifft2o(fs * lowpass_weight(grid, j - 1)) for j in js}
    lows_g = {j: ifft2o(gs * lowpass_weight(grid, j - 1)) for j in js}

    n = grid.points_per_axis
    t_fg = np.zeros((n, n), dtype=np.complex128)
    t_gf = np.zeros((n, n), dtype=np.complex128)
    rem = np.zeros((n, n), dtype=np.complex128)
    for j in js:
        t_fg += lows_f[j] * blocks_g[j]
        t_gf += lows_g[j] * blocks_f[j]
        near = np.zeros((n, n), dtype=np.complex128)
        for jj in (j - 1, j, j + 1):
            if lo <= jj <= hi:
                near += blocks_g[jj]
        rem += blocks_f[j] * near
    return (
        Field2D.spectral(grid, fft2o(t_fg)),
        Field2D.spectral(grid, fft2o(t_gf)),
        Field2D.spectral(grid, fft2o(rem)),
    )
