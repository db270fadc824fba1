"""Homogeneous Besov norms, time-space (Chemin-Lerner style) norms, the
low-frequency witness functional, and measured-constant checkers for the
product, composition, and bilinear estimates the solver analysis relies on.

Norms sum dyadic blocks over the grid's extended band, which tiles every
lattice frequency except 0 exactly once in the r=1 partition sense; content
outside the fully resolved band triggers a truncation warning because those
blocks are clipped by the lattice edges. Vector fields are measured through
the pointwise Euclidean magnitude of the blocked components.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError
from .grid import Field2D, GridSpec, as_spectral, ifft2o, lp_norm_values
from .lp import block_weight, phi_profile


@dataclass(frozen=True)
class BesovParams:
    """Regularity s, integrability p, summation exponent r (1 <= p, r <= inf)."""

    s: float
    p: float
    r: float = 1.0

    def __post_init__(self) -> None:
        if not (self.p >= 1 and self.r >= 1):
            raise ConfigError(f"Besov exponents need p, r >= 1, got p={self.p} r={self.r}")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Sampled trajectory 0 = t_0 < ... < t_M on one grid."""

    times: np.ndarray
    samples: tuple

    def __post_init__(self) -> None:
        times = np.asarray(self.times, dtype=float)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "samples", tuple(self.samples))
        if times.ndim != 1 or times.size != len(self.samples) or times.size == 0:
            raise ConfigError("TimeSeries needs one sample per time")
        if times[0] != 0.0 or np.any(np.diff(times) <= 0):
            raise ConfigError("TimeSeries times must start at 0 and strictly increase")
        grids = {_sample_grid(f) for f in self.samples}
        if len(grids) != 1:
            raise ConfigError("TimeSeries samples must share one grid")

    @property
    def grid(self) -> GridSpec:
        return _sample_grid(self.samples[0])


def _sample_grid(sample) -> GridSpec:
    if isinstance(sample, Field2D):
        return sample.grid
    return sample[0].grid


def _spec_values(sample) -> np.ndarray:
    """Spectral stack: (N, N) for a scalar sample, (2, N, N) for a pair."""
    if isinstance(sample, Field2D):
        return as_spectral(sample).values
    f1, f2 = sample
    return np.stack([as_spectral(f1).values, as_spectral(f2).values])


def _check_band_content(spec: np.ndarray, grid: GridSpec, warn: bool) -> None:
    if not warn:
        return
    lo_res, hi_res = grid.resolved_band
    radius = grid.freq_radius
    clipped = (radius > 0.75 * 2.0 ** (hi_res + 1)) | (
        (radius > 0) & (radius < (8.0 / 3.0) * 2.0 ** (lo_res - 1))
    )
    mags = np.abs(spec)
    if np.any(mags[..., clipped] > 1e-13 * max(mags.max(), 1e-300)):
        warnings.warn(
            "field has frequency content outside the fully resolved dyadic band; "
            "edge blocks are lattice-clipped and the norm is a truncated value",
            stacklevel=3,
        )


def block_lp_rows(spec_stack: np.ndarray, grid: GridSpec, lp: float) -> tuple[np.ndarray, np.ndarray]:
    """L^p sizes of the dyadic blocks of stacked spectra.

    spec_stack: (M, N, N) scalar samples or (M, 2, N, N) vector samples.
    Returns (block indices js, table of shape (M, len(js))).
    """
    lo, hi = grid.extended_band
    js = np.arange(lo, hi + 1)
    nsamp = spec_stack.shape[0]
    vector = spec_stack.ndim == 4
    table = np.zeros((nsamp, js.size))
    for col, j in enumerate(js):
        w = block_weight(grid, int(j))
        for m in range(nsamp):
            if vector:
                w1 = spec_stack[m, 0] * w
                w2 = spec_stack[m, 1] * w
                if not (w1.any() or w2.any()):
                    continue
                b1 = ifft2o(w1)
                b2 = ifft2o(w2)
                mag = np.sqrt(np.abs(b1) ** 2 + np.abs(b2) ** 2)
            else:
                ws = spec_stack[m] * w
                if not ws.any():
                    continue
                mag = np.abs(ifft2o(ws))
            table[m, col] = lp_norm_values(mag, grid, lp)
    return js, table


def combine_blocks(js: np.ndarray, row: np.ndarray, s: float, r: float) -> float:
    weighted = 2.0 ** (js * s) * row
    if math.isinf(r):
        return float(weighted.max(initial=0.0))
    return float(np.sum(weighted**r) ** (1.0 / r))


def besov_norm(f, bp: BesovParams, warn: bool = True) -> float:
    """Homogeneous Besov norm of a scalar Field2D or a (f1, f2) vector pair."""
    grid = _sample_grid(f)
    spec = _spec_values(f)
    _check_band_content(spec, grid, warn)
    js, table = block_lp_rows(spec[None], grid, bp.p)
    return combine_blocks(js, table[0], bp.s, bp.r)


def chemin_lerner_norm(ts: TimeSeries, bp: BesovParams, q: float, warn: bool = True) -> float:
    """Blockwise L^q-in-time norm first, then the weighted ell^r sum over blocks."""
    if q < 1:
        raise ConfigError("time exponent q must be >= 1")
    if not math.isinf(q) and len(ts.samples) < 2:
        raise ConfigError("finite time exponent needs at least 2 samples")
    grid = ts.grid
    spec_stack = np.stack([_spec_values(f) for f in ts.samples])
    _check_band_content(spec_stack, grid, warn)
    js, table = block_lp_rows(spec_stack, grid, bp.p)
    per_block = time_lq(table, ts.times, q)
    return combine_blocks(js, per_block, bp.s, bp.r)


def time_lq(table: np.ndarray, times: np.ndarray, q: float) -> np.ndarray:
    """Columnwise L^q norm in time of a (M, B) sample table, by trapezoid."""
    if math.isinf(q):
        return table.max(axis=0)
    return np.trapezoid(table**q, times, axis=0) ** (1.0 / q)


# -- witness functional ----------------------------------------------------------


def witness_value(f: Field2D) -> complex:
    """Lattice quadrature of phi(16 xi) fhat(xi) over the low annulus."""
    grid = f.grid
    if grid.freq_spacing > 1.0 / 64.0 + 1e-12:
        raise ConfigError(
            "frequency lattice too coarse for the witness annulus: needs "
            f"period_scale >= 64, got {grid.period_scale}"
        )
    window = phi_profile(16.0 * grid.freq_radius)
    spec = as_spectral(f).values
    return complex((window * spec).sum() / grid.points_per_axis)


def witness_functional(f: Field2D) -> float:
    """Modulus of the annulus-windowed spectral average."""
    return abs(witness_value(f))


# -- measured-constant checkers ---------------------------------------------------


def _exact_product(f: Field2D, g: Field2D) -> Field2D:
    grid = f.grid
    if g.grid != grid:
        raise ConfigError("product checker needs both fields on the same grid")
    fs = as_spectral(f).values
    gs = as_spectral(g).values
    if grid.max_mode_index(fs) + grid.max_mode_index(gs) > grid.dealias_index:
        raise ConfigError(
            "product would alias on this grid; shrink the band or refine the grid"
        )
    from .grid import fft2o, to_physical

    prod = to_physical(f).values * to_physical(g).values
    return Field2D.spectral(grid, fft2o(prod))


def check_product_inequality(f: Field2D, g: Field2D, s: float, p: float) -> float:
    """Measured constant of the product estimate: norm of fg over the symmetric
    majorant max-norm(g) norm(f) + max-norm(f) norm(g)."""
    bp = BesovParams(s=s, p=p, r=1.0)
    num = besov_norm(_exact_product(f, g), bp, warn=False)
    if num == 0.0:
        return 0.0
    from .grid import to_physical

    f_inf = float(np.abs(to_physical(f).values).max())
    g_inf = float(np.abs(to_physical(g).values).max())
    den = g_inf * besov_norm(f, bp, warn=False) + f_inf * besov_norm(g, bp, warn=False)
    return num / den


def check_composition_inequality(h: Field2D, s: float, p: float) -> float:
    """Measured constant of the logarithmic composition estimate."""
    from .grid import fft2o, to_physical

    hp = to_physical(h).values.real
    h_inf = float(np.abs(hp).max())
    if h_inf >= 1.0:
        raise ConfigError(f"composition needs max |h| < 1, got {h_inf:.6g}")
    if h_inf == 0.0:
        return 0.0
    bp = BesovParams(s=s, p=p, r=1.0)
    log_field = Field2D.spectral(h.grid, fft2o(np.log1p(hp).astype(np.complex128)))
    num = besov_norm(log_field, bp, warn=False)
    den = (1.0 + h_inf) ** (math.ceil(s) + 2) * besov_norm(h, bp, warn=False)
    return num / den


def check_bilinear_estimate(f: Field2D, g: Field2D, p2: float, q2: float) -> float:
    """Measured constant of the two-exponent product estimate at one time slice."""
    if not (2.0 <= p2 <= 4.0 <= q2) or math.isinf(q2):
        raise ConfigError(f"bilinear exponents need 2 <= p2 <= 4 <= q2 < inf, got {p2}, {q2}")
    if 2.0 / p2 + 2.0 / q2 <= 1.0:
        raise ConfigError(f"bilinear exponents need 2/p2 + 2/q2 > 1, got {p2}, {q2}")
    bp_f = BesovParams(s=2.0 / p2 - 1.0, p=p2, r=1.0)
    bp_g = BesovParams(s=2.0 / q2, p=q2, r=1.0)
    num = besov_norm(_exact_product(f, g), bp_f, warn=False)
    if num == 0.0:
        return 0.0
    den = besov_norm(f, bp_f, warn=False) * besov_norm(g, bp_g, warn=False)
    return num / den


# -- measurement helpers -----------------------------------------------------------


def relative_spread(values) -> float:
    """Largest relative deviation from the mean: max |v - mean| / |mean|.

    This is the package-wide definition of the spread of a family of measured
    constants; 0 for a single value.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ConfigError("relative_spread of an empty sample")
    mean = arr.mean()
    if mean == 0.0:
        raise ConfigError("relative_spread undefined for zero-mean sample")
    return float(np.abs(arr - mean).max() / abs(mean))


@dataclass(frozen=True)
class SlopeFit:
    slope: float
    intercept: float
    residual_rms: float
    npoints: int


def fit_log2_slope(ns, values) -> SlopeFit:
    """Least-squares slope of log2(values) against ns (values must be > 0)."""
    ns = np.asarray(ns, dtype=float)
    vals = np.asarray(values, dtype=float)
    if ns.size != vals.size or ns.size < 2:
        raise ConfigError("slope fit needs at least 2 matching points")
    if np.any(vals <= 0):
        raise ConfigError("slope fit needs positive values")
    logs = np.log2(vals)
    slope, intercept = np.polyfit(ns, logs, 1)
    resid = logs - (slope * ns + intercept)
    return SlopeFit(slope=float(slope), intercept=float(intercept),
                    residual_rms=float(np.sqrt(np.mean(resid**2))), npoints=int(ns.size))
