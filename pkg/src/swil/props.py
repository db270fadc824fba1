"""Self-contained property suites: exact index algebra, the dyadic-analysis
identities on a lattice, and the time-kernel closed form against direct
quadrature. The CLI props subcommand runs these; the test suite asserts them."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .construction import (
    TAU_SWITCH,
    duhamel_kernel,
    index_family,
    kernel_expm1_branch,
    kernel_series_branch,
)
from .errors import SwilError
from .grid import Field2D, GridSpec, fft2o, ifft2o, lp_norm
from .lp import block_weight, bony_parts, dyadic_block, low_freq_cutoff


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_rational_p(rng: np.random.Generator) -> Fraction:
    # log-uniform over (4, 1e6), exact binary rational
    x = float(4.0 + 10.0 ** rng.uniform(-6.0, 6.0) * (1.0 + rng.uniform(0, 1)))
    x = min(max(x, 4.000001), 1e6)
    return Fraction(x)


def check_index_chain(sample_count: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Exact rational verification of the exponent chain and both identities."""
    rng = np.random.default_rng(seed)
    half = Fraction(1, 2)
    for _ in range(sample_count):
        p = _random_rational_p(rng)
        fam = index_family(p)
        ps, q, qs, r, eps = fam.p_star, fam.q, fam.q_star, fam.r, fam.eps
        gap = 2 / q - 2 / p
        ok = (
            2 <= ps < q < 4 < r < qs < p
            and 2 / r - 2 / p == half * gap
            and Fraction(3, 4) * (1 - 4 / p) == gap
            and 2 / q + 2 / r > 1
            and 6 * eps < 1 - 4 / p
            and 5 * eps > gap
        )
        if not ok:
            return [CheckResult("index_chain", False, f"violated at p={p}")]
    return [CheckResult("index_chain", True, f"{sample_count} random p, all exact")]


def _mean_free_random_field(grid: GridSpec, rng: np.random.Generator,
                            max_index: int | None = None) -> Field2D:
    """Real random field, band-limited to |k| <= max_index per axis, zero mean."""
    if max_index is None:
        max_index = grid.dealias_index // 2
    phys = rng.standard_normal((grid.points_per_axis, grid.points_per_axis))
    spec = fft2o(phys.astype(np.complex128))
    keep = np.abs(grid.index_1d) <= max_index
    spec *= keep[:, None] * keep[None, :]
    spec[0, 0] = 0.0
    return Field2D.spectral(grid, spec)


def check_harmonic_suite(points_per_axis: int = 256, period_scale: float = 16.0,
                         seed: int = 0) -> list[CheckResult]:
    grid = GridSpec(points_per_axis, period_scale)
    rng = np.random.default_rng(seed)
    out = []
    lo, hi = grid.extended_band

    # partition of unity on the nonzero lattice
    total = np.zeros_like(grid.freq_radius)
    for j in range(lo, hi + 1):
        total += block_weight(grid, j)
    dev = float(np.abs(total - 1.0)[grid.freq_radius > 0].max())
    out.append(CheckResult("partition_of_unity", dev <= 1e-12, f"max deviation {dev:.3e}"))

    # blocks two apart are exactly disjoint
    worst = 0.0
    for j in range(lo, hi + 1):
        wj = block_weight(grid, j)
        for k in range(j + 2, hi + 1):
            worst = max(worst, float((wj * block_weight(grid, k)).max()))
    out.append(CheckResult("block_orthogonality", worst == 0.0, f"max overlap {worst:.3e}"))

    # paraproduct + remainder reconstructs the product
    f = _mean_free_random_field(grid, rng)
    g = _mean_free_random_field(grid, rng)
    t_fg, t_gf, rem = bony_parts(f, g)
    prod_spec = grid.apply_dealias(fft2o(ifft2o(f.values).real * ifft2o(g.values).real))
    recon = t_fg.values + t_gf.values + rem.values
    scale = max(float(np.abs(prod_spec).max()), 1e-300)
    rec_err = float(np.abs(recon - prod_spec).max()) / scale
    out.append(CheckResult("paraproduct_reconstruction", rec_err <= 1e-10,
                           f"relative error {rec_err:.3e}"))

    # low-high product stays within 4 blocks of the high one
    res_lo, res_hi = grid.resolved_band
    worst_leak = 0.0
    for k in (res_hi - 1, res_hi):
        part = ifft2o(low_freq_cutoff(f, k - 1).values).real \
            * ifft2o(dyadic_block(f, k).values).real
        part_spec = grid.apply_dealias(fft2o(part.astype(np.complex128)))
        part_field = Field2D.spectral(grid, part_spec)
        scale = max(float(np.abs(part_spec).max()), 1e-300)
        for j in range(lo, hi + 1):
            if abs(j - k) < 5:
                continue
            leak = float(np.abs(dyadic_block(part_field, j).values).max()) / scale
            worst_leak = max(worst_leak, leak)
    out.append(CheckResult("paraproduct_support", worst_leak <= 1e-13,
                           f"worst far-block leak {worst_leak:.3e}"))

    # derivative Bernstein constants are flat across the band
    ratios = []
    for j in range(res_lo, res_hi + 1):
        bj = dyadic_block(f, j)
        size = lp_norm(bj, 4.0)
        if size < 1e-12:
            continue
        gx = ifft2o(1j * grid.xi1 * bj.values)
        gy = ifft2o(1j * grid.xi2 * bj.values)
        from .grid import lp_norm_values

        grad = lp_norm_values(np.hypot(np.abs(gx), np.abs(gy)), grid, 4.0)
        ratios.append(grad / (2.0**j * size))
    spread = max(ratios) / min(ratios)
    out.append(CheckResult("bernstein_spread", spread <= 10.0,
                           f"max/min {spread:.3f} over {len(ratios)} blocks"))
    return out


def check_kernel_identity(sample_count: int = 1000, seed: int = 0) -> list[CheckResult]:
    """Closed-form kernel against direct time quadrature, dense near the
    series/expm1 switch, plus branch agreement right at the switch.

    The quadrature reference factors out exp(-t|xi|^2) analytically so the
    integrand stays order one; otherwise large frequencies push the absolute
    scale below any epsabs and the reference loses all relative accuracy."""
    from scipy.integrate import quad

    rng = np.random.default_rng(seed)
    worst = 0.0
    worst_at = None
    for i in range(sample_count):
        xi = rng.uniform(-20, 20, 2)
        eta = rng.uniform(-20, 20, 2)
        xi_sq = float(xi @ xi)
        eta_sq = float(eta @ eta) + float((xi - eta) @ (xi - eta))
        dval = eta_sq - xi_sq
        if i % 5 == 0 and abs(dval) > 1e-12:
            # land |D| t inside the switch neighborhood
            t = 10.0 ** rng.uniform(-4, -2) / abs(dval)
        else:
            t = 10.0 ** rng.uniform(-4, 0)
        closed = duhamel_kernel(xi, eta, t)
        # K = exp(-t|xi|^2) int_0^t exp(-s D) ds; the remaining integrand is
        # bounded by max(1, exp(-t D)), normalized before quadrature
        peak = max(0.0, -t * dval)
        core, _abserr = quad(
            lambda s, d=dval, pk=peak: math.exp(-s * d - pk), 0.0, t,
            epsabs=1e-300, epsrel=1e-12, limit=200,
        )
        numeric = math.exp(-t * xi_sq + peak) * core
        rel = abs(closed - numeric) / max(abs(numeric), 1e-300)
        if rel > worst:
            worst, worst_at = rel, (tuple(xi), tuple(eta), t)
    results = [CheckResult("kernel_identity", worst <= 1e-9,
                           f"worst relative error {worst:.3e} at {worst_at}")]

    switch_x = TAU_SWITCH * np.concatenate([
        np.array([-1.0, 1.0]),
        np.linspace(0.97, 1.0, 100),
        -np.linspace(0.97, 1.0, 100),
    ])
    series = kernel_series_branch(switch_x)
    direct = kernel_expm1_branch(switch_x)
    jump_worst = float(np.max(np.abs(series - direct) / np.abs(direct)))
    results.append(CheckResult("kernel_switch_continuity", jump_worst <= 1e-10,
                               f"worst branch disagreement {jump_worst:.3e}"))
    return results


def run_all(quick: bool = False) -> list[CheckResult]:
    count = 200 if quick else 1000
    npts = 128 if quick else 256
    results = []
    for fn in (
        lambda: check_index_chain(sample_count=count),
        lambda: check_harmonic_suite(points_per_axis=npts),
        lambda: check_kernel_identity(sample_count=count),
    ):
        try:
            results.extend(fn())
        except SwilError as exc:
            results.append(CheckResult(type(exc).__name__, False, str(exc)))
    return results
