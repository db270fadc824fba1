"""End-to-end validation gates for the laboratory.

Each test prints one [PASS]/[FAIL] line with its measured values (visible
under pytest -s; pytest -v shows the per-test verdicts either way) and then
asserts the stated tolerance. The full-solve sweep is shared between the
trend and remainder gates through a module fixture.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from swil.besov import fit_log2_slope, relative_spread
from swil.construction import (
    duhamel_kernel,
    index_family,
    make_initial_data,
    u1_grid_duhamel,
    u1_vector_lowfreq,
    u1_witness,
)
from swil.experiment import ExperimentConfig, bounds_passed, run_sweep, verify_bounds
from swil.grid import GridSpec, fft2o
from swil.props import check_harmonic_suite, check_index_chain, check_kernel_identity
from swil.solver import SolverConfig, solve

FAM = index_family(8)


def report(name: str, passed: bool, detail: str) -> None:
    print(f"\n[{'PASS' if passed else 'FAIL'}] {name}: {detail}")


def test_01_exponent_chain_exact_on_random_p():
    tic = time.perf_counter()
    results = check_index_chain(sample_count=1000, seed=0)
    elapsed = time.perf_counter() - tic
    ok = all(r.passed for r in results) and elapsed < 1.0
    report("exponent chain", ok,
           f"{results[0].detail}; {elapsed:.2f}s (limit 1s)")
    assert all(r.passed for r in results), [r.detail for r in results]
    assert elapsed < 1.0


def test_02_dyadic_analysis_suite_fine_grid():
    tic = time.perf_counter()
    results = check_harmonic_suite(points_per_axis=256, period_scale=16.0)
    elapsed = time.perf_counter() - tic
    ok = all(r.passed for r in results) and elapsed < 30.0
    report("dyadic analysis suite", ok,
           "; ".join(f"{r.name} {r.detail}" for r in results)
           + f"; {elapsed:.1f}s (limit 30s)")
    assert all(r.passed for r in results), [r.detail for r in results if not r.passed]
    assert elapsed < 30.0


def test_03_time_kernel_closed_form_vs_quadrature():
    tic = time.perf_counter()
    results = check_kernel_identity(sample_count=1000, seed=0)
    elapsed = time.perf_counter() - tic
    ok = all(r.passed for r in results) and elapsed < 5.0
    report("time kernel identity", ok,
           "; ".join(f"{r.name} {r.detail}" for r in results)
           + f"; {elapsed:.1f}s (limit 5s)")
    assert all(r.passed for r in results), [r.detail for r in results if not r.passed]
    assert elapsed < 5.0


def test_04_short_time_expansion_constant_is_stable():
    tic = time.perf_counter()
    rng = np.random.default_rng(11)
    constants = {}
    for n in range(4, 9):
        for divisor in (1, 4, 16):
            t = 4.0**-n / divisor
            # integrand support: offsets in the data bump disc, frequencies
            # in the witness box, carrier shift 2^n along the diagonal
            radius = 0.5 * np.sqrt(rng.uniform(0.0, 1.0, 200))
            angle = rng.uniform(0.0, 2.0 * np.pi, 200)
            w = np.stack([radius * np.cos(angle), radius * np.sin(angle)], axis=1)
            xi = rng.uniform(-1.0 / 6.0, 1.0 / 6.0, (200, 2))
            kern = duhamel_kernel(xi, w + 2.0**n, t)
            base = t * np.exp(-t * (xi[:, 0] ** 2 + xi[:, 1] ** 2))
            metric = np.abs(kern / base - 1.0) / (t * 4.0**n)
            constants[(n, divisor)] = float(metric.max())
    elapsed = time.perf_counter() - tic
    vals = np.array(list(constants.values()))
    stability = float(vals.max() / vals.min())
    ok = stability <= 3.0 and elapsed < 10.0
    report("short-time expansion constant", ok,
           f"range [{vals.min():.4f}, {vals.max():.4f}] over n=4..8, "
           f"max/min {stability:.3f} (limit 3); {elapsed:.1f}s (limit 10s)")
    assert stability <= 3.0
    assert elapsed < 10.0


def test_05_witness_scaling_with_carrier():
    tic = time.perf_counter()
    ns = (4, 5, 6, 7)
    wits = [u1_witness(n, FAM) for n in ns]
    elapsed = time.perf_counter() - tic

    g_vals = [w.g_value for w in wits]
    spread = relative_spread(g_vals)
    corrected = [w.corrected_constant for w in wits]
    corrected_spread = relative_spread(corrected)
    self_ratio = [w.self_to_cross for w in wits]
    decay = fit_log2_slope(ns, self_ratio)

    ok = (spread <= 0.25 and corrected_spread <= 1e-2
          and decay.slope < 0.0 and elapsed < 300.0)
    report("witness scaling", ok,
           f"G(n)={[f'{v:.6e}' for v in g_vals]} spread {spread:.3f} (limit 0.25); "
           f"saturation-corrected spread {corrected_spread:.2e} (limit 1e-2); "
           f"self/cross={[f'{v:.3e}' for v in self_ratio]} slope {decay.slope:.3f} (< 0); "
           f"{elapsed:.0f}s (limit 300s)")
    assert spread <= 0.25
    assert corrected_spread <= 1e-2
    assert decay.slope < 0.0
    assert elapsed < 300.0


def test_06_first_iterate_grid_vs_continuum():
    tic = time.perf_counter()
    cases = ((3, 512), (4, 1024), (5, 2048))
    details = []
    worst_aggregate = 0.0
    for n, npts in cases:
        grid = GridSpec(npts, 24.0)
        t0 = FAM.t0(n)
        # double-carrier products wrap on these grids but land far from the
        # comparison panel; the low-frequency island itself is exact
        init = make_initial_data(n, FAM, grid, check_products=False)
        u1_spec = u1_grid_duhamel(init, t0, n_samples=129, use_dealias=False)
        idx = grid.index_1d
        i1, i2 = np.meshgrid(idx, idx, indexing="ij")
        xi1, xi2 = i1 / grid.period_scale, i2 / grid.period_scale
        mask = np.hypot(xi1, xi2) <= 0.75
        pts = np.stack([xi1[mask], xi2[mask]], axis=1)
        grid_vals = np.stack([grid.continuum_equivalent(u1_spec[0])[mask],
                              grid.continuum_equivalent(u1_spec[1])[mask]], axis=1)
        cont = u1_vector_lowfreq(pts, n, FAM, t0, panels=8, rtol=1e-5)
        mag = np.linalg.norm(cont, axis=1)
        keep = mag >= 1e-2 * mag.max()
        aggregate = float(np.linalg.norm(grid_vals[keep] - cont[keep])
                          / np.linalg.norm(cont[keep]))
        worst_aggregate = max(worst_aggregate, aggregate)
        details.append(f"n={n} N={npts}: rel {aggregate:.3e} over {int(keep.sum())} modes")
        del u1_spec, grid_vals, cont
    elapsed = time.perf_counter() - tic
    ok = worst_aggregate <= 1e-4 and elapsed < 600.0
    report("first iterate, grid vs continuum", ok,
           "; ".join(details) + f"; worst {worst_aggregate:.3e} (limit 1e-4); "
           f"{elapsed:.0f}s (limit 600s)")
    assert worst_aggregate <= 1e-4
    assert elapsed < 600.0


@pytest.fixture(scope="module")
def solve_sweep():
    tic = time.perf_counter()
    cfg = ExperimentConfig(p=8, n_list=(4, 5, 6), mode="both")
    rep = run_sweep(cfg)
    return rep, time.perf_counter() - tic


def test_07_inflation_trend_full_solves(solve_sweep):
    rep, elapsed = solve_sweep
    eps = float(FAM.eps)
    infl = float(FAM.inflation_exp)
    assert all(r.error is None for r in rep.rows), [r.error for r in rep.rows]

    data_slope = rep.slopes["data"].slope
    wit_slope = rep.slopes["witness"].slope
    ratios = [r.norm_ut / r.norm_u0 for r in rep.rows]
    increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
    checks = verify_bounds(rep)

    data_ok = -1.15 * eps <= data_slope <= -0.85 * eps
    wit_ok = wit_slope >= infl - 0.05
    ok = (data_ok and wit_ok and increasing and bounds_passed(checks)
          and elapsed < 3600.0)
    report("inflation trend", ok,
           f"data slope {data_slope:.6f} (target -{eps:.6f} +/-15%); "
           f"witness slope {wit_slope:.4f} (bound {infl - 0.05:.4f}); "
           f"solution/data ratios {[f'{v:.4f}' for v in ratios]} increasing={increasing}; "
           f"{elapsed:.0f}s (limit 3600s)")
    assert data_ok
    assert wit_ok
    assert increasing
    assert bounds_passed(checks), [c for c in checks if not c.passed]
    assert elapsed < 3600.0


def test_08_remainder_smallness(solve_sweep):
    rep, _elapsed = solve_sweep
    gap = 2 / FAM.q - 2 / FAM.p - 5 * FAM.eps
    x_bound = float(gap) + 0.1
    y_bound = float(Fraction(2, 3) * gap) + 0.1
    details = []
    ok = True
    for row in rep.rows:
        x_rate = math.log2(row.x_t) / row.n
        y_rate = math.log2(row.y_t) / row.n
        ok = ok and x_rate <= x_bound and y_rate <= y_bound
        details.append(f"n={row.n}: log2(X_T)/n={x_rate:.3f} (<= {x_bound:.4f}), "
                       f"log2(Y_T)/n={y_rate:.3f} (<= {y_bound:.4f})")
    report("remainder smallness", ok, "; ".join(details))
    for row in rep.rows:
        assert math.log2(row.x_t) / row.n <= x_bound
        assert math.log2(row.y_t) / row.n <= y_bound


def test_09_solver_baselines():
    tic = time.perf_counter()
    # (a) with the nonlinearities off the march is the exact heat flow
    grid = GridSpec(128, 3.0)
    init = make_initial_data(2, FAM, grid)
    t_final = 0.05
    traj = solve(init, SolverConfig(grid=grid, t_final=t_final, dt=t_final / 128,
                                    nonlinear=False))
    expect = grid.heat_factor(t_final) * init.u_spec
    heat_err = float(max(np.abs(traj.final_u[0].values - expect[0]).max(),
                         np.abs(traj.final_u[1].values - expect[1]).max())
                     / np.abs(init.u_spec).max())

    # (b) self-convergence order of the time stepper on the real data
    grid4 = GridSpec(384, 3.0)
    init4 = make_initial_data(4, FAM, grid4)
    t0 = FAM.t0(4)
    finals = {}
    for steps in (16, 32, 128):
        cfg = SolverConfig(grid=grid4, t_final=t0, dt=t0 / steps, save_every=steps)
        finals[steps] = solve(init4, cfg)
    e_coarse = np.abs(np.stack([finals[16].final_u[0].values,
                                finals[16].final_u[1].values])
                      - np.stack([finals[128].final_u[0].values,
                                  finals[128].final_u[1].values])).max()
    e_fine = np.abs(np.stack([finals[32].final_u[0].values,
                              finals[32].final_u[1].values])
                    - np.stack([finals[128].final_u[0].values,
                                finals[128].final_u[1].values])).max()
    order = float(np.log2(e_coarse / e_fine))

    # (c) conservative height form keeps the mean exactly
    gm = GridSpec(64, 1.0)
    x = gm.coords_1d
    x1, x2 = np.meshgrid(x, x, indexing="ij")
    from swil.construction import InitialData

    init_m = InitialData(
        n=1, family=FAM, grid=gm, amplitude=1.0,
        u_spec=np.stack([fft2o(np.sin(x1).astype(np.complex128)),
                         fft2o((0.3 * np.cos(x2)).astype(np.complex128))]),
        h_spec=fft2o((0.2 * np.cos(x1)).astype(np.complex128)),
    )
    traj_m = solve(init_m, SolverConfig(grid=gm, t_final=0.32, dt=0.01,
                                        save_every=2, h_form="conservative"))
    mass0 = init_m.h_spec[0, 0]
    mass_drift = float(max(
        abs(np.asarray(traj_m.h_samples[k], dtype=np.complex128)[0, 0] - mass0)
        for k in range(traj_m.times.size)))

    # (d) deviation from the heat flow is quadratic in the amplitude
    u1d = np.sin(x1) * np.sin(x2)
    u2d = np.cos(x1) * np.cos(x2)
    errs = {}
    for amp in (0.02, 0.01):
        init_a = InitialData(
            n=1, family=FAM, grid=gm, amplitude=amp,
            u_spec=np.stack([fft2o((amp * u1d).astype(np.complex128)),
                             fft2o((amp * u2d).astype(np.complex128))]),
            h_spec=np.zeros((64, 64), dtype=np.complex128),
        )
        traj_a = solve(init_a, SolverConfig(grid=gm, t_final=0.1, save_every=2))
        heat = gm.heat_factor(0.1) * init_a.u_spec
        final = np.stack([traj_a.final_u[0].values, traj_a.final_u[1].values])
        errs[amp] = float(np.sqrt(np.sum(np.abs(final - heat) ** 2)))
    ratio = errs[0.02] / errs[0.01]
    elapsed = time.perf_counter() - tic

    ok = (heat_err <= 1e-12 and order >= 1.9 and mass_drift <= 1e-10
          and abs(ratio - 4.0) <= 0.5)
    report("solver baselines", ok,
           f"heat-flow error {heat_err:.3e} (limit 1e-12); "
           f"step order {order:.3f} (>= 1.9); "
           f"mean-height drift {mass_drift:.3e} (limit 1e-10); "
           f"amplitude-halving error ratio {ratio:.4f} (target 4); "
           f"{elapsed:.0f}s")
    assert heat_err <= 1e-12
    assert order >= 1.9
    assert mass_drift <= 1e-10
    assert abs(ratio - 4.0) <= 0.5
