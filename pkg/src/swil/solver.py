"""Pseudo-spectral time integrator for the viscous shallow water system in
height-perturbation form, plus the three-part solution split used by the
inflation analysis.

The scheme is an integrating-factor Heun step: velocity diffusion is applied
exactly through the spectral heat multiplier, everything else is explicit and
second order. With the non-diffusive right-hand side switched off the step
reproduces the heat flow to round-off by construction.

Height equation forms:
  standard      dh = -div u - u.grad h + h div u
  conservative  dh = -div((1 + h) u)
The two differ by the sign of the h div u term; the conservative one is the
exact mass-conservation law and backs the mass test, the standard one is the
default used by the experiments.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .besov import TimeSeries, block_lp_rows, combine_blocks, time_lq
from .construction import InitialData, advection_spectrum
from .errors import BlowUpError, BlowUpInfo, ConfigError, NumericalError
from .grid import Field2D, GridSpec, fft2o, ifft2o

H_FORMS = ("standard", "conservative")


@dataclass(frozen=True)
class SolverConfig:
    """Time-stepping parameters.

    dt=None picks min(0.2 / dealias_cutoff^2, t_final / 128) and then rounds
    the step count up so t_final is hit exactly and the saved samples divide
    the run evenly. sample_dtype c64 halves trajectory memory for large grids;
    the final state is always kept in full precision.
    """

    grid: GridSpec
    t_final: float
    dt: float | None = None
    save_every: int = 2
    h_form: str = "standard"
    use_dealias: bool = True
    nonlinear: bool = True
    sample_dtype: str = "c128"

    def __post_init__(self) -> None:
        if not (self.t_final > 0):
            raise ConfigError(f"t_final must be positive, got {self.t_final}")
        if self.dt is not None and not (0 < self.dt <= self.t_final):
            raise ConfigError(f"dt must lie in (0, t_final], got {self.dt}")
        if self.save_every < 1:
            raise ConfigError(f"save_every must be >= 1, got {self.save_every}")
        if self.h_form not in H_FORMS:
            raise ConfigError(f"h_form must be one of {H_FORMS}, got {self.h_form!r}")
        if self.sample_dtype not in ("c128", "c64"):
            raise ConfigError(f"sample_dtype must be c128 or c64, got {self.sample_dtype!r}")

    @property
    def n_steps(self) -> int:
        dt = self.dt
        if dt is None:
            dt = min(0.2 / self.grid.dealias_cutoff**2, self.t_final / 128.0)
        steps = max(1, math.ceil(self.t_final / dt - 1e-9))
        rem = steps % self.save_every
        if rem:
            steps += self.save_every - rem
        return steps

    @property
    def dt_actual(self) -> float:
        return self.t_final / self.n_steps

    @property
    def n_samples(self) -> int:
        return self.n_steps // self.save_every + 1


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Saved solve output: times, spectral samples, and step diagnostics.

    Samples are raw spectral arrays (h: (M, N, N), u: (M, 2, N, N)) in the
    configured dtype so long runs on big grids stay in memory; h_series() and
    u_series() materialize full-precision TimeSeries views on demand. The
    final state is stored separately in complex128.
    """

    config: SolverConfig
    times: np.ndarray
    h_samples: np.ndarray
    u_samples: np.ndarray
    max_abs_h: np.ndarray
    cfl_numbers: np.ndarray
    stability_bound: float
    final_h: Field2D
    final_u: tuple[Field2D, Field2D]
    blow_up: BlowUpInfo | None = None

    def __post_init__(self) -> None:
        steps = np.diff(self.times)
        if self.times.size >= 2 and not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
            raise ConfigError("trajectory times must be uniformly spaced")
        if np.any(self.max_abs_h >= 1.0):
            raise ConfigError("saved sample violates 1 + h > 0")

    @property
    def grid(self) -> GridSpec:
        return self.config.grid

    def h_series(self) -> TimeSeries:
        fields = tuple(
            Field2D.spectral(self.grid, np.asarray(s, dtype=np.complex128))
            for s in self.h_samples
        )
        return TimeSeries(self.times, fields)

    def u_series(self) -> TimeSeries:
        pairs = tuple(
            (
                Field2D.spectral(self.grid, np.asarray(s[0], dtype=np.complex128)),
                Field2D.spectral(self.grid, np.asarray(s[1], dtype=np.complex128)),
            )
            for s in self.u_samples
        )
        return TimeSeries(self.times, pairs)


def _grad_phys(spec: np.ndarray, grid: GridSpec) -> tuple[np.ndarray, np.ndarray]:
    return (
        ifft2o(1j * grid.xi1 * spec).real,
        ifft2o(1j * grid.xi2 * spec).real,
    )


def _rhs_arrays(
    h_spec: np.ndarray,
    u_spec: np.ndarray,
    grid: GridSpec,
    h_form: str,
    use_dealias: bool,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """Non-diffusive right-hand sides in spectral form.

    Returns (dh, du, min(1+h), max|u|). Velocity diffusion is not included
    here; the stepper applies it exactly. All quadratic products are formed
    pointwise in physical space; the logarithm spectrum and the outputs are
    dealiased when requested.
    """
    h_phys = ifft2o(h_spec).real
    one_plus = 1.0 + h_phys
    min_height = float(one_plus.min())
    u1_phys = ifft2o(u_spec[0]).real
    u2_phys = ifft2o(u_spec[1]).real
    max_abs_u = float(max(np.abs(u1_phys).max(), np.abs(u2_phys).max()))
    if min_height <= 0.0:
        raise BlowUpError(BlowUpInfo(step=-1, time=float("nan"),
                                     min_height=min_height, max_abs_u=max_abs_u))

    def spectral(phys: np.ndarray) -> np.ndarray:
        out = fft2o(phys.astype(np.complex128))
        return grid.apply_dealias(out) if use_dealias else out

    div_u_spec = 1j * grid.xi1 * u_spec[0] + 1j * grid.xi2 * u_spec[1]
    div_u = ifft2o(div_u_spec).real

    if h_form == "standard":
        hx, hy = _grad_phys(h_spec, grid)
        dh = -div_u_spec + spectral(-u1_phys * hx - u2_phys * hy + h_phys * div_u)
    else:
        dh = -1j * grid.xi1 * spectral(one_plus * u1_phys) \
             - 1j * grid.xi2 * spectral(one_plus * u2_phys)

    log_spec = fft2o(np.log1p(h_phys).astype(np.complex128))
    if use_dealias:
        log_spec = grid.apply_dealias(log_spec)
    lx, ly = _grad_phys(log_spec, grid)

    du = np.empty_like(u_spec)
    for comp in range(2):
        gx, gy = _grad_phys(u_spec[comp], grid)
        quad = -u1_phys * gx - u2_phys * gy + lx * gx + ly * gy
        du[comp] = spectral(quad) - 1j * (grid.xi1 if comp == 0 else grid.xi2) * h_spec
    return dh, du, min_height, max_abs_u


def rhs_eval(
    h: Field2D,
    u: tuple[Field2D, Field2D],
    h_form: str = "standard",
    use_dealias: bool = True,
) -> tuple[Field2D, tuple[Field2D, Field2D]]:
    """Non-diffusive right-hand sides as spectral fields."""
    if h_form not in H_FORMS:
        raise ConfigError(f"h_form must be one of {H_FORMS}, got {h_form!r}")
    grid = h.grid
    if u[0].grid != grid or u[1].grid != grid:
        raise ConfigError("rhs_eval needs all fields on one grid")
    from .grid import as_spectral

    h_spec = as_spectral(h).values
    u_spec = np.stack([as_spectral(u[0]).values, as_spectral(u[1]).values])
    dh, du, _minh, _maxu = _rhs_arrays(h_spec, u_spec, grid, h_form, use_dealias)
    return (
        Field2D.spectral(grid, dh),
        (Field2D.spectral(grid, du[0]), Field2D.spectral(grid, du[1])),
    )


def _heun_step(
    h_spec: np.ndarray,
    u_spec: np.ndarray,
    grid: GridSpec,
    dt: float,
    decay: np.ndarray,
    cfg: SolverConfig,
) -> tuple[np.ndarray, np.ndarray, float, float]:
    """One integrating-factor Heun advance; returns state and diagnostics."""
    if not cfg.nonlinear:
        return h_spec, u_spec * decay, 1.0, 0.0
    dh1, du1, minh, maxu = _rhs_arrays(h_spec, u_spec, grid, cfg.h_form, cfg.use_dealias)
    h_pred = h_spec + dt * dh1
    u_pred = decay * (u_spec + dt * du1)
    dh2, du2, _m2, _x2 = _rhs_arrays(h_pred, u_pred, grid, cfg.h_form, cfg.use_dealias)
    h_new = h_spec + (0.5 * dt) * (dh1 + dh2)
    u_new = decay * u_spec + (0.5 * dt) * (decay * du1 + du2)
    return h_new, u_new, minh, maxu


def solve(init: InitialData, cfg: SolverConfig) -> Trajectory:
    """March the system to t_final, saving every save_every-th step.

    Blow-up (1 + h reaching 0) is reported structurally: the trajectory is
    truncated at the last good sample and carries the blow_up record.
    Non-finite values abort with a NumericalError naming the step.
    """
    grid = cfg.grid
    if init.grid != grid:
        raise ConfigError("initial data grid does not match solver grid")
    dt = cfg.dt_actual
    decay = np.exp(-dt * grid.freq_sq)
    sample_dtype = np.complex64 if cfg.sample_dtype == "c64" else np.complex128

    h_spec = init.h_spec.copy()
    u_spec = init.u_spec.copy()
    if cfg.use_dealias:
        h_spec = grid.apply_dealias(h_spec)
        u_spec = grid.apply_dealias(u_spec)

    u0_max = float(np.abs(ifft2o(u_spec[0]).real).max()
                   + np.abs(ifft2o(u_spec[1]).real).max())
    bound = grid.spacing / max(u0_max, 1e-300)
    if dt > bound:
        raise ConfigError(
            f"dt={dt:.3e} exceeds the advective stability bound {bound:.3e} "
            f"(grid spacing / initial max speed)"
        )

    n_samples = cfg.n_samples
    h_samples = np.empty((n_samples, grid.points_per_axis, grid.points_per_axis),
                         dtype=sample_dtype)
    u_samples = np.empty((n_samples, 2, grid.points_per_axis, grid.points_per_axis),
                         dtype=sample_dtype)
    times = np.empty(n_samples)
    max_abs_h = np.empty(n_samples)
    cfl = np.empty(n_samples)

    def record(k_sample: int, t: float) -> None:
        h_samples[k_sample] = h_spec
        u_samples[k_sample] = u_spec
        times[k_sample] = t
        h_phys = ifft2o(h_spec).real
        u_mag = np.hypot(ifft2o(u_spec[0]).real, ifft2o(u_spec[1]).real)
        max_abs_h[k_sample] = float(np.abs(h_phys).max())
        cfl[k_sample] = dt * float(u_mag.max()) / grid.spacing

    record(0, 0.0)
    blow_up = None
    k_sample = 0
    for step in range(1, cfg.n_steps + 1):
        try:
            h_spec, u_spec, _minh, _maxu = _heun_step(h_spec, u_spec, grid, dt, decay, cfg)
        except BlowUpError as exc:
            exc.info.step = step
            exc.info.time = (step - 1) * dt
            blow_up = exc.info
            break
        if not (np.isfinite(h_spec.view(np.float64)).all()
                and np.isfinite(u_spec.view(np.float64)).all()):
            raise NumericalError(f"non-finite state at step {step} (t={step * dt:.6g})")
        if step % cfg.save_every == 0:
            k_sample += 1
            record(k_sample, step * dt)

    kept = k_sample + 1
    return Trajectory(
        config=cfg,
        times=times[:kept].copy(),
        h_samples=h_samples[:kept],
        u_samples=u_samples[:kept],
        max_abs_h=max_abs_h[:kept].copy(),
        cfl_numbers=cfl[:kept].copy(),
        stability_bound=bound,
        final_h=Field2D.spectral(grid, h_spec.astype(np.complex128)),
        final_u=(
            Field2D.spectral(grid, u_spec[0].astype(np.complex128)),
            Field2D.spectral(grid, u_spec[1].astype(np.complex128)),
        ),
        blow_up=blow_up,
    )


# -- three-part solution split ----------------------------------------------------


@dataclass(frozen=True)
class RemainderDiagnostics:
    """Size measures of the correction layers over the run window.

    x_t is the remainder norm: the sup-in-time low-regularity piece plus the
    time-integrated high-regularity piece, both at integrability q. y_t is
    the sup-in-time height norm. u1_final holds the first correction at the
    final sample in full precision for later norm evaluation.
    """

    q: float
    x_t: float
    y_t: float
    sup_part: float
    integral_part: float
    u1_final: tuple[Field2D, Field2D]


def _split_core(
    traj: Trajectory,
    init: InitialData,
    q: float,
    collect: bool,
) -> tuple[list, list, list, RemainderDiagnostics]:
    grid = traj.grid
    times = traj.times
    n_samp = times.size
    if n_samp < 32:
        raise ConfigError(f"solution split needs >= 32 saved samples, got {n_samp}")
    if traj.blow_up is not None:
        raise ConfigError("cannot split a blown-up trajectory")
    delta = float(times[1] - times[0])
    decay = np.exp(-delta * grid.freq_sq)
    use_dealias = traj.config.use_dealias

    u0_now = init.u_spec.copy()
    if use_dealias:
        u0_now = grid.apply_dealias(u0_now)
    nl_now = advection_spectrum(u0_now, grid, use_dealias)
    u1_now = np.zeros_like(u0_now)

    u0_fields, u1_fields, u2_fields = [], [], []
    h_rows, u2_rows = [], []

    def push(k: int) -> None:
        u_k = np.asarray(traj.u_samples[k], dtype=np.complex128)
        u2_k = u_k - u0_now - u1_now
        h_k = np.asarray(traj.h_samples[k], dtype=np.complex128)
        _js, row_h = block_lp_rows(h_k[None], grid, q)
        h_rows.append(row_h[0])
        _js, row_u2 = block_lp_rows(u2_k[None], grid, q)
        u2_rows.append(row_u2[0])
        if collect:
            u0_fields.append(_pair(grid, u0_now))
            u1_fields.append(_pair(grid, u1_now))
            u2_fields.append(_pair(grid, u2_k))

    push(0)
    for k in range(1, n_samp):
        u0_next = decay * u0_now
        nl_next = advection_spectrum(u0_next, grid, use_dealias)
        u1_now = decay * u1_now - (0.5 * delta) * (decay * nl_now + nl_next)
        u0_now = u0_next
        nl_now = nl_next
        push(k)

    lo, hi = grid.extended_band
    js = np.arange(lo, hi + 1)
    h_table = np.vstack(h_rows)
    u2_table = np.vstack(u2_rows)

    s_low = 2.0 / q - 1.0
    s_high = 2.0 / q + 1.0
    sup_part = combine_blocks(js, time_lq(u2_table, times, math.inf), s_low, 1.0)
    integral_part = combine_blocks(js, time_lq(u2_table, times, 1.0), s_high, 1.0)
    y_t = combine_blocks(js, time_lq(h_table, times, math.inf), 2.0 / q, 1.0)
    diag = RemainderDiagnostics(
        q=q, x_t=sup_part + integral_part, y_t=y_t,
        sup_part=sup_part, integral_part=integral_part,
        u1_final=_pair(grid, u1_now),
    )
    return u0_fields, u1_fields, u2_fields, diag


def _pair(grid: GridSpec, spec: np.ndarray) -> tuple[Field2D, Field2D]:
    return (
        Field2D.spectral(grid, spec[0].astype(np.complex128, copy=True)),
        Field2D.spectral(grid, spec[1].astype(np.complex128, copy=True)),
    )


def decompose(
    traj: Trajectory, init: InitialData, q: float
) -> tuple[TimeSeries, TimeSeries, TimeSeries, RemainderDiagnostics]:
    """Split u into heat flow + first correction + remainder, with diagnostics.

    The heat part is exact; the first correction integrates the heat-flow
    advection term by trapezoid over the saved samples; the remainder is the
    pointwise difference, so the three parts sum to u identically.
    """
    u0_f, u1_f, u2_f, diag = _split_core(traj, init, q, collect=True)
    return (
        TimeSeries(traj.times, tuple(u0_f)),
        TimeSeries(traj.times, tuple(u1_f)),
        TimeSeries(traj.times, tuple(u2_f)),
        diag,
    )


def remainder_diagnostics(traj: Trajectory, init: InitialData, q: float) -> RemainderDiagnostics:
    """Streaming variant of decompose: same numbers, no stored series."""
    return _split_core(traj, init, q, collect=False)[3]
