"""Binary trajectory checkpoints.

Exact little-endian layout (see docs/checkpoint_format.md for the same table):

  offset  size            field
  0       8               magic b"SWTRAJ01"
  8       u4              N, grid points per axis
  12      f8              period scale L
  16      f8              dt actually used
  24      u4              save_every
  28      u4              M, number of saved samples
  32      u1              sample dtype code: 0 complex128, 1 complex64
  33      u1              h_form code: 0 standard, 1 conservative
  34      u1              flag bits: 1 dealias, 2 nonlinear, 4 blown up
  35      u1              reserved, 0
  36      f8              t_final
  44      f8              stability bound
  52      4*f8            blow-up record (step, time, min height, max |u|),
                          NaNs when the run completed
  84      M*f8            sample times
  ...     M*N*N complex   h samples (row major, dtype per code)
  ...     M*2*N*N complex u samples
  ...     M*f8            max |h| per sample
  ...     M*f8            CFL number per sample
  ...     N*N c16         final h, full precision
  ...     2*N*N c16       final u

Everything a run reports is reconstructible from this file.
"""

from __future__ import annotations

import dataclasses
from pathlib import Path

import numpy as np

from .construction import InitialData
from .errors import BlowUpInfo, ConfigError
from .grid import Field2D, GridSpec
from .solver import H_FORMS, SolverConfig, Trajectory

MAGIC = b"SWTRAJ01"
_DTYPE_CODES = {"c128": 0, "c64": 1}
_NUMPY_DTYPES = {0: "<c16", 1: "<c8"}


def save_trajectory(traj: Trajectory, path: str | Path) -> Path:
    path = Path(path)
    cfg = traj.config
    n = cfg.grid.points_per_axis
    m = traj.times.size
    flags = (1 if cfg.use_dealias else 0) | (2 if cfg.nonlinear else 0) \
        | (4 if traj.blow_up is not None else 0)
    bu = traj.blow_up
    blow_rec = (
        np.array([bu.step, bu.time, bu.min_height, bu.max_abs_u], dtype="<f8")
        if bu is not None
        else np.full(4, np.nan, dtype="<f8")
    )
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        np.array([n], dtype="<u4").tofile(fh)
        np.array([cfg.grid.period_scale, cfg.dt_actual], dtype="<f8").tofile(fh)
        np.array([cfg.save_every, m], dtype="<u4").tofile(fh)
        np.array(
            [_DTYPE_CODES[cfg.sample_dtype], H_FORMS.index(cfg.h_form), flags, 0],
            dtype="u1",
        ).tofile(fh)
        np.array([cfg.t_final, traj.stability_bound], dtype="<f8").tofile(fh)
        blow_rec.tofile(fh)
        traj.times.astype("<f8").tofile(fh)
        sample_dtype = _NUMPY_DTYPES[_DTYPE_CODES[cfg.sample_dtype]]
        np.ascontiguousarray(traj.h_samples, dtype=sample_dtype).tofile(fh)
        np.ascontiguousarray(traj.u_samples, dtype=sample_dtype).tofile(fh)
        traj.max_abs_h.astype("<f8").tofile(fh)
        traj.cfl_numbers.astype("<f8").tofile(fh)
        np.ascontiguousarray(traj.final_h.values, dtype="<c16").tofile(fh)
        np.ascontiguousarray(traj.final_u[0].values, dtype="<c16").tofile(fh)
        np.ascontiguousarray(traj.final_u[1].values, dtype="<c16").tofile(fh)
    return path


def load_trajectory(path: str | Path) -> Trajectory:
    path = Path(path)
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ConfigError(f"{path} is not a trajectory checkpoint")
        n = int(np.fromfile(fh, "<u4", 1)[0])
        period_scale, dt = np.fromfile(fh, "<f8", 2)
        save_every, m = (int(v) for v in np.fromfile(fh, "<u4", 2))
        dtype_code, h_form_code, flags, _res = np.fromfile(fh, "u1", 4)
        t_final, bound = np.fromfile(fh, "<f8", 2)
        blow_rec = np.fromfile(fh, "<f8", 4)
        times = np.fromfile(fh, "<f8", m)
        sample_dtype = _NUMPY_DTYPES[int(dtype_code)]
        h_samples = np.fromfile(fh, sample_dtype, m * n * n).reshape(m, n, n)
        u_samples = np.fromfile(fh, sample_dtype, m * 2 * n * n).reshape(m, 2, n, n)
        max_abs_h = np.fromfile(fh, "<f8", m)
        cfl = np.fromfile(fh, "<f8", m)
        final_h = np.fromfile(fh, "<c16", n * n).reshape(n, n)
        final_u1 = np.fromfile(fh, "<c16", n * n).reshape(n, n)
        final_u2 = np.fromfile(fh, "<c16", n * n).reshape(n, n)
        if fh.read(1):
            raise ConfigError(f"{path} has trailing bytes; wrong shape or corrupt")
    grid = GridSpec(n, float(period_scale))
    cfg = SolverConfig(
        grid=grid,
        t_final=float(t_final),
        dt=float(dt),
        save_every=save_every,
        h_form=H_FORMS[int(h_form_code)],
        use_dealias=bool(flags & 1),
        nonlinear=bool(flags & 2),
        sample_dtype={v: k for k, v in _DTYPE_CODES.items()}[int(dtype_code)],
    )
    blow_up = None
    if flags & 4:
        blow_up = BlowUpInfo(
            step=int(blow_rec[0]), time=float(blow_rec[1]),
            min_height=float(blow_rec[2]), max_abs_u=float(blow_rec[3]),
        )
    return Trajectory(
        config=cfg,
        times=times,
        h_samples=h_samples,
        u_samples=u_samples,
        max_abs_h=max_abs_h,
        cfl_numbers=cfl,
        stability_bound=float(bound),
        final_h=Field2D.spectral(grid, final_h),
        final_u=(Field2D.spectral(grid, final_u1), Field2D.spectral(grid, final_u2)),
        blow_up=blow_up,
    )


def resume_data(traj: Trajectory, init: InitialData) -> InitialData:
    """Initial data for continuing a finished run: the final state, full precision."""
    if traj.blow_up is not None:
        raise ConfigError("cannot resume a blown-up trajectory")
    u_spec = np.stack([traj.final_u[0].values, traj.final_u[1].values])
    return dataclasses.replace(init, u_spec=u_spec, h_spec=traj.final_h.values.copy())
