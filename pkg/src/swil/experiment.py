"""Sweep orchestration: runs the witness quadrature and full solves across a
range of carrier scales n, fits the growth and decay slopes, checks the
inflation bounds, and emits CSV / summary / plot files.

Reported per n: T0, the exact critical norm of the data, the continuum
witness of the first correction with its normalized constant G(n), the grid
norms of the solution and first correction at T0, and the remainder sizes
X_T, Y_T. Witness columns are continuum quadrature; the rest come from the
grid path, as the mode column records.
"""

from __future__ import annotations

import concurrent.futures
import dataclasses
import hashlib
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .besov import BesovParams, SlopeFit, besov_norm, fit_log2_slope
from .construction import (
    IndexFamily,
    data_norm_envelope,
    index_family,
    make_initial_data,
    u1_witness,
)
from .errors import CheckFailure, ConfigError, SwilError
from .grid import GridSpec
from .solver import SolverConfig, remainder_diagnostics, solve

MODES = ("witness", "solve", "both")

CSV_HEADER = "n,T0,norm_u0,witness,G_n,norm_uT,norm_U1,X_T,Y_T,mode"


@dataclass(frozen=True)
class ExperimentConfig:
    """Sweep definition. Grid rule: N = points_per_carrier * 2^n unless an
    explicit grid_n is forced; solves use dt = T0 / steps."""

    p: float | Fraction = 8
    n_list: tuple[int, ...] = (4, 5, 6)
    mode: str = "both"
    grid_l: float = 3.0
    points_per_carrier: int = 24
    grid_n: int | None = None
    steps: int = 128
    save_every: int | None = None
    h_form: str = "standard"
    use_dealias: bool = True
    witness_rtol: float = 1e-5
    witness_panels: int = 6
    out_dir: str | None = None
    workers: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "n_list", tuple(int(n) for n in self.n_list))
        if not self.n_list:
            raise ConfigError("n_list must be nonempty")
        if list(self.n_list) != sorted(set(self.n_list)):
            raise ConfigError("n_list must be strictly ascending")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        index_family(self.p)

    def grid_for(self, n: int) -> GridSpec:
        npts = self.grid_n if self.grid_n is not None else self.points_per_carrier * 2**n
        return GridSpec(npts, self.grid_l)

    def solver_config(self, n: int, t_final: float) -> SolverConfig:
        save = self.save_every if self.save_every is not None else (2 if n <= 5 else 4)
        return SolverConfig(
            grid=self.grid_for(n),
            t_final=t_final,
            dt=t_final / self.steps,
            save_every=save,
            h_form=self.h_form,
            use_dealias=self.use_dealias,
            sample_dtype="c128" if n <= 5 else "c64",
        )

    def canonical_text(self) -> str:
        """Physics-relevant keys only: execution details (out_dir, workers)
        do not change results and stay out of the hash."""
        skip = {"out_dir", "workers"}
        pairs = []
        for f in dataclasses.fields(self):
            if f.name in skip:
                continue
            pairs.append(f"{f.name}={getattr(self, f.name)!r}")
        return "\n".join(pairs) + "\n"

    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


@dataclass(frozen=True)
class SweepRow:
    n: int
    t0: float
    norm_u0: float
    witness: float = math.nan
    g_n: float = math.nan
    norm_ut: float = math.nan
    norm_u1: float = math.nan
    x_t: float = math.nan
    y_t: float = math.nan
    mode: str = "witness"
    error: str | None = None


@dataclass(frozen=True)
class BoundsCheck:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class InflationReport:
    family: IndexFamily
    mode: str
    rows: tuple[SweepRow, ...]
    slopes: dict
    config_hash: str
    version: str

    def finite(self, attr: str) -> tuple[np.ndarray, np.ndarray]:
        ns, vals = [], []
        for row in self.rows:
            v = getattr(row, attr)
            if math.isfinite(v) and v > 0:
                ns.append(row.n)
                vals.append(v)
        return np.asarray(ns), np.asarray(vals)


def _fit_or_none(ns: np.ndarray, vals: np.ndarray) -> SlopeFit | None:
    if ns.size < 3:
        return None
    return fit_log2_slope(ns, vals)


def sweep_one(cfg: ExperimentConfig, n: int) -> SweepRow:
    """One sweep entry; never raises for per-n numerical trouble."""
    fam = index_family(cfg.p)
    t0 = fam.t0(n)
    row = SweepRow(n=n, t0=t0, norm_u0=data_norm_envelope(n, fam), mode=cfg.mode)
    try:
        wit = u1_witness(n, fam, rtol=cfg.witness_rtol, panels=cfg.witness_panels,
                         inner_rtol=cfg.witness_rtol)
        row = dataclasses.replace(row, witness=wit.cross_total, g_n=wit.g_value)
        if cfg.mode == "witness":
            return row
        grid = cfg.grid_for(n)
        init = make_initial_data(n, fam, grid)
        traj = solve(init, cfg.solver_config(n, t0))
        if traj.blow_up is not None:
            return dataclasses.replace(row, error=f"blow-up: {traj.blow_up}")
        diag = remainder_diagnostics(traj, init, q=float(fam.q))
        bp = BesovParams(s=float(2 / fam.p - 1), p=float(fam.p), r=1.0)
        return dataclasses.replace(
            row,
            norm_ut=besov_norm(traj.final_u, bp, warn=False),
            norm_u1=besov_norm(diag.u1_final, bp, warn=False),
            x_t=diag.x_t,
            y_t=diag.y_t,
        )
    except SwilError as exc:
        return dataclasses.replace(row, error=f"{type(exc).__name__}: {exc}")


def run_sweep(cfg: ExperimentConfig) -> InflationReport:
    """Run all sweep entries, isolate per-n failures, fit slopes."""
    fam = index_family(cfg.p)
    for n in cfg.n_list:
        grid = cfg.grid_for(n)
        npts = grid.points_per_axis
        mem = 3 * cfg.solver_config(n, fam.t0(n)).n_samples * npts * npts * (
            16 if n <= 5 else 8) / 2**30
        print(f"[sweep] n={n}: grid {npts}x{npts}, L={grid.period_scale}, "
              f"projected trajectory {mem:.2f} GiB, mode={cfg.mode}")

    if cfg.workers > 1 and len(cfg.n_list) > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = list(pool.map(sweep_one, [cfg] * len(cfg.n_list), cfg.n_list))
    else:
        rows = [sweep_one(cfg, n) for n in cfg.n_list]
    rows.sort(key=lambda r: r.n)
    report = InflationReport(
        family=fam, mode=cfg.mode, rows=tuple(rows), slopes={},
        config_hash=cfg.config_hash(), version=__version__,
    )
    slopes = {
        "data": _fit_or_none(*report.finite("norm_u0")),
        "witness": _fit_or_none(*report.finite("witness")),
        "solution": _fit_or_none(*report.finite("norm_ut")),
        "first_correction": _fit_or_none(*report.finite("norm_u1")),
    }
    return dataclasses.replace(report, slopes=slopes)


def verify_bounds(report: InflationReport) -> tuple[BoundsCheck, ...]:
    """The computable content of the inflation statement, on fitted slopes:
    the data norm must decay at rate eps (15% slack), the first-correction
    witness must not decay faster than the inflation exponent allows (0.05
    absolute slack), and the solution/data norm ratio must strictly grow."""
    fam = report.family
    eps = float(fam.eps)
    if report.finite("norm_u0")[0].size < 3:
        raise ConfigError("verify_bounds needs at least 3 sweep points")
    checks = []

    data = report.slopes["data"]
    checks.append(BoundsCheck(
        "data_norm_decay",
        data is not None and data.slope <= -0.85 * eps,
        f"slope {data.slope:.6f} vs bound {-0.85 * eps:.6f}" if data else "missing",
    ))

    infl = float(fam.inflation_exp)
    wit = report.slopes["witness"]
    checks.append(BoundsCheck(
        "first_correction_growth",
        wit is not None and wit.slope >= infl - 0.05,
        f"slope {wit.slope:.6f} vs bound {infl - 0.05:.6f}" if wit else "missing",
    ))

    ns, ratios = [], []
    for row in report.rows:
        if math.isfinite(row.norm_ut) and row.norm_u0 > 0:
            ns.append(row.n)
            ratios.append(row.norm_ut / row.norm_u0)
    if ratios:
        increasing = all(b > a for a, b in zip(ratios, ratios[1:]))
        checks.append(BoundsCheck(
            "ratio_strictly_increasing",
            increasing and len(ratios) >= 2,
            "ratios " + ", ".join(f"{v:.6g}" for v in ratios),
        ))
    return tuple(checks)


def bounds_passed(checks: tuple[BoundsCheck, ...]) -> bool:
    return all(c.passed for c in checks)


# -- emission -----------------------------------------------------------------------


def _csv_cell(v: float) -> str:
    return repr(float(v))


def emit(report: InflationReport, out_dir: str | Path) -> dict[str, Path]:
    """Write sweep.csv, summary.txt, and the slope plot; returns the paths.

    The CSV is a pure function of the report (repr round-trip floats), so
    identical configs rebuild it byte for byte.
    """
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
        probe = out / ".writable"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise ConfigError(f"output directory {out} is not writable: {exc}") from exc

    csv_path = out / "sweep.csv"
    lines = [CSV_HEADER]
    for r in report.rows:
        lines.append(",".join([
            str(r.n), _csv_cell(r.t0), _csv_cell(r.norm_u0), _csv_cell(r.witness),
            _csv_cell(r.g_n), _csv_cell(r.norm_ut), _csv_cell(r.norm_u1),
            _csv_cell(r.x_t), _csv_cell(r.y_t), r.mode,
        ]))
    csv_path.write_text("\n".join(lines) + "\n")

    summary_path = out / "summary.txt"
    fam = report.family
    pairs = [
        ("version", report.version),
        ("config_hash", report.config_hash),
        ("p", repr(float(fam.p))),
        ("eps", repr(float(fam.eps))),
        ("inflation_exp", repr(float(fam.inflation_exp))),
        ("remainder_exp", repr(float(fam.remainder_exp))),
        ("mode", report.mode),
        ("n_values", " ".join(str(r.n) for r in report.rows)),
    ]
    for name, fit in report.slopes.items():
        if fit is None:
            pairs.append((f"slope_{name}", "nan"))
        else:
            pairs.append((f"slope_{name}", repr(fit.slope)))
            pairs.append((f"slope_{name}_residual_rms", repr(fit.residual_rms)))
    for row in report.rows:
        if row.error:
            pairs.append((f"error_n{row.n}", row.error))
    try:
        for chk in verify_bounds(report):
            pairs.append((f"check_{chk.name}", f"{'pass' if chk.passed else 'fail'} ({chk.detail})"))
    except ConfigError:
        pairs.append(("check_bounds", "skipped (needs >= 3 points)"))
    summary_path.write_text("".join(f"{k}={v}\n" for k, v in pairs))

    plot_path = out / "norms_vs_n.png"
    _plot_report(report, plot_path)
    return {"csv": csv_path, "summary": summary_path, "plot": plot_path}


def _plot_report(report: InflationReport, path: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(6.4, 4.2))
    styles = {
        "norm_u0": ("o-", "data norm"),
        "witness": ("s-", "first-correction witness"),
        "norm_ut": ("^-", "solution norm at T0"),
        "norm_u1": ("v-", "first-correction norm"),
    }
    plotted = False
    for attr, (style, label) in styles.items():
        ns, vals = report.finite(attr)
        if ns.size == 0:
            continue
        plotted = True
        ax.plot(ns, np.log2(vals), style, label=label, markersize=4)
        key = {"norm_u0": "data", "witness": "witness", "norm_ut": "solution",
               "norm_u1": "first_correction"}[attr]
        fit = report.slopes.get(key)
        if fit is not None:
            xs = np.linspace(ns.min(), ns.max(), 32)
            ax.plot(xs, fit.slope * xs + fit.intercept, "--", linewidth=0.8,
                    label=f"{label} fit: {fit.slope:+.4f}/n")
    ax.set_xlabel("carrier scale n")
    ax.set_ylabel("log2 norm")
    ax.set_title(f"p={float(report.family.p):g}: decay vs growth")
    if plotted:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def check_report(report: InflationReport) -> None:
    """Raise CheckFailure unless every bound check passes."""
    checks = verify_bounds(report)
    failed = [c for c in checks if not c.passed]
    if failed:
        raise CheckFailure(
            "; ".join(f"{c.name}: {c.detail}" for c in failed)
        )


def load_report(out_dir: str | Path) -> InflationReport:
    """Rebuild a report from an emitted sweep directory (CSV + summary)."""
    out = Path(out_dir)
    csv_path = out / "sweep.csv"
    summary_path = out / "summary.txt"
    if not csv_path.exists() or not summary_path.exists():
        raise ConfigError(f"{out} does not contain sweep.csv and summary.txt")
    meta = {}
    for line in summary_path.read_text().splitlines():
        key, _, value = line.partition("=")
        meta[key] = value
    fam = index_family(meta["p"])
    rows = []
    lines = csv_path.read_text().splitlines()
    if lines[0] != CSV_HEADER:
        raise ConfigError(f"unexpected CSV header in {csv_path}")
    for line in lines[1:]:
        cells = line.split(",")
        rows.append(SweepRow(
            n=int(cells[0]), t0=float(cells[1]), norm_u0=float(cells[2]),
            witness=float(cells[3]), g_n=float(cells[4]), norm_ut=float(cells[5]),
            norm_u1=float(cells[6]), x_t=float(cells[7]), y_t=float(cells[8]),
            mode=cells[9], error=meta.get(f"error_n{cells[0]}"),
        ))
    report = InflationReport(
        family=fam, mode=meta.get("mode", "both"), rows=tuple(rows), slopes={},
        config_hash=meta.get("config_hash", ""), version=meta.get("version", ""),
    )
    slopes = {
        "data": _fit_or_none(*report.finite("norm_u0")),
        "witness": _fit_or_none(*report.finite("witness")),
        "solution": _fit_or_none(*report.finite("norm_ut")),
        "first_correction": _fit_or_none(*report.finite("norm_u1")),
    }
    return dataclasses.replace(report, slopes=slopes)
