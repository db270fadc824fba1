"""Command-line front end.

Subcommands: indices, initdata, u1-witness, solve, sweep, check, props.
Exit codes: 0 pass, 1 check failure, 2 configuration error, 3 numerical
failure. A config file (--config, flat key=value lines, keys matching the
long flag names with either - or _) supplies defaults; explicit flags win.
"""

from __future__ import annotations

import argparse
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .besov import BesovParams, besov_norm
from .construction import data_norm_envelope, index_family, make_initial_data, u1_witness
from .errors import CheckFailure, ConfigError, NumericalError, SwilError
from .experiment import (
    MODES,
    ExperimentConfig,
    bounds_passed,
    emit,
    load_report,
    run_sweep,
    verify_bounds,
)
from .grid import GridSpec, lp_norm_vector
from .solver import H_FORMS, SolverConfig, remainder_diagnostics, solve


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _parse_n_range(text: str) -> tuple[int, ...]:
    lo, sep, hi = text.partition(":")
    if not sep:
        raise argparse.ArgumentTypeError("n-range needs the form LO:HI")
    return tuple(range(int(lo), int(hi) + 1))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swil",
        description="Norm-inflation laboratory for the viscous shallow water system",
    )
    parser.add_argument("--version", action="version", version=f"swil {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp, grid=False, solver=False):
        sp.add_argument("--p", type=_fraction, default=Fraction(8), help="integrability index, > 4")
        sp.add_argument("--config", type=Path, default=None,
                        help="key=value defaults file; flags override")
        if grid:
            sp.add_argument("--grid-N", type=int, default=None, dest="grid_n",
                            help="grid points per axis")
            sp.add_argument("--grid-L", type=float, default=3.0, dest="grid_l",
                            help="torus period / 2 pi")
        if solver:
            sp.add_argument("--dt", type=float, default=None)
            sp.add_argument("--steps", type=int, default=128)
            sp.add_argument("--save-every", type=int, default=None)
            sp.add_argument("--h-form", choices=H_FORMS, default="standard")
            sp.add_argument("--no-dealias", action="store_true")

    sp = sub.add_parser("indices", help="print the exponent family for p")
    add_common(sp)

    sp = sub.add_parser("initdata", help="build the oscillatory data and report its norms")
    add_common(sp, grid=True)
    sp.add_argument("--n", type=int, required=True, help="carrier scale")

    sp = sub.add_parser("u1-witness", help="continuum witness of the first correction")
    add_common(sp)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--t", type=float, default=None, help="time, default T0(n)")
    sp.add_argument("--rtol", type=float, default=1e-5)
    sp.add_argument("--panels", type=int, default=6)

    sp = sub.add_parser("solve", help="run the full system to T0 (or --T)")
    add_common(sp, grid=True, solver=True)
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--T", type=float, default=None, dest="t_final")
    sp.add_argument("--out", type=Path, default=None, help="trajectory checkpoint path")

    sp = sub.add_parser("sweep", help="run the n-sweep and emit CSV/summary/plot")
    add_common(sp, grid=True, solver=True)
    sp.add_argument("--n", type=int, action="append", default=None,
                    help="carrier scale, repeatable")
    sp.add_argument("--n-range", type=_parse_n_range, default=None)
    sp.add_argument("--mode", choices=MODES, default="both")
    sp.add_argument("--out", type=Path, required=True, help="output directory")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--rtol", type=float, default=1e-5, help="witness quadrature tolerance")
    sp.add_argument("--panels", type=int, default=6)

    sp = sub.add_parser("check", help="re-verify the bounds of an emitted sweep")
    sp.add_argument("--report", type=Path, required=True, help="sweep output directory")
    sp.add_argument("--config", type=Path, default=None)

    sp = sub.add_parser("props", help="run the property suites")
    sp.add_argument("--quick", action="store_true")
    sp.add_argument("--config", type=Path, default=None)
    return parser


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Pre-scan for --config and install its keys as subparser defaults."""
    if "--config" not in argv:
        return argv
    idx = argv.index("--config")
    if idx + 1 >= len(argv):
        raise ConfigError("--config needs a path")
    path = Path(argv[idx + 1])
    if not path.exists():
        raise ConfigError(f"config file {path} does not exist")
    overrides = {}
    for line_no, raw in enumerate(path.read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(f"{path}:{line_no}: expected key=value, got {raw!r}")
        overrides[key.strip().replace("-", "_").lstrip("_")] = value.strip()
    converters = {
        "p": _fraction, "n": lambda v: [int(x) for x in v.split()],
        "n_range": _parse_n_range, "grid_n": int, "grid_l": float,
        "dt": float, "steps": int, "save_every": int, "workers": int,
        "rtol": float, "panels": int, "t": float, "t_final": float,
        "out": Path, "report": Path,
        "no_dealias": lambda v: v.lower() in ("1", "true", "yes", "on"),
        "quick": lambda v: v.lower() in ("1", "true", "yes", "on"),
    }
    defaults = {}
    for key, value in overrides.items():
        if key in ("h_form", "mode"):
            defaults[key] = value
        elif key in converters:
            try:
                defaults[key] = converters[key](value)
            except (ValueError, argparse.ArgumentTypeError) as exc:
                raise ConfigError(f"config key {key}: {exc}") from exc
        else:
            raise ConfigError(f"unknown config key {key!r}")
    # install on every subparser that knows the destination
    for action in parser._subparsers._group_actions[0].choices.values():  # noqa: SLF001
        known = {a.dest for a in action._actions}  # noqa: SLF001
        action.set_defaults(**{k: v for k, v in defaults.items() if k in known})
    return argv


def _print_kv(pairs) -> None:
    width = max(len(k) for k, _ in pairs)
    for key, value in pairs:
        print(f"{key:<{width}}  {value}")


def _cmd_indices(args) -> int:
    fam = index_family(args.p)
    _print_kv([
        ("p", f"{fam.p} = {float(fam.p):.6g}"),
        ("p_star", f"{fam.p_star} = {float(fam.p_star):.6g}"),
        ("q", f"{fam.q} = {float(fam.q):.6g}"),
        ("q_star", f"{fam.q_star} = {float(fam.q_star):.6g}"),
        ("r", f"{fam.r} = {float(fam.r):.6g}"),
        ("eps", f"{fam.eps} = {float(fam.eps):.6g}"),
        ("amplitude_exp", f"{fam.amplitude_exp} = {float(fam.amplitude_exp):.6g}"),
        ("inflation_exp", f"{fam.inflation_exp} = {float(fam.inflation_exp):.6g}"),
        ("remainder_exp", f"{fam.remainder_exp} = {float(fam.remainder_exp):.6g}"),
        ("height_remainder_exp",
         f"{fam.height_remainder_exp} = {float(fam.height_remainder_exp):.6g}"),
    ])
    return 0


def _default_grid(args, n: int) -> GridSpec:
    npts = args.grid_n if args.grid_n is not None else 24 * 2**n
    return GridSpec(npts, args.grid_l)


def _cmd_initdata(args) -> int:
    fam = index_family(args.p)
    grid = _default_grid(args, args.n)
    init = make_initial_data(args.n, fam, grid)
    u_pair = init.u_fields()
    bp = BesovParams(s=float(2 / fam.p - 1), p=float(fam.p), r=1.0)
    _print_kv([
        ("n", args.n),
        ("grid", f"{grid.points_per_axis}^2, L={grid.period_scale}"),
        ("carrier_index", 2**args.n),
        ("amplitude", repr(init.amplitude)),
        ("T0", repr(fam.t0(args.n))),
        ("norm_exact", repr(data_norm_envelope(args.n, fam))),
        ("norm_grid", repr(besov_norm(u_pair, bp, warn=False))),
        ("max_speed", repr(lp_norm_vector(u_pair[0], u_pair[1], math.inf))),
    ])
    return 0


def _cmd_witness(args) -> int:
    fam = index_family(args.p)
    wit = u1_witness(args.n, fam, t=args.t, rtol=args.rtol, panels=args.panels,
                     inner_rtol=args.rtol)
    _print_kv([
        ("n", wit.n),
        ("t", repr(wit.t)),
        ("cross21", repr(wit.cross21)),
        ("cross12", repr(wit.cross12)),
        ("self11", repr(wit.self11)),
        ("self22", repr(wit.self22)),
        ("self_mag1", repr(wit.self_mag1)),
        ("self_mag2", repr(wit.self_mag2)),
        ("cross_total", repr(wit.cross_total)),
        ("self_total", repr(wit.self_total)),
        ("self_to_cross", repr(wit.self_to_cross)),
        ("normalization", repr(wit.normalization)),
        ("g_value", repr(wit.g_value)),
        ("saturation", repr(wit.saturation)),
        ("corrected_constant", repr(wit.corrected_constant)),
    ])
    return 0


def _cmd_solve(args) -> int:
    fam = index_family(args.p)
    grid = _default_grid(args, args.n)
    init = make_initial_data(args.n, fam, grid)
    t_final = args.t_final if args.t_final is not None else fam.t0(args.n)
    cfg = SolverConfig(
        grid=grid,
        t_final=t_final,
        dt=args.dt if args.dt is not None else t_final / args.steps,
        save_every=args.save_every if args.save_every is not None else 2,
        h_form=args.h_form,
        use_dealias=not args.no_dealias,
    )
    traj = solve(init, cfg)
    pairs = [
        ("t_final", repr(t_final)),
        ("steps", cfg.n_steps),
        ("dt", repr(cfg.dt_actual)),
        ("samples", traj.times.size),
        ("stability_bound", repr(traj.stability_bound)),
        ("max_cfl", repr(float(traj.cfl_numbers.max()))),
        ("max_abs_h", repr(float(traj.max_abs_h.max()))),
    ]
    if traj.blow_up is not None:
        pairs.append(("blow_up", str(traj.blow_up)))
        _print_kv(pairs)
        return 3
    bp = BesovParams(s=float(2 / fam.p - 1), p=float(fam.p), r=1.0)
    pairs += [
        ("norm_u0_exact", repr(data_norm_envelope(args.n, fam))),
        ("norm_uT", repr(besov_norm(traj.final_u, bp, warn=False))),
    ]
    if traj.times.size >= 32:
        diag = remainder_diagnostics(traj, init, q=float(fam.q))
        pairs += [
            ("norm_U1_T", repr(besov_norm(diag.u1_final, bp, warn=False))),
            ("X_T", repr(diag.x_t)),
            ("Y_T", repr(diag.y_t)),
        ]
    else:
        pairs.append(("remainder_split", "skipped (needs >= 32 saved samples)"))
    if args.out is not None:
        from .checkpoint import save_trajectory

        save_trajectory(traj, args.out)
        pairs.append(("checkpoint", str(args.out)))
    _print_kv(pairs)
    return 0


def _cmd_sweep(args) -> int:
    n_list = tuple(args.n) if args.n else (args.n_range or (4, 5, 6))
    cfg = ExperimentConfig(
        p=args.p,
        n_list=tuple(sorted(set(n_list))),
        mode=args.mode,
        grid_l=args.grid_l,
        grid_n=args.grid_n,
        steps=args.steps,
        save_every=args.save_every,
        h_form=args.h_form,
        use_dealias=not args.no_dealias,
        witness_rtol=args.rtol,
        witness_panels=args.panels,
        out_dir=str(args.out),
        workers=args.workers,
    )
    report = run_sweep(cfg)
    paths = emit(report, args.out)
    print(f"[sweep] wrote {paths['csv']}, {paths['summary']}, {paths['plot']}")
    for row in report.rows:
        if row.error:
            print(f"[sweep] n={row.n} FAILED: {row.error}")
    try:
        checks = verify_bounds(report)
    except ConfigError as exc:
        print(f"[sweep] bounds not checked: {exc}")
        return 0
    for chk in checks:
        print(f"[sweep] {'PASS' if chk.passed else 'FAIL'} {chk.name}: {chk.detail}")
    return 0 if bounds_passed(checks) else 1


def _cmd_check(args) -> int:
    report = load_report(args.report)
    checks = verify_bounds(report)
    for chk in checks:
        print(f"{'PASS' if chk.passed else 'FAIL'} {chk.name}: {chk.detail}")
    if not bounds_passed(checks):
        raise CheckFailure("bound checks failed")
    return 0


def _cmd_props(args) -> int:
    from .props import run_all

    results = run_all(quick=args.quick)
    for res in results:
        print(f"{'PASS' if res.passed else 'FAIL'} {res.name}: {res.detail}")
    if not all(r.passed for r in results):
        raise CheckFailure("property suite failed")
    return 0


_COMMANDS = {
    "indices": _cmd_indices,
    "initdata": _cmd_initdata,
    "u1-witness": _cmd_witness,
    "solve": _cmd_solve,
    "sweep": _cmd_sweep,
    "check": _cmd_check,
    "props": _cmd_props,
}


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    try:
        argv = _apply_config_file(parser, argv)
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except CheckFailure as exc:
        print(f"check failure: {exc}", file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except SwilError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
