"""Command-line front end.

Subcommands: conserved, transform, brackets, verify, orbit, sweep.  JSON
documents go to stdout with a schema_version field; orbit and sweep emit CSV.
Exit codes: 0 success/admissible, 1 verification failure, 2 usage or parse
error, 3 degenerate state, 4 inadmissible transform parameter.

Defaults may be supplied as a JSON config file via --config or the
KEPLERSYM_CONFIG environment variable; explicit flags win over the file.
"""

from __future__ import annotations

import argparse
import json
import os
import sys as _sys
from dataclasses import dataclass, field

import numpy as np

from .brackets import structure_table
from .core import ExtendedState, KeplerSystem, PhaseState, conserved_set
from .errors import (
    DegenerateStateError,
    InadmissibleTransformError,
    IntegrationError,
    KeplerError,
    UsageError,
)
from .flow import CSV_COLUMNS, integrate_orbit
from .transforms import (
    TransformResult,
    direction_lrl_transform,
    lrl_transform,
    rotate,
    time_translate,
)
from .verify import DEFAULT_TOLERANCES, SUITES, run_suites

SCHEMA_VERSION = 1
CONFIG_ENV_VAR = "KEPLERSYM_CONFIG"

EXIT_OK = 0
EXIT_VERIFY_FAIL = 1
EXIT_USAGE = 2
EXIT_DEGENERATE = 3
EXIT_INADMISSIBLE = 4


@dataclass
class RunConfig:
    kappa: float = 1.0
    tolerances: dict = field(default_factory=lambda: dict(DEFAULT_TOLERANCES))
    rk_steps: int = 10_000
    quad_panels: int = 64
    seed: int = 7
    samples: int = 200

    def validate(self) -> None:
        if self.kappa <= 0:
            raise UsageError("kappa must be positive")
        if self.samples < 1:
            raise UsageError("samples must be >= 1")
        if self.rk_steps < 1 or self.quad_panels < 1:
            raise UsageError("rk_steps and quad_panels must be >= 1")
        for name, value in self.tolerances.items():
            if not (value > 0):
                raise UsageError(f"tolerance {name!r} must be positive, got {value}")


def _load_config(path: str | None) -> RunConfig:
    cfg = RunConfig()
    path = path or os.environ.get(CONFIG_ENV_VAR)
    if not path:
        return cfg
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for key in ("kappa", "rk_steps", "quad_panels", "seed", "samples"):
        if key in data:
            setattr(cfg, key, type(getattr(cfg, key))(data[key]))
    if "tolerances" in data:
        cfg.tolerances.update({k: float(v) for k, v in data["tolerances"].items()})
    return cfg


def parse_vec3(text: str, name: str) -> np.ndarray:
    parts = text.split(",")
    if len(parts) != 3:
        raise UsageError(f"{name} must be three comma-separated numbers, got {text!r}")
    try:
        return np.array([float(p) for p in parts])
    except ValueError as exc:
        raise UsageError(f"{name}: {exc}") from exc


def _emit_json(doc: dict) -> None:
    doc = {"schema_version": SCHEMA_VERSION, **doc}
    _sys.stdout.write(json.dumps(doc, sort_keys=True, indent=2) + "\n")


def _state_from_args(args) -> ExtendedState:
    r = parse_vec3(args.r, "--r")
    v = parse_vec3(args.v, "--v")
    return ExtendedState(getattr(args, "t", 0.0) or 0.0, PhaseState(r, v))


def _simple_result(state: ExtendedState, out: ExtendedState, sys: KeplerSystem) -> TransformResult:
    c_in = conserved_set(state.state, sys)
    c_out = conserved_set(out.state, sys)
    diagnostics = {
        "r_invariance": abs(out.state.r_mag - state.state.r_mag),
        "E_invariance": abs(c_out.E - c_in.E),
        "reconstruction_residual": 0.0,
    }
    admissible = all(val <= 1e-9 for val in diagnostics.values())
    return TransformResult(out, c_out, out.t - state.t, admissible, diagnostics, ())


def cmd_conserved(args, cfg: RunConfig) -> int:
    sys = KeplerSystem(kappa=args.kappa if args.kappa is not None else cfg.kappa)
    state = _state_from_args(args)
    c = conserved_set(state.state, sys)
    _emit_json(c.as_dict())
    return EXIT_OK


def cmd_transform(args, cfg: RunConfig) -> int:
    sys = KeplerSystem(kappa=args.kappa if args.kappa is not None else cfg.kappa)
    state = _state_from_args(args)
    panels = args.quad_panels or cfg.quad_panels
    kind = args.kind
    try:
        if kind == "rotation":
            result = _simple_result(state, rotate(state, parse_vec3(args.eps, "--eps")), sys)
        elif kind == "time":
            try:
                eps = float(args.eps)
            except ValueError as exc:
                raise UsageError("--eps for a time translation is a single number") from exc
            result = _simple_result(state, time_translate(state, eps, sys), sys)
        elif kind == "lrl":
            result = lrl_transform(state, sys, parse_vec3(args.eps, "--eps"), panels)
        else:
            result = direction_lrl_transform(state, sys, parse_vec3(args.eps, "--eps"), panels)
    except InadmissibleTransformError as exc:
        doc = {
            "admissible": False,
            "error": str(exc),
            "diagnostics": {"root_argument": exc.root_argument},
        }
        _emit_json(doc)
        return EXIT_INADMISSIBLE
    _emit_json(result.as_dict())
    return EXIT_OK


def cmd_brackets(args, cfg: RunConfig) -> int:
    sys = KeplerSystem(kappa=args.kappa if args.kappa is not None else cfg.kappa)
    state = _state_from_args(args)
    report = structure_table(state.state, sys, fd_check=args.fd_check)
    _emit_json(report.as_dict())
    ok = report.max_residual <= cfg.tolerances["bracket_analytic"]
    if args.fd_check and report.max_fd_residual is not None:
        ok = ok and report.max_fd_residual <= cfg.tolerances["bracket_fd"]
    return EXIT_OK if ok else EXIT_VERIFY_FAIL


def cmd_verify(args, cfg: RunConfig) -> int:
    tolerances = dict(cfg.tolerances)
    if args.tol is not None:
        tolerances = {name: args.tol for name in tolerances}
    results = run_suites(
        args.suite,
        samples=args.samples or cfg.samples,
        seed=args.seed if args.seed is not None else cfg.seed,
        kappa=args.kappa if args.kappa is not None else cfg.kappa,
        rk_steps=args.rk_steps or cfg.rk_steps,
        quad_panels=args.quad_panels or cfg.quad_panels,
        tolerances=tolerances,
    )
    for res in results:
        _sys.stdout.write(res.line() + "\n")
    failed = [r for r in results if not r.passed]
    _sys.stdout.write(
        f"{'FAIL' if failed else 'PASS'}: {len(results) - len(failed)}/{len(results)} properties\n"
    )
    return EXIT_VERIFY_FAIL if failed else EXIT_OK


def _write_rows(fh, header: list[str], rows) -> None:
    fh.write(",".join(header) + "\n")
    for row in rows:
        fh.write(",".join(repr(float(x)) for x in row) + "\n")


def cmd_orbit(args, cfg: RunConfig) -> int:
    sys = KeplerSystem(kappa=args.kappa if args.kappa is not None else cfg.kappa)
    state = _state_from_args(args)
    traj = integrate_orbit(
        state, sys, args.tmax, tol=args.tol, max_step=args.max_step, dt_out=args.dt_out
    )
    out = open(args.out, "w") if args.out else _sys.stdout
    try:
        _write_rows(out, list(CSV_COLUMNS), traj.csv_rows(sys))
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def cmd_sweep(args, cfg: RunConfig) -> int:
    if args.grid < 1:
        raise UsageError("--grid must be >= 1")
    sys = KeplerSystem(kappa=args.kappa if args.kappa is not None else cfg.kappa)
    state = _state_from_args(args)
    axis = parse_vec3(args.eps_axis, "--eps-axis")
    axis_norm = float(np.linalg.norm(axis))
    if axis_norm == 0.0:
        raise UsageError("--eps-axis must be non-zero")
    axis = axis / axis_norm
    panels = args.quad_panels or cfg.quad_panels
    mags = np.linspace(0.0, args.eps_max, args.grid)

    def families():
        for index, mag in enumerate(mags):
            eps = mag * axis
            if mag == 0.0:
                start = state
            elif args.kind == "rotation":
                start = rotate(state, eps)
            elif args.kind == "lrl":
                start = lrl_transform(state, sys, eps, panels).out
            else:
                start = direction_lrl_transform(state, sys, eps, panels).out
            traj = integrate_orbit(start, sys, args.tmax, tol=args.tol, dt_out=args.dt_out)
            for row in traj.csv_rows(sys):
                yield [float(index), *row]

    out = open(args.out, "w") if args.out else _sys.stdout
    try:
        _write_rows(out, ["family", *CSV_COLUMNS], families())
    finally:
        if args.out:
            out.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="keplersym",
        description="Kepler-problem conserved quantities, LRL symmetry transformations, "
        "and numerical verification of their algebra.",
    )
    parser.add_argument("--config", help="JSON config file (or set KEPLERSYM_CONFIG)")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_state(p):
        p.add_argument("--r", required=True, help="position as x,y,z")
        p.add_argument("--v", required=True, help="velocity as x,y,z")
        p.add_argument("--t", type=float, default=0.0, help="initial time (default 0)")
        p.add_argument("--kappa", type=float, default=None)

    p = sub.add_parser("conserved", help="conserved quantities of a state")
    add_state(p)
    p.set_defaults(func=cmd_conserved)

    p = sub.add_parser("transform", help="apply a finite symmetry transformation")
    add_state(p)
    p.add_argument("--kind", required=True, choices=["rotation", "time", "lrl", "lrl-direction"])
    p.add_argument("--eps", required=True, help="parameter: x,y,z (a number for --kind time)")
    p.add_argument("--quad-panels", type=int, default=None)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("brackets", help="Poisson bracket structure table")
    add_state(p)
    p.add_argument("--fd-check", action="store_true", help="add a finite-difference column")
    p.set_defaults(func=cmd_brackets)

    p = sub.add_parser("verify", help="run the property suites")
    p.add_argument("--suite", default="all", choices=[*SUITES, "all"])
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--kappa", type=float, default=None)
    p.add_argument("--rk-steps", type=int, default=None)
    p.add_argument("--quad-panels", type=int, default=None)
    p.add_argument("--tol", type=float, default=None, help="override every suite tolerance")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("orbit", help="integrate an orbit and emit CSV samples")
    add_state(p)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--dt-out", type=float, default=None)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--max-step", type=float, default=None)
    p.add_argument("--out", default=None, help="output file (default stdout)")
    p.set_defaults(func=cmd_orbit)

    p = sub.add_parser("sweep", help="one orbit per grid point of the transform parameter")
    add_state(p)
    p.add_argument("--kind", required=True, choices=["rotation", "lrl", "lrl-direction"])
    p.add_argument("--eps-axis", required=True, help="parameter direction as x,y,z")
    p.add_argument("--eps-max", type=float, required=True)
    p.add_argument("--grid", type=int, required=True, help="number of grid points")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--dt-out", type=float, default=0.01)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--quad-panels", type=int, default=None)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _load_config(args.config)
        cfg.validate()
        return args.func(args, cfg)
    except BrokenPipeError:
        try:
            _sys.stdout.close()
        except OSError:
            pass
        return EXIT_OK
    except UsageError as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE
    except InadmissibleTransformError as exc:
        _sys.stderr.write(f"inadmissible: {exc}\n")
        return EXIT_INADMISSIBLE
    except (DegenerateStateError, IntegrationError) as exc:
        _sys.stderr.write(f"degenerate state: {exc}\n")
        return EXIT_DEGENERATE
    except KeplerError as exc:
        _sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
