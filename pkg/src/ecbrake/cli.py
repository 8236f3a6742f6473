"""Command-line front end.

Exit statuses: 0 success, 2 validation errors, 3 numerical errors, 4 I/O
errors.
"""
from __future__ import annotations

import argparse
import contextlib
import json
import sys
from pathlib import Path

from . import export
from .config import RunConfig, load_config, parse_quantity
from .errors import EcbError
from .model import OperatingPoint, SpeedConvention, TorqueModel, dissipated_power, torque
from .oracle import oracle_report, refinement_study
from .regulations import requirement_report
from .search import CalibrationReference, calibrate_lambda, model_fingerprint, rank_solutions, run_sweep

ORACLE_GATE = 1e-6


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    default = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    parser.add_argument("--config", type=Path, default=default(None), help="TOML run configuration")
    parser.add_argument("--out", type=Path, default=default(None), help="write output to this file")
    parser.add_argument("--verbose", action="store_true", default=default(False),
                        help="echo every effective parameter with its provenance")
    parser.add_argument("--speed-convention", choices=[c.value for c in SpeedConvention], default=default(None),
                        help="how slip speed enters the diffusion eigenvalue")
    parser.add_argument("--lambda", dest="lambda_scale", type=float, default=default(None),
                        help="torque scale factor (overrides config and calibration)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ecbrake", description="Axial-flux PM eddy-current brake design tool")
    _global_flags(parser, suppress=False)
    shared = argparse.ArgumentParser(add_help=False)
    _global_flags(shared, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("torque", parents=[shared], help="evaluate the braking torque at one slip speed")
    p.add_argument("speed", help="slip speed, rpm by default or with a unit (e.g. '100 rad/s')")

    p = sub.add_parser("sweep", parents=[shared], help="torque over the (b, w_m, speed) grid as CSV")
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("rank", parents=[shared], help="rank grid cells against the per-wheel target")
    p.add_argument("--target", type=float, default=None, help="target torque in N*m")
    p.add_argument("--feasible-only", action="store_true")
    p.add_argument("--top", type=int, default=10)
    p.add_argument("--workers", type=int, default=1)

    sub.add_parser("calibrate", parents=[shared], help="fit the torque scale factor to the published designs")

    p = sub.add_parser("oracle-check", parents=[shared], help="compare closed-form and finite-difference reflection")
    p.add_argument("--mesh", type=int, default=None, help="cells per layer (default from config)")

    sub.add_parser("requirement", parents=[shared], help="regulation-derived torque requirement")
    return parser


def _speed_rpm(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        return parse_quantity(text, "speed", "speed")


def _calibration_dir(cfg: RunConfig, args) -> Path:
    if args.out is not None:
        return args.out.resolve().parent
    if cfg.source is not None:
        return cfg.source.resolve().parent
    return Path.cwd()


def _calibrate(cfg: RunConfig, args):
    template = cfg.model().with_lambda(1.0)
    reference = cfg.calibration or CalibrationReference()
    path = export.sidecar_path(_calibration_dir(cfg, args), model_fingerprint(template))
    if path.exists():
        with contextlib.suppress(Exception):
            stored = export.load_calibration(path)
            if stored.reference == reference and stored.model_fingerprint == model_fingerprint(template):
                return stored
    return calibrate_lambda(template, reference)


def resolve_model(cfg: RunConfig, args) -> tuple[TorqueModel, SpeedConvention]:
    """Apply scale factor and speed convention precedence: flags, config, calibration."""
    convention = SpeedConvention(args.speed_convention) if args.speed_convention else None
    if convention is None and cfg.is_user("model", "speed_convention"):
        convention = cfg.speed_convention
    model = cfg.model()
    if args.lambda_scale is not None:
        return model.with_lambda(args.lambda_scale), convention or cfg.speed_convention
    if cfg.calibration is not None and not cfg.is_user("model", "lambda"):
        result = _calibrate(cfg, args)
        return model.calibrated(result, convention), convention or result.convention_used
    return model, convention or cfg.speed_convention


@contextlib.contextmanager
def _output(args):
    if args.out is None:
        yield sys.stdout
    else:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            yield fh


def cmd_torque(cfg, args) -> int:
    model, convention = resolve_model(cfg, args)
    op = OperatingPoint(_speed_rpm(args.speed), convention)
    value = torque(model, op)
    record = {
        "speed_rpm": op.slip_speed,
        "torque_Nm": value,
        "power_W": float(dissipated_power(value, op)),
        "lambda": model.lambda_scale,
        "speed_convention": convention.value,
        "calibration": model.calibration_label,
        "b_m": model.geometry.magnet_thickness,
        "w_m_m": model.geometry.w_m,
    }
    with _output(args) as out:
        out.write(f"torque = {value:.6f} N*m at {op.slip_speed:g} rpm ({model.calibration_label}, "
                  f"{convention.value}, lambda={model.lambda_scale:.6g})\n")
        out.write(json.dumps(record) + "\n")
    return 0


def cmd_sweep(cfg, args) -> int:
    model, convention = resolve_model(cfg, args)
    result = run_sweep(model, cfg.grid, convention, workers=args.workers)
    with _output(args) as out:
        export.write_sweep_csv(result, out)
    return 0


def cmd_rank(cfg, args) -> int:
    model, convention = resolve_model(cfg, args)
    target = args.target if args.target is not None else cfg.requirement.per_wheel_torque
    result = run_sweep(model, cfg.grid, convention, workers=args.workers)
    solutions = rank_solutions(result, target, args.feasible_only)
    with _output(args) as out:
        out.write(f"# target={target:g} N*m convention={convention.value} lambda={model.lambda_scale:.6g} "
                  f"({model.calibration_label}) feasible_only={args.feasible_only}\n")
        for line in export.format_rankings(solutions, result.speeds_rpm, args.top):
            out.write(line + "\n")
    return 0


def cmd_calibrate(cfg, args) -> int:
    template = cfg.model().with_lambda(1.0)
    reference = cfg.calibration or CalibrationReference()
    result = calibrate_lambda(template, reference)
    path = export.save_calibration(result, _calibration_dir(cfg, args))
    with _output(args) as out:
        for line in export.format_calibration(result):
            out.write(line + "\n")
        out.write(f"sidecar: {path}\n")
    return 0


def cmd_oracle_check(cfg, args) -> int:
    model, convention = resolve_model(cfg, args)
    o = cfg.values["oracle"]
    mesh = args.mesh if args.mesh is not None else o["mesh"]
    records = oracle_report(model, o["n"], o["k"], o["speeds"], mesh, convention)
    worst = max(r.rel_error for r in records)
    probe = max(o["speeds"])
    study = refinement_study(1, 1, model, OperatingPoint(probe, convention), [mesh, 2 * mesh, 4 * mesh])
    passed = worst < ORACLE_GATE
    with _output(args) as out:
        for r in records:
            out.write(r.format() + "\n")
        for m, e in study.rows():
            out.write(f"refinement n=1 k=1 speed_rpm={probe:g} mesh={m} error={e:.3e}\n")
        out.write(f"observed_order={study.order:.3f}\n")
        out.write(f"max_rel_error={worst:.3e} gate={ORACLE_GATE:g} {'PASS' if passed else 'FAIL'}\n")
    return 0 if passed else 3


def cmd_requirement(cfg, args) -> int:
    report = requirement_report(cfg.vehicle, cfg.requirement)
    with _output(args) as out:
        for line in report.lines():
            out.write(line + "\n")
    return 0


COMMANDS = {
    "torque": cmd_torque,
    "sweep": cmd_sweep,
    "rank": cmd_rank,
    "calibrate": cmd_calibrate,
    "oracle-check": cmd_oracle_check,
    "requirement": cmd_requirement,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.verbose:
            for line in cfg.echo():
                print(line, file=sys.stderr)
        return COMMANDS[args.command](cfg, args)
    except EcbError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_status
    except OSError as exc:
        print(f"error: IO_ERROR: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
