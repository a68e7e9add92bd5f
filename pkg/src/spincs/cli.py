"""Command line front end: ``spincs run | sweep | check``.

Exit codes: 0 success, 1 tolerance breach or failed check, 2 configuration
error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .checks import run_checks
from .coherent import a_coefficients
from .config import ConfigError, RunReport, ScenarioConfig, dumps, format_float
from .dynamics import CyclicCase, cyclic_path, cyclic_theta, hamiltonian_expectation, integrate_trajectory
from .errors import SpinCSError
from .phases import interference_intensity, phase_result
from .scenarios import scenario_closed_form

EXIT_OK, EXIT_TOLERANCE, EXIT_CONFIG, EXIT_NUMERICAL = 0, 1, 2, 3
TRAJECTORY_COLUMNS = ("t", "phi", "theta", "psi", "phi_dot", "theta_dot", "psi_dot", "H", "s3_expect")


def thread_count() -> int:
    """Worker threads for sweeps: SPINCS_THREADS if set, else the CPU count."""
    raw = os.environ.get("SPINCS_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def execute(cfg: ScenarioConfig):
    """Integrate (or sample) the configured path; return (report, trajectory)."""
    fid = cfg.fiducial_vector()
    field = cfg.field_protocol()
    case = cfg.model_case()
    gauge = cfg.effective_gauge()

    initial = cfg.initial if isinstance(cfg.initial, dict) else {}
    phi0, psi0 = initial.get("phi", 0.0), initial.get("psi", 0.0)
    resonant = None
    if case is not None and field.drive_omega != 0 and field.b0 != 0:
        resonant = cyclic_theta(field, case.cyclic_case)
    if "theta" in initial:
        theta0 = initial["theta"]
    elif resonant is not None:
        theta0 = resonant
    elif case is None:
        raise ConfigError("initial.theta is required for a custom fiducial")
    else:
        theta0 = cyclic_theta(field, CyclicCase(case.cyclic_case))  # raises NoCyclicSolution

    if cfg.periods is not None:
        if field.drive_omega == 0:
            raise ConfigError("'periods' needs a rotating field; give 'duration' instead")
        duration = cfg.periods * field.period
    else:
        duration = cfg.duration

    if cfg.path == "prescribed":
        if cfg.periods is None or field.drive_omega == 0:
            raise ConfigError("a prescribed path needs a rotating field and 'periods'")
        traj = cyclic_path(field, theta0, gauge, cfg.n_steps, phi0=phi0, periods=cfg.periods)
    else:
        traj = integrate_trajectory(fid, (phi0, theta0, psi0), field, gauge, duration, cfg.n_steps)

    result = phase_result(fid, traj, field)

    # the closed forms describe whole revolutions of the cyclic orbit started in
    # phase with the field, in the model system's own gauge
    closed_form = deviations = None
    whole = cfg.periods is not None and float(cfg.periods).is_integer()
    on_orbit = cfg.path == "prescribed" or (
        resonant is not None and phi0 == 0.0 and psi0 == 0.0 and abs(theta0 - resonant) < 1e-12
    )
    if case is not None and whole and on_orbit and gauge is case.gauge and field.drive_omega != 0:
        cf = scenario_closed_form(case, field, theta0)
        k = cfg.periods
        closed_form = {"gamma": k * cf.gamma, "delta": k * cf.delta}
        deviations = {"gamma": abs(result.gamma - k * cf.gamma), "delta": abs(result.delta - k * cf.delta)}
    passed = deviations is None or all(v < cfg.tolerance * field.hbar for v in deviations.values())

    report = RunReport(
        case=type(case).__name__ if case is not None else None,
        gamma=result.gamma,
        delta=result.delta,
        gamma_a0_part=result.gamma_a0_part,
        gamma_a3_part=result.gamma_a3_part,
        hbar=field.hbar,
        phase_angle=result.phase_angle,
        intensity=interference_intensity(result),
        closure_residual=traj.closure_residual,
        consistency_residual=traj.consistency_residual,
        theta0=float(theta0),
        period=field.period if field.drive_omega != 0 else None,
        closed_form=closed_form,
        deviations=deviations,
        tolerance=cfg.tolerance,
        passed=passed,
    )
    return report, traj


def trajectory_csv(cfg: ScenarioConfig, traj) -> str:
    fid = cfg.fiducial_vector()
    field = cfg.field_protocol()
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(TRAJECTORY_COLUMNS)
    a0 = a_coefficients(fid).a0
    for t, q, qd in zip(traj.times, traj.omegas, traj.omega_dots):
        a1 = float(a_coefficients(fid, q[2]).a1)
        s3 = a0 * math.cos(q[1]) - a1 * math.sin(q[1])
        H = hamiltonian_expectation(fid, q, field, t)
        writer.writerow([format_float(float(x)) for x in (t, *q, *qd, H, s3)])
    return buf.getvalue()


def _write(path, text):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def cmd_run(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    report, traj = execute(cfg)
    _write(args.report or cfg.outputs.get("report"), report.to_json())
    csv_path = args.trajectory or cfg.outputs.get("trajectory")
    if csv_path:
        _write(csv_path, trajectory_csv(cfg, traj))
    return EXIT_OK if report.passed else EXIT_TOLERANCE


def _sweep_row(cfg: ScenarioConfig, param: str, value: float):
    report, _ = execute(cfg.with_value(param, value))
    return value, report.gamma, report.delta, report.intensity


def cmd_sweep(args) -> int:
    cfg = ScenarioConfig.load(args.config)
    if args.count < 0:
        raise ConfigError("--count must be >= 0")
    cfg.with_value(args.param, args.start)  # rejects unknown parameters before any work
    values = np.linspace(args.start, args.stop, args.count) if args.count else []
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(lambda v: _sweep_row(cfg, args.param, float(v)), values))
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow([args.param, "gamma", "delta", "intensity"])
    for row in rows:
        writer.writerow([format_float(x) for x in row])
    _write(args.out, buf.getvalue())
    return EXIT_OK


def cmd_check(args) -> int:
    report = run_checks(full=args.full)
    checks = [dict(c, value=c["value"] if math.isfinite(c["value"]) else None) for c in report["checks"]]
    _write(args.out, dumps(dict(report, checks=checks)))
    return EXIT_OK if report["passed"] else EXIT_TOLERANCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spincs", description="Spin coherent states with arbitrary fiducial vectors")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="integrate one scenario and report its phases")
    run.add_argument("config")
    run.add_argument("--report", help="report path (default: outputs.report or stdout)")
    run.add_argument("--trajectory", help="trajectory CSV path (default: outputs.trajectory)")
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="scan one numeric config field")
    sweep.add_argument("config")
    sweep.add_argument("--param", required=True, help="dotted name, e.g. field.b0 or initial.theta")
    sweep.add_argument("--from", dest="start", type=float, required=True)
    sweep.add_argument("--to", dest="stop", type=float, required=True)
    sweep.add_argument("--count", type=int, required=True)
    sweep.add_argument("--out", help="CSV path (default stdout)")
    sweep.set_defaults(func=cmd_sweep)

    check = sub.add_parser("check", help="run the built-in invariant suite")
    check.add_argument("--full", action="store_true", help="run the full suite")
    check.add_argument("--out", help="JSON path (default stdout)")
    check.set_defaults(func=cmd_check)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse exits with 2 on usage errors
        return int(exc.code or 0)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"spincs: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"spincs: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SpinCSError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"spincs: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
