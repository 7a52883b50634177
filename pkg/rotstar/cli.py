"""Command line front end: ``rotstar <command> [options]``.

Exit codes: 0 success, 1 usage or I/O error, 2 invalid parameter, 3 no finite zero,
4 iteration not contracting, 5 iteration budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional, Sequence, TextIO

import numpy as np

from rotstar.config import SolverConfig
from rotstar.exceptions import NoFiniteZero, RotStarError
from rotstar.fixed_point import DistortedSolution, perturbation_norm, solve_distorted
from rotstar.lane_emden import (
    KOVETZ_TABLE,
    KOVETZ_TABLE_TOLERANCE,
    LaneEmdenProfile,
    eval_dtheta,
    eval_theta,
    kovetz_analytic_bound,
    kovetz_sup,
    kovetz_sup_unbounded,
    solve_lane_emden,
)
from rotstar.perturbation import FirstOrderField, frak_h, sigma_first_order
from rotstar.snapshot import SolutionSnapshot, load_snapshot, rebuild_solution, save_snapshot
from rotstar.surface import SurfaceProfile, surface_profile
from rotstar.utils.helper import format_float, format_row
from rotstar.validation import print_results, run_suite

LOGGER = logging.getLogger("rotstar")

KOVETZ_R_MAX: float = 1000.0
KOVETZ_LIMIT: float = 6.0
DEFAULT_NU_LIST: str = "1,2,2.5,3,4,5"
LOG_FORMAT: str = "%(asctime)s %(levelname)s %(name)s: %(message)s"


class UsageError(RotStarError):
    """Malformed command line."""

    exit_code = 1


class RotStarArgumentParser(argparse.ArgumentParser):
    """Argument parser that reports usage errors through :class:`UsageError`."""

    def error(self, message: str) -> None:  # type: ignore[override]
        """Raise instead of exiting with argparse's own status."""
        raise UsageError(f"{self.prog}: {message}")


def _nu_list(text: str) -> list[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as error:
        raise argparse.ArgumentTypeError(f"invalid index list {text!r}") from error


def _add_grid_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=Path, help="JSON configuration file with SolverConfig field names")
    parser.add_argument("--panels", type=int, help="radial panels inside xi1 (half as many, at least 1, outside)")
    parser.add_argument("--nodes", type=int, help="Gauss nodes per radial panel")
    parser.add_argument("--jmax", type=int, help="even Legendre cutoff")
    parser.add_argument("--angular-order", type=int, help="even Gauss order in zeta")
    parser.add_argument("--fp-tol", type=float, help="fixed-point stopping tolerance")
    parser.add_argument("--max-iter", type=int, help="fixed-point iteration budget")
    parser.add_argument("--r0-factor", type=float, help="outer radius R0 as a multiple of xi1")
    parser.add_argument("--tol", type=float, help="Lane-Emden integration tolerance")


def build_parser() -> RotStarArgumentParser:
    """Parser with one sub-command per computation."""
    parser = RotStarArgumentParser(prog="rotstar", description="Distorted Lane-Emden functions of rotating polytropes.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=RotStarArgumentParser)

    lane = commands.add_parser("lane-emden", help="tabulate theta and dtheta/dr")
    lane.add_argument("--nu", type=float, required=True, help="polytropic index")
    lane.add_argument("--samples", type=int, default=200, help="number of radii on [0, R0]")
    lane.add_argument("--tol", type=float, default=1e-12, help="integration tolerance")
    lane.add_argument("--r0-factor", type=float, default=2.0, help="R0 as a multiple of xi1")
    lane.add_argument("--r-max", type=float, default=100.0, help="radius searched for the first zero")
    lane.add_argument("-o", "--output", type=Path, help="CSV file, stdout by default")
    lane.set_defaults(handler=cmd_lane_emden)

    kovetz = commands.add_parser("kovetz", help="sup of nu theta^(nu-1) r^2 per index")
    kovetz.add_argument("--nu-list", type=_nu_list, default=_nu_list(DEFAULT_NU_LIST), help="comma separated indices")
    kovetz.add_argument("--r-max", type=float, default=KOVETZ_R_MAX, help="radius searched for the first zero")
    kovetz.add_argument("-o", "--output", type=Path, help="CSV file, stdout by default")
    kovetz.set_defaults(handler=cmd_kovetz)

    solve = commands.add_parser("solve", help="solve for the distorted function")
    solve.add_argument("--nu", type=float, required=True, help="polytropic index")
    solve.add_argument("--eps", type=float, required=True, help="rotation parameter 2 Omega^2")
    _add_grid_flags(solve)
    solve.add_argument("-o", "--output", type=Path, help="snapshot JSON file")
    solve.set_defaults(handler=cmd_solve)

    surface = commands.add_parser("surface", help="surface, slopes and normal derivatives of a snapshot")
    surface.add_argument("snapshot", type=Path, help="snapshot written by `solve`")
    surface.add_argument("--zeta-samples", type=int, default=17, help="Chebyshev samples of [0, 1]")
    surface.add_argument("-o", "--output", type=Path, help="CSV file, stdout by default")
    surface.set_defaults(handler=cmd_surface)

    chandra = commands.add_parser("chandrasekhar", help="first-order rotational response")
    chandra.add_argument("--nu", type=float, required=True, help="polytropic index")
    chandra.add_argument("--samples", type=int, default=50, help="number of radii on [0, xi1]")
    chandra.add_argument("--tol", type=float, default=1e-12, help="Lane-Emden integration tolerance")
    chandra.add_argument("-o", "--output", type=Path, help="JSON file, stdout by default")
    chandra.set_defaults(handler=cmd_chandrasekhar)

    validate = commands.add_parser("validate", help="run the property suite")
    validate.add_argument("--nu", type=float, default=3.0, help="index of the solver checks")
    _add_grid_flags(validate)
    validate.add_argument("--quick", action="store_true", help="skip the direct-quadrature cross-check")
    validate.set_defaults(handler=cmd_validate)
    return parser


def config_from_args(args: argparse.Namespace) -> SolverConfig:
    """Layer defaults, the ``--config`` file and explicit flags.

    Args:
        args (argparse.Namespace): Parsed arguments of ``solve`` or ``validate``.

    Returns:
        SolverConfig: The validated configuration.
    """
    panels: Optional[int] = args.panels
    overrides: dict[str, Any] = {
        "nu": args.nu,
        "panels_inner": panels,
        "panels_outer": None if panels is None else max(1, panels // 2),
        "nodes_per_panel": args.nodes,
        "j_max": args.jmax,
        "angular_order": args.angular_order,
        "fp_tol": args.fp_tol,
        "max_iter": args.max_iter,
        "r0_factor": args.r0_factor,
        "le_tol": args.tol,
    }
    if args.config is not None:
        return SolverConfig.from_json_file(args.config, **overrides)
    return SolverConfig.from_mapping({}, **overrides)


def _write_text(text: str, output: Optional[Path], stdout: Optional[TextIO]) -> None:
    if output is None:
        (stdout or sys.stdout).write(text)
        return
    try:
        output.write_text(text, encoding="utf-8")
    except OSError as error:
        raise UsageError(f"cannot write {output}: {error}") from error


def _csv_text(header: Sequence[str], rows: Sequence[Sequence[Any]], footer: Sequence[str] = ()) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(format_row(row))
    for line in footer:
        buffer.write(f"# {line}\n")
    return buffer.getvalue()


def cmd_lane_emden(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """Tabulate ``r, theta, dtheta`` on ``[0, R0]`` with ``xi1``, ``mu1`` and ``m_bar`` in the footer."""
    profile: LaneEmdenProfile = solve_lane_emden(args.nu, tol=args.tol, r_max=args.r_max, logger=LOGGER)
    radii: np.ndarray = np.linspace(0.0, args.r0_factor * profile.xi1, args.samples)
    theta = np.asarray(eval_theta(profile, radii))
    dtheta = np.asarray(eval_dtheta(profile, radii))
    m_bar, _ = kovetz_sup(profile)
    footer: list[str] = [
        f"xi1={format_float(profile.xi1)},mu1={format_float(profile.mu1)},m_bar={format_float(m_bar)}"
    ]
    text: str = _csv_text(["r", "theta", "dtheta"], list(zip(radii, theta, dtheta)), footer)
    _write_text(text, args.output, stdout)
    return 0


def _kovetz_row(nu: float, r_max: float) -> list[Any]:
    try:
        profile: LaneEmdenProfile = solve_lane_emden(nu, r_max=r_max, logger=LOGGER)
        m_bar, r_star = kovetz_sup(profile)
        note: str = ""
        if nu > 1.0 and m_bar > kovetz_analytic_bound(nu):
            note = "exceeds analytic bound"
    except NoFiniteZero:
        m_bar, r_star = kovetz_sup_unbounded(nu, r_max=r_max)
        note = f"no finite zero; sup over [0, {r_max:g}]"
        if nu == 5.0:
            note += "; closed form 15/4"
    except RotStarError as error:
        return [nu, "nan", "nan", False, f"error: {error}", ""]
    published: Optional[float] = KOVETZ_TABLE.get(nu)
    if published is not None and abs(m_bar - published) > KOVETZ_TABLE_TOLERANCE:
        note = "; ".join(part for part in (note, f"differs from Kovetz table value {published:g}") if part)
    return [nu, m_bar, r_star, bool(m_bar < KOVETZ_LIMIT), "ok", note]


def cmd_kovetz(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """One CSV row ``nu, m_bar, r1, below_6, status, note`` per index."""
    rows: list[list[Any]] = [_kovetz_row(nu, args.r_max) for nu in args.nu_list]
    _write_text(_csv_text(["nu", "m_bar", "r1", "below_6", "status", "note"], rows), args.output, stdout)
    return 0


def cmd_solve(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """Solve, write the snapshot and print a ``key=value`` summary."""
    config: SolverConfig = config_from_args(args)
    sol: DistortedSolution = solve_distorted(config, args.eps, logger=LOGGER)
    if args.output is not None:
        save_snapshot(SolutionSnapshot.from_solution(sol), args.output, logger=LOGGER)
    out: TextIO = stdout or sys.stdout
    out.write(f"iterations={sol.report.iterations}\n")
    out.write(f"residual={format_float(sol.report.residual)}\n")
    out.write(f"theta_deviation={format_float(perturbation_norm(sol))}\n")
    return 0


def cmd_surface(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """Tabulate ``zeta, Xi1, dXi1/dzeta, dTheta/dN`` of a snapshot with ``sigma`` in the footer."""
    snapshot: SolutionSnapshot = load_snapshot(args.snapshot, logger=LOGGER)
    sol: DistortedSolution = rebuild_solution(snapshot, logger=LOGGER)
    profile: SurfaceProfile = surface_profile(sol, args.zeta_samples, logger=LOGGER)
    rows = list(zip(profile.zeta_samples, profile.xi1_values, profile.dxi1_dzeta, profile.normal_derivs))
    text: str = _csv_text(["zeta", "xi1", "dxi1_dzeta", "dtheta_dn"], rows, [f"sigma={format_float(profile.sigma)}"])
    _write_text(text, args.output, stdout)
    return 0


def cmd_chandrasekhar(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """First-order fields ``h0``, ``psi2`` and the constants ``A2``, ``C2``, ``sigma1`` as JSON."""
    profile: LaneEmdenProfile = solve_lane_emden(args.nu, tol=args.tol, logger=LOGGER)
    field: FirstOrderField = frak_h(profile, logger=LOGGER)
    radii: np.ndarray = np.linspace(0.0, profile.xi1, args.samples)
    document: dict[str, Any] = {
        "nu": profile.nu,
        "xi1": profile.xi1,
        "mu1": profile.mu1,
        "r": radii.tolist(),
        "h0": np.asarray(field.h0.value(radii)).tolist(),
        "psi2": np.asarray(field.psi2.value(radii)).tolist(),
        "A2": field.a2,
        "C2": field.matching.c2,
        "sigma1": sigma_first_order(profile, field),
    }
    _write_text(json.dumps(document, sort_keys=True, indent=2) + "\n", args.output, stdout)
    return 0


def cmd_validate(args: argparse.Namespace, stdout: Optional[TextIO] = None) -> int:
    """Run the property suite; exit 0 only when every property passes."""
    config: SolverConfig = config_from_args(args)
    results = run_suite(config, quick=args.quick, logger=LOGGER)
    print_results(results, stdout or sys.stdout)
    return 0 if all(result.passed for result in results) else 1


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Entry point of the ``rotstar`` console script.

    Args:
        argv (Optional[Sequence[str]]): Arguments without the program name; ``sys.argv[1:]`` by default.

    Returns:
        int: Process exit code.
    """
    parser: RotStarArgumentParser = build_parser()
    try:
        args: argparse.Namespace = parser.parse_args(argv)
    except UsageError as error:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"error: {error}\n")
        return error.exit_code
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr, format=LOG_FORMAT)
    handler: Callable[[argparse.Namespace], int] = args.handler
    try:
        return handler(args)
    except RotStarError as error:
        sys.stderr.write(f"error: {error}\n")
        return error.exit_code


if __name__ == "__main__":
    sys.exit(main())
