import argparse
import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

# Import custom modules
from barycenter import SolverConfig, barycenter, field
from complex_maps import BlaschkeProduct, prepare_rule
from config import EXIT_CODES, LOG_CONFIG, OUTPUT_CONFIG, SUITE_CONFIG
from errors import DEExtensionError, InvalidInputError, NoConvergenceError
from experiments import conjecture_scan
from extension import ExtensionEvaluator
from grids import parse_grid_spec
from measures import check_admissible
from mesh_export import image_mesh, mesh_figure, write_html, write_off
from parsers import build_complex_map, build_measure, build_sphere_map, parse_map, parse_measure, parse_points, read_text
from quadrature import make_rule
from reporting import format_summary, format_table, merge_reports, residual_summary, result_record, write_output
from suites import SUITES, run_suite
from utils import format_vector, make_rng

logger = logging.getLogger("deext")


def configure_logging(level=None):
    """
    Configures the root logger once, writing to stderr

    Args:
        level (str): Level name; falls back to LOG_CONFIG
    """
    logging.basicConfig(
        level=(level or LOG_CONFIG["level"]).upper(),
        format=LOG_CONFIG["format"],
        stream=sys.stderr,
        force=True,
    )


def solver_from_args(args):
    return SolverConfig.from_config(tol=args.tol, max_iters=args.max_iters, clamp=args.clamp, level=args.level)


def load_measure(path, level=None):
    return build_measure(parse_measure(read_text(path)), level)


def load_evaluator(path, args):
    """
    Extension evaluator for a map file on S^dim

    Chart-level maps on S^2 go through prepare_rule so that rule nodes keep
    away from essential singularities.

    Returns:
        tuple: (MapSpec, ExtensionEvaluator)
    """
    spec = parse_map(read_text(path))
    phi = build_sphere_map(spec, args.dim)
    rule = make_rule(args.dim, args.level)
    if args.dim == 2 and spec.kind in ("rational", "blaschke", "expr"):
        rule = prepare_rule(build_complex_map(spec), rule, make_rng(args.seed))
    return spec, ExtensionEvaluator(phi, rule, solver_from_args(args))


def _points(args, rng):
    if args.points:
        return parse_points(read_text(args.points), args.dim)
    if args.grid:
        return parse_grid_spec(args.grid, args.dim + 1, rng).points
    raise InvalidInputError("give --points or --grid")


def result_record_from_error(error):
    """Summary block for a failed solve: last point and field-norm history."""
    summary = {
        "point": np.asarray(error.last_point) if error.last_point is not None else "none",
        "residual": float(error.history[-1]) if error.history else float("nan"),
        "iterations": len(error.history),
        "converged": "false",
        "largest_atom": float(error.largest_atom),
    }
    return format_summary(summary)


def cmd_barycenter(args):
    """
    Solves for the barycenter of a measure file and prints the result record

    Returns:
        int: Exit code
    """
    mu = load_measure(args.measure, args.level)
    report = check_admissible(mu)
    if not report:
        print(f"inadmissible: atom {format_vector(report.offender)} carries mass {report.mass:.6f} >= 1/2")
        return EXIT_CODES["inadmissible"]
    try:
        result = barycenter(mu, solver_from_args(args))
    except NoConvergenceError as e:
        write_output(result_record_from_error(e), args.out)
        raise
    write_output(result_record(result), args.out)
    return EXIT_CODES["ok"]


def cmd_field(args):
    """V_mu at every point of a points file."""
    mu = load_measure(args.measure, args.level)
    points = parse_points(read_text(args.points), mu.dim)
    rows = []
    for w in points:
        value = field(mu, w)
        row = {f"w{i + 1}": c for i, c in enumerate(value.at)}
        row.update({f"v{i + 1}": c for i, c in enumerate(value.vector)})
        row.update({f"n{i + 1}": c for i, c in enumerate(value.normalized)})
        rows.append(row)
    write_output(format_table(pd.DataFrame(rows)), args.out)
    return EXIT_CODES["ok"]


def cmd_extend(args):
    """
    Evaluates the extension of a map file on a points file or grid spec

    Failed points keep a row with the error code; any failure makes the exit
    code nonzero.
    """
    _, ev = load_evaluator(args.map, args)
    points = _points(args, make_rng(args.seed, 1))
    table = ev.evaluate_points(points, args.workers)
    summary = residual_summary(table)
    write_output(format_table(table) + "\n" + format_summary(summary), args.out)

    failed = table.loc[table["error"] != "", "error"]
    if failed.empty:
        return EXIT_CODES["ok"]
    logger.error("%d of %d points failed: %s", len(failed), len(table), ", ".join(sorted(set(failed))))
    if set(failed) == {NoConvergenceError.code}:
        return EXIT_CODES["no_convergence"]
    return EXIT_CODES["evaluation_error"]


def cmd_check(args):
    """Runs one property suite, or all of them, and prints the check tables."""
    names = SUITE_CONFIG["suites"] if args.suite == "all" else [args.suite]
    solver = solver_from_args(args)
    reports = [run_suite(name, args.seed, args.level, solver, args.workers) for name in names]
    report = reports[0] if len(reports) == 1 else merge_reports("all suites", reports)
    write_output(report.render(), args.out)
    return EXIT_CODES["ok"] if report.passed else EXIT_CODES["check_failed"]


def cmd_conjecture(args):
    """Conjecture residual tables for a Blaschke map file; exploratory only."""
    spec = parse_map(read_text(args.map))
    f = build_complex_map(spec)
    if not isinstance(f, BlaschkeProduct):
        raise InvalidInputError("conjecture scans take a blaschke map file")
    report = conjecture_scan(f, args.level, solver_from_args(args), args.workers)
    write_output(report.render(), args.out)
    return EXIT_CODES["ok"]


def cmd_mesh(args):
    """
    Exports the image of a grid under the extension as an OFF mesh

    The grid spec defaults to an equatorial disc; --html also writes a plotly
    figure of the mesh.
    """
    spec, ev = load_evaluator(args.map, args)
    grid = parse_grid_spec(args.grid or "disc:21", args.dim + 1, make_rng(args.seed, 1))
    vertices, faces, table = image_mesh(ev, grid, args.workers)
    out = args.out or str(Path(OUTPUT_CONFIG["output_dir"]) / "mesh.off")
    write_off(vertices, faces, out)
    if args.html:
        write_html(mesh_figure(vertices, faces, spec.source), args.html)
    summary = residual_summary(table)
    summary.update(vertices=len(vertices), faces=len(faces), path=out)
    sys.stdout.write(format_summary(summary))
    return EXIT_CODES["ok"] if summary["failures"] == 0 else EXIT_CODES["evaluation_error"]


HANDLERS = {
    "barycenter": cmd_barycenter,
    "extend": cmd_extend,
    "field": cmd_field,
    "check": cmd_check,
    "conjecture": cmd_conjecture,
    "mesh": cmd_mesh,
}


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--dim", type=int, default=2, help="Sphere dimension n (1 or 2 for maps)")
    common.add_argument("--level", type=int, default=None, help="Quadrature rule level")
    common.add_argument("--tol", type=float, default=None, help="Solver tolerance on the normalized field")
    common.add_argument("--max-iters", type=int, default=None, help="Solver iteration cap")
    common.add_argument("--clamp", type=float, default=None,
                        help="Largest Newton step in recentered coordinates, in (0, 1)")
    common.add_argument("--seed", type=int, default=SUITE_CONFIG["seed"], help="Seed for randomized grids and suites")
    common.add_argument("--workers", type=int, default=OUTPUT_CONFIG["workers"], help="Threads for point evaluation")
    common.add_argument("--out", default=None, help="Output path (stdout when omitted)")
    common.add_argument("--log-level", default=None, help="Logging level (default from DEEXT_LOG_LEVEL)")

    parser = argparse.ArgumentParser(
        prog="deext",
        description="Conformal barycenters and Douady-Earle extensions of sphere maps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("barycenter", parents=[common], help="Barycenter of a measure file")
    p.add_argument("measure")

    p = sub.add_parser("field", parents=[common], help="Barycenter vector field at points")
    p.add_argument("measure")
    p.add_argument("points")

    p = sub.add_parser("extend", parents=[common], help="Extension of a map on points or a grid")
    p.add_argument("map")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--points", help="Points file")
    group.add_argument("--grid", help="Grid spec, e.g. disc:21 or radial:0,0,1:12")

    p = sub.add_parser("check", parents=[common], help="Run a property suite")
    p.add_argument("suite", choices=sorted(SUITES) + ["all"])

    p = sub.add_parser("conjecture", parents=[common], help="Conjecture scans for a Blaschke map")
    p.add_argument("map")

    p = sub.add_parser("mesh", parents=[common], help="OFF mesh of the extension image of a grid")
    p.add_argument("map")
    p.add_argument("--grid", default=None, help="disc or shell grid spec (default disc:21)")
    p.add_argument("--html", default=None, help="Also write a plotly HTML figure here")
    return parser


def main(argv=None):
    """
    Entry point of the command line

    Args:
        argv (list): Arguments without the program name

    Returns:
        int: Exit code
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_CODES["parse_error"] if e.code else EXIT_CODES["ok"]
    configure_logging(args.log_level)

    try:
        return HANDLERS[args.command](args)
    except DEExtensionError as e:
        logger.error("%s: %s", e.code, e)
        print(f"error [{e.code}]: {e}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
