"""
Structure checks and conjecture scans for lifted maps of the Riemann sphere.

Every function returns an ExperimentReport: a check table whose asserted
rows are theorems about the extension and whose recorded rows are open
conjectures, plus the raw tables behind them.

Rotation checks use angles that are multiples of pi / level, the azimuthal
spacing of the product rule, so they hold to rounding rather than to
quadrature accuracy; generic angles are recorded alongside.
"""

import logging

import numpy as np
import pandas as pd
from scipy.spatial import cKDTree

from complex_maps import BlaschkeProduct, boundary_map, cauchy_reconstruction, lift, power_map, prepare_rule
from config import EXPERIMENT_CONFIG, SUITE_CONFIG
from errors import InvalidInputError
from extension import ExtensionEvaluator, vertical_derivative_closed_form
from grids import disc_grid
from mobius import apply_mobius, axis_rotation, conjugation_reflection, geodesic_disc_transport, inverse, reflection
from quadrature import make_rule
from reporting import ExperimentReport, check_row, checks_frame
from utils import make_rng, random_ball_points, random_sphere_points

logger = logging.getLogger(__name__)

TOLERANCES = EXPERIMENT_CONFIG["tolerances"]


def make_evaluator(f, level=None, solver=None, rng=None):
    """Extension evaluator for the hat lift of f on the product rule."""
    rule = prepare_rule(f, make_rule(2, level), rng or make_rng(SUITE_CONFIG["seed"]))
    return ExtensionEvaluator(lift(f), rule, solver)


def lattice_angles(rule, count=4):
    """Rotation angles that map the product rule onto itself."""
    return np.pi * np.array([1, 3, 7, 12][:count]) / rule.level


def _values(ev, points, workers):
    table = ev.evaluate_points(points, workers)
    d = points.shape[1]
    return table, table[[f"y{i + 1}" for i in range(d)]].to_numpy()


def _failures(table):
    return int((table["error"] != "").sum())


def _chart(points):
    return points[:, 0] + 1j * points[:, 1]


def _fixes_origin(f):
    return abs(complex(f(0.0))) == 0.0


def _disc_ring(radii, angles):
    points = [[0.0, 0.0, 0.0]]
    for r in radii:
        for a in angles:
            points.append([r * np.cos(a), r * np.sin(a), 0.0])
    return np.array(points)


def conjecture_scan(f, level=None, solver=None, workers=None, evaluator=None):
    """
    Residual tables for the open statements about Blaschke lifts

    - conjecture_1: sup over the disc grid of |Phi(z) - f(z)| in the chart
    - conjecture_2: |Phi(0)| when f(0) = 0
    - conjecture_3: Phi on the axis [0, e3) when f(0) = 0, with monotonicity
      of the third coordinate and the distance to the axis

    Nothing here is asserted.
    """
    if not isinstance(f, BlaschkeProduct):
        raise InvalidInputError("conjecture scans take a Blaschke product")
    ev = evaluator or make_evaluator(f, level, solver)
    rows, tables = [], {}

    grid = disc_grid(3)
    table, images = _values(ev, grid.points, workers)
    residual = np.abs(_chart(images) - f(_chart(grid.points)))
    table["chart_residual"] = residual
    tables["disc_residuals"] = table
    rows.append(check_row("conjecture_1_sup_residual", np.nanmax(residual) if _failures(table) == 0 else np.inf,
                          0.0, "lift conjecture: lift extension agrees with f on the equatorial disc", asserted=False))

    if _fixes_origin(f):
        rows.append(check_row("conjecture_2_origin", np.linalg.norm(ev.extend_at(np.zeros(3))), 0.0,
                              "lift conjecture: extension fixes the origin when f does", asserted=False))
        t = np.linspace(0.0, 0.95, EXPERIMENT_CONFIG["axis_samples"])
        axis_points = np.outer(t, [0.0, 0.0, 1.0])
        axis_table, axis_images = _values(ev, axis_points, workers)
        axis_table["axis_distance"] = np.hypot(axis_images[:, 0], axis_images[:, 1])
        steps = np.diff(axis_images[:, 2])
        tables["axis"] = axis_table
        rows.append(check_row("conjecture_3_non_increasing_steps", np.sum(~(steps > 0.0)), 0.0,
                              "lift conjecture: extension maps [0, e3) monotonically onto itself", asserted=False))
        rows.append(check_row("conjecture_3_axis_distance", np.nanmax(axis_table["axis_distance"]), 0.0,
                              "lift conjecture: extension maps [0, e3) into the axis", asserted=False))
    else:
        rows.append(check_row("conjecture_2_origin", np.nan, 0.0, "lift conjecture: f(0) != 0, not applicable", asserted=False))

    return ExperimentReport(f"conjecture scan: {f.describe()}", checks_frame(rows), tables)


def blaschke_experiment_suite(f, level=None, solver=None, workers=None, rng=None):
    """
    Structure theorems for the extension of a Blaschke lift, plus scans

    Asserted: half-ball preservation, equatorial-disc invariance, vertical
    derivative parallel to e3 with positive component, symmetry under the
    reflection x3 -> -x3 and, for real-symmetric f, under x2 -> -x2.

    Returns:
        ExperimentReport
    """
    rng = rng or make_rng(SUITE_CONFIG["seed"], 1)
    ev = make_evaluator(f, level, solver, rng)
    rows, tables = [], {}

    probes = random_sphere_points(rng, EXPERIMENT_CONFIG["hemisphere_probes"], 3)
    probes[:, 2] = np.maximum(np.abs(probes[:, 2]), 0.05)
    probes /= np.linalg.norm(probes, axis=1, keepdims=True)
    probes *= (0.1 + 0.8 * rng.random(len(probes)))[:, None]
    upper_table, upper = _values(ev, probes, workers)
    lower_table, lower = _values(ev, probes * [1.0, 1.0, -1.0], workers)
    violations = (np.sum(~(upper[:, 2] > 0.0)) + np.sum(~(lower[:, 2] < 0.0))
                  + _failures(upper_table) + _failures(lower_table))
    rows.append(check_row("hemisphere_preservation", violations, 0,
                          "blaschke structure: Blaschke lift extensions preserve the upper and lower half-balls"))

    c = reflection(2)
    mirrored = apply_mobius(c, upper)
    rows.append(check_row("reflection_symmetry", np.nanmax(np.abs(mirrored - lower)), TOLERANCES["disc_invariance"],
                          "blaschke structure: extension commutes with the reflection x3 -> -x3"))

    grid = disc_grid(3)
    disc_table, disc_images = _values(ev, grid.points, workers)
    tables["disc"] = disc_table
    disc_value = np.nanmax(np.abs(disc_images[:, 2])) if _failures(disc_table) == 0 else np.inf
    rows.append(check_row("disc_invariance", disc_value, TOLERANCES["disc_invariance"],
                          "blaschke structure: extension maps the equatorial disc into itself"))
    targets = disc_grid(3, 11, 0.8).points
    reached = disc_images[np.all(np.isfinite(disc_images), axis=1)]
    gap = cKDTree(reached).query(targets)[0].max() if len(reached) else np.inf
    rows.append(check_row("disc_coverage_gap", gap, 0.0,
                          "blaschke structure: extension maps the equatorial disc onto itself", asserted=False))

    ring = _disc_ring((0.3, 0.6), np.pi * np.arange(4) / 2.0)[: EXPERIMENT_CONFIG["vertical_probes"]]
    records = []
    for z in ring:
        column = ev.extension_jacobian(z)[:, 2]
        records.append({"x1": z[0], "x2": z[1], "d1": column[0], "d2": column[1], "d3": column[2]})
    vertical = pd.DataFrame(records)
    tables["vertical_derivative"] = vertical
    ratio = np.hypot(vertical["d1"], vertical["d2"]) / np.abs(vertical["d3"])
    rows.append(check_row("vertical_parallel", ratio.max(), TOLERANCES["vertical_parallel"],
                          "blaschke structure: vertical derivative on the disc is a multiple of e3"))
    rows.append(check_row("vertical_positive", int(np.sum(~(vertical["d3"] > 0.0))), 0,
                          "blaschke structure: vertical derivative on the disc has positive e3 component"))
    closed = vertical_derivative_closed_form(ev.phi, ev.rule, ev.solver)
    rows.append(check_row("vertical_closed_form", abs(closed - vertical["d3"].iloc[0]), TOLERANCES["vertical_parallel"],
                          "blaschke structure: closed-form vertical derivative at the origin"))

    if f.is_real_symmetric:
        flip = conjugation_reflection(2)
        _, flipped = _values(ev, apply_mobius(flip, probes), workers)
        residual = np.nanmax(np.abs(apply_mobius(flip, upper) - flipped))
        rows.append(check_row("conjugation_symmetry", residual, TOLERANCES["equivariance"],
                              "blaschke structure: real-symmetric Blaschke lifts commute with complex conjugation"))

    scan = conjecture_scan(f, workers=workers, evaluator=ev)
    checks = pd.concat([checks_frame(rows), scan.checks], ignore_index=True)
    tables.update(scan.tables)
    return ExperimentReport(f"blaschke structure: {f.describe()}", checks, tables)


def zd_structure_check(d, level=None, solver=None, workers=None):
    """
    Structure of the extension of z -> z^d

    Asserted: Phi(0) = 0, the radial form Phi(z) = z^d h(|z|^2) with h > 0
    on the disc, h(r) tending to 1, real-axis preservation, rotation
    equivariance, and the geodesic disc D_t landing on D_{t^d}.
    """
    f = power_map(d)
    ev = make_evaluator(f, level, solver)
    angles = lattice_angles(ev.rule)
    rows, tables = [], {}

    rows.append(check_row("origin", np.linalg.norm(ev.extend_at(np.zeros(3))), TOLERANCES["origin"],
                          "z^d structure: extension of z^d fixes the origin"))

    radii = np.array(EXPERIMENT_CONFIG["radial_samples"])
    samples = np.array([[r, a] for a in np.concatenate([[0.0], angles]) for r in radii])
    z = samples[:, 0] * np.exp(1j * samples[:, 1])
    points = np.stack([z.real, z.imag, np.zeros(len(z))], axis=1)
    table, images = _values(ev, points, workers)
    quotient = _chart(images) * np.conj(z ** d) / np.abs(z) ** d
    table["radial_quotient"] = quotient.real
    table["h"] = quotient.real / samples[:, 0] ** d
    tables["radial"] = table
    form = np.nanmax(np.abs(quotient.imag) + np.abs(images[:, 2]))
    rows.append(check_row("radial_form", form, TOLERANCES["radial_form"],
                          "z^d structure: extension of z^d has the form z^d h(|z|^2) on the disc"))
    rows.append(check_row("radial_positive", int(np.sum(~(quotient.real > 0.0))), 0,
                          "z^d structure: the radial factor h is positive"))
    h = table["h"].to_numpy()[: len(radii)]
    rows.append(check_row("radial_limit_trend", abs(1.0 - h[-1]) - abs(1.0 - h[0]), 1e-12,
                          "z^d structure: the radial factor h tends to 1 at the boundary"))

    reals = np.linspace(-0.9, 0.9, 7)
    _, real_images = _values(ev, np.outer(reals, [1.0, 0.0, 0.0]), workers)
    rows.append(check_row("real_axis", np.nanmax(np.abs(real_images[:, 1:])), TOLERANCES["equivariance"],
                          "z^d structure: extension of z^d preserves the real diameter"))

    base = _disc_ring((0.25, 0.5), (0.2, 1.3, 2.9))
    _, base_images = _values(ev, base, workers)
    for label, thetas, asserted in (("rotation_equivariance", angles, True),
                                    ("rotation_equivariance_generic", (0.3, 1.1), False)):
        residual = 0.0
        for theta in thetas:
            _, rotated = _values(ev, apply_mobius(axis_rotation(theta), base), workers)
            expected = apply_mobius(axis_rotation(d * theta), base_images)
            residual = max(residual, float(np.nanmax(np.abs(rotated - expected))))
        rows.append(check_row(label, residual, TOLERANCES["equivariance"],
                              "z^d structure: extension of z^d is equivariant under rotations about e3", asserted=asserted))

    interior = _disc_ring((0.3, 0.6), np.pi * np.arange(4) / 2.0 + 0.4)
    circle = np.array([[np.cos(a), np.sin(a), 0.0] for a in np.linspace(0.0, 2.0 * np.pi, 8, endpoint=False)])
    disc_probes = np.vstack([interior, circle])
    for t in EXPERIMENT_CONFIG["geodesic_disc_ts"]:
        h_t = geodesic_disc_transport(t)
        _, landed = _values(ev, apply_mobius(h_t, disc_probes), workers)
        flattened = apply_mobius(inverse(geodesic_disc_transport(t ** d)), landed)
        rows.append(check_row(f"geodesic_disc_t={t}", np.nanmax(np.abs(flattened[:, 2])), TOLERANCES["geodesic_disc"],
                              "z^d structure: extension of z^d maps the geodesic disc D_t onto D_{t^d}"))

    return ExperimentReport(f"z^{d} structure", checks_frame(rows), tables)


def inner_recovery_check(f, level=None, probes=None, rng=None, solver=None, workers=None):
    """
    Extension of the boundary values of an inner function recovers f (n = 1)

    Also reconstructs f from the same boundary samples by the Cauchy
    integral, an oracle independent of the barycenter solver.
    """
    rule = make_rule(1, level)
    ev = ExtensionEvaluator(boundary_map(f), rule, solver)
    rng = rng or make_rng(SUITE_CONFIG["seed"], 2)
    count = probes or EXPERIMENT_CONFIG["inner_probes"]
    points = random_ball_points(rng, count, 2, EXPERIMENT_CONFIG["inner_probe_radius"])
    table, images = _values(ev, points, workers)
    z = _chart(points)
    exact = np.asarray(f(z), dtype=complex)
    table["residual_to_f"] = np.abs(_chart(images) - exact)
    tables = {"probes": table}
    tol = TOLERANCES["inner_recovery"]
    recovery = table["residual_to_f"].max() if _failures(table) == 0 else np.inf
    origin = abs(complex(*ev.extend_at(np.zeros(2))) - complex(f(0.0)))
    cauchy = np.max(np.abs(cauchy_reconstruction(f, z, rule.size) - exact))
    rows = [
        check_row("inner_recovery", recovery, tol, "inner recovery: extension of inner boundary values recovers f"),
        check_row("inner_origin", origin, tol, "inner recovery: extension of inner boundary values recovers f(0)"),
        check_row("cauchy_reconstruction", cauchy, tol, "inner recovery: boundary samples reproduce f by the Cauchy integral"),
    ]
    return ExperimentReport(f"inner recovery: {f.describe()}", checks_frame(rows), tables)
