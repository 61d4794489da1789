"""
Property suites run by `app.py check <suite>`.

Each suite draws its random inputs from its own Philox stream of the
configured seed, so reports are reproducible and independent of the order
suites run in. `level` sets the S^2 rule; S^1 checks keep their default.
"""

import logging

import numpy as np
import pandas as pd

from barycenter import (
    SolverConfig,
    barycenter,
    direction_bound_check,
    douady_earle_bound_check,
    field,
    field_jacobian_at_zero,
    flow_barycenter,
    inward_radius_probe,
    multistart_barycenter,
    recentering_residual,
)
from complex_maps import BlaschkeProduct, lift, power_map
from config import SUITE_CONFIG
from errors import InvalidInputError
from experiments import blaschke_experiment_suite, inner_recovery_check, zd_structure_check
from extension import ExtensionEvaluator
from measures import (
    SphereMeasure,
    conjugated_map,
    density_measure,
    harmonic_density,
    harmonic_measure,
    hemisphere_swap_map,
    identity_map,
    mobius_boundary_map,
    push_forward,
    pushforward_functional,
    recentered_measure,
    uniform_measure,
)
from mobius import MobiusMap, apply_mobius, inverse, mobius_differential, random_mobius
from quadrature import make_rule
from reporting import ExperimentReport, check_row, checks_frame, merge_reports
from utils import make_rng, random_atom_masses, random_ball_points, random_sphere_points

logger = logging.getLogger(__name__)

_STREAMS = {"naturality": 11, "barycenter": 12, "extension": 13, "blaschke": 14, "inner": 15, "jacobian": 16}


def random_measure(rng, rule, atoms=3, atom_mass=0.3):
    """Atoms plus a harmonic-kernel density on the rule; every atom below 1/2."""
    d = rule.dim + 1
    points = random_sphere_points(rng, atoms, d)
    masses = random_atom_masses(rng, atoms) * atom_mass
    centre = random_ball_points(rng, 1, d, 0.6)[0]
    return density_measure(rule, harmonic_density(centre, rule.nodes), points, masses)


def random_atomic_measure(rng, dim, atoms=5):
    return SphereMeasure(random_sphere_points(rng, atoms, dim + 1), random_atom_masses(rng, atoms))


def random_blaschke(rng, degree, max_radius=0.6):
    radii = max_radius * np.sqrt(rng.random(degree))
    zeros = radii * np.exp(2j * np.pi * rng.random(degree))
    return BlaschkeProduct(np.exp(2j * np.pi * rng.random()), zeros)


def _cap_points(rng, count, axis_angle):
    """Points of S^2 within the given angle of e1."""
    theta = axis_angle * rng.random(count)
    azimuth = 2.0 * np.pi * rng.random(count)
    return np.stack([np.cos(theta), np.sin(theta) * np.cos(azimuth), np.sin(theta) * np.sin(azimuth)], axis=1)


def _concentrated_measure(rng, axis_angle, threshold):
    inside = threshold + (1.0 - threshold) * rng.random()
    points = [_cap_points(rng, 3, axis_angle)]
    masses = [rng.dirichlet(np.ones(3)) * inside]
    if inside < 1.0:
        points.append(random_sphere_points(rng, 3, 3))
        masses.append(rng.dirichlet(np.ones(3)) * (1.0 - inside))
    return SphereMeasure(np.vstack(points), np.concatenate(masses))


def naturality_suite(rng, level=None, solver=None, workers=None):
    """Naturality of the field and of the barycenter on mixed measures."""
    rule = make_rule(2, level)
    barycenter_gap, field_gap = 0.0, 0.0
    for _ in range(SUITE_CONFIG["naturality_pairs"]):
        g = random_mobius(rng, 2, allow_reflection=True)
        mu = random_measure(rng, rule)
        moved = push_forward(mu, g)
        expected = apply_mobius(g, barycenter(mu, solver).point)
        barycenter_gap = max(barycenter_gap, np.linalg.norm(barycenter(moved, solver).point - expected))

        w = random_ball_points(rng, 1, 3, 0.8)[0]
        transported = mobius_differential(g, w) @ field(mu, w).vector
        field_gap = max(field_gap, np.linalg.norm(field(moved, apply_mobius(g, w)).vector - transported))

    rows = [
        check_row("barycenter_naturality", barycenter_gap, 1e-8, "naturality: B(g_* mu) = g(B(mu)) for Mobius g"),
        check_row("field_naturality", field_gap, 1e-9, "naturality: V_{g_* mu}(g(w)) = D_w g(V_mu(w))"),
    ]
    return ExperimentReport("naturality", checks_frame(rows))


def barycenter_suite(rng, level=None, solver=None, workers=None):
    """Normalization, harmonic recovery, uniqueness, stability and the lemmas at the origin."""
    cfg = solver or SolverConfig.from_config()
    rule = make_rule(2, level)
    rows = []

    for n, rule_n in ((1, make_rule(1)), (2, rule)):
        result = barycenter(uniform_measure(rule_n), cfg)
        rows.append(check_row(f"uniform_origin_n={n}", np.linalg.norm(result.point), cfg.tol,
                              "normalization: the uniform measure has barycenter 0"))

    uniform = uniform_measure(rule)
    gap = 0.0
    for w in random_ball_points(rng, SUITE_CONFIG["barycenter_samples"], 3, 0.9):
        harmonic = push_forward(uniform, MobiusMap.translation(w))
        gap = max(gap, np.linalg.norm(barycenter(harmonic, cfg).point - w))
    rows.append(check_row("harmonic_recovery", gap, 1e-9, "harmonic recovery: the harmonic measure eta_w has barycenter w"))

    kernel_gap = 0.0
    form_gap = 0.0
    for w in random_ball_points(rng, 5, 3, 0.5):
        kernel = harmonic_measure(w, rule)
        kernel_gap = max(kernel_gap, np.linalg.norm(barycenter(kernel, cfg).point - w))
        pullback = pushforward_functional(identity_map(2), w, lambda p: p, rule)
        form_gap = max(form_gap, np.linalg.norm(rule.integrate(kernel.density[:, None] * rule.nodes) - pullback))
    rows.append(check_row("harmonic_kernel_form", kernel_gap, 1e-9,
                          "harmonic recovery: kernel-form harmonic measure has barycenter w", asserted=False))
    rows.append(check_row("pullback_kernel_agreement", form_gap, 1e-10,
                          "harmonic recovery: first moment of eta_w agrees in kernel and pullback form", asserted=False))

    spread = 0.0
    for _ in range(3):
        result = multistart_barycenter(random_measure(rng, rule), SUITE_CONFIG["multistarts"], rng, cfg)
        spread = max(spread, result.spread)
    rows.append(check_row("uniqueness", spread, 1e-8, "uniqueness and stability: the field has a unique zero in the ball"))

    largest, recentering = -np.inf, 0.0
    for _ in range(SUITE_CONFIG["stability_measures"]):
        mu = random_atomic_measure(rng, 2)
        result = barycenter(mu, cfg)
        eigenvalues = np.linalg.eigvalsh(field_jacobian_at_zero(recentered_measure(mu, result.point)))
        largest = max(largest, eigenvalues.max())
        recentering = max(recentering, recentering_residual(mu, result))
    rows.append(check_row("stability", largest, -1e-12, "uniqueness and stability: the barycenter is a stable zero of the field"))
    rows.append(check_row("recentering", recentering, 2.0 * cfg.tol, "normalization: B(mu) = 0 iff the mean of mu vanishes"))

    axes = np.eye(3)
    centred = SphereMeasure(np.vstack([axes[:2], -axes[:2]]), np.full(4, 0.25))
    misclassified = int(np.linalg.norm(barycenter(centred, cfg).point) > cfg.tol)
    for _ in range(10):
        mu = random_atomic_measure(rng, 2)
        mean = np.linalg.norm(mu.atom_masses @ mu.atom_points)
        misclassified += int((np.linalg.norm(barycenter(mu, cfg).point) > cfg.tol) != (mean > cfg.tol))
    rows.append(check_row("normalization", misclassified, 0, "normalization: B(mu) = 0 iff the mean of mu vanishes"))

    flow_gap = 0.0
    for _ in range(SUITE_CONFIG["flow_measures"]):
        mu = random_atomic_measure(rng, 2)
        flow_gap = max(flow_gap, np.linalg.norm(barycenter(mu, cfg).point - flow_barycenter(mu).point))
    rows.append(check_row("flow_oracle", flow_gap, 1e-9, "uniqueness and stability: Newton and gradient-flow solutions agree"))

    chordal_failures = 0
    for _ in range(SUITE_CONFIG["direction_measures"]):
        delta = 0.2 + 1.15 * rng.random()
        angle = 0.999 * np.arccos(1.0 - 0.5 * delta * delta)
        mu = _concentrated_measure(rng, angle, 0.5 * (1.0 + 0.5 * delta * delta))
        check = direction_bound_check(mu, delta)
        chordal_failures += int(not (check.hypothesis and check.inner_product > 0.0))
    rows.append(check_row("direction_bound_chordal", chordal_failures, 0,
                          "direction bound: mass (1 + delta^2/2)/2 in a chordal delta-ball tilts V(0) towards it"))

    geodesic_failures = 0
    for _ in range(SUITE_CONFIG["direction_measures"] // 10):
        mu = _concentrated_measure(rng, 0.999 * np.pi / 4.0, 2.0 / 3.0)
        check = douady_earle_bound_check(mu)
        geodesic_failures += int(not (check.hypothesis and check.inner_product > 0.0))
    rows.append(check_row("direction_bound_geodesic", geodesic_failures, 0,
                          "direction bound: mass 2/3 within angle pi/4 tilts V(0) towards it"))

    coarse = make_rule(2, 16)
    probes = [inward_radius_probe(uniform_measure(coarse), 20, rng),
              inward_radius_probe(harmonic_measure([0.5, 0.0, 0.0], coarse), 20, rng)]
    rows.append(check_row("inward_radius", sum(not p.found for p in probes), 0,
                          "existence: the field points inwards near the sphere"))

    return ExperimentReport("barycenter", checks_frame(rows))


def extension_suite(rng, level=None, solver=None, workers=None):
    """Identity and Poincare recovery, conformal naturality, resolution and continuity."""
    rule = make_rule(2, level)
    rows, tables = [], {}

    identity_ev = ExtensionEvaluator(identity_map(2), rule, solver)
    probes = random_ball_points(rng, SUITE_CONFIG["identity_probes"], 3, 0.9)
    values = identity_ev.evaluate_points(probes, workers)[["y1", "y2", "y3"]].to_numpy()
    rows.append(check_row("identity_recovery", np.nanmax(np.abs(values - probes)), 1e-9,
                          "poincare recovery: the extension of the identity is the identity"))

    poincare_gap, outside = 0.0, 0
    for _ in range(SUITE_CONFIG["extension_probes"]):
        g = random_mobius(rng, 2)
        ev = ExtensionEvaluator(mobius_boundary_map(g), rule, solver)
        points = random_ball_points(rng, SUITE_CONFIG["extension_points"], 3, 0.9)
        images = ev.evaluate_points(points, workers)[["y1", "y2", "y3"]].to_numpy()
        poincare_gap = max(poincare_gap, np.nanmax(np.abs(images - apply_mobius(g, points))))
        outside += int(np.sum(~(np.linalg.norm(images, axis=1) < 1.0)))
    rows.append(check_row("poincare_recovery", poincare_gap, 1e-8,
                          "poincare recovery: the extension of a Mobius boundary map is its Poincare extension"))

    square = lift(power_map(2))
    square_ev = ExtensionEvaluator(square, rule, solver)
    naturality_gap = 0.0
    for _ in range(SUITE_CONFIG["extension_probes"]):
        g, h = random_mobius(rng, 2, 0.3), random_mobius(rng, 2, 0.3)
        conjugated = ExtensionEvaluator(conjugated_map(g, square, h), rule, solver)
        points = random_ball_points(rng, SUITE_CONFIG["extension_probes"], 3, 0.3)
        lhs = conjugated.evaluate_points(points, workers)[["y1", "y2", "y3"]].to_numpy()
        pulled = apply_mobius(inverse(h), points)
        inner = square_ev.evaluate_points(pulled, workers)[["y1", "y2", "y3"]].to_numpy()
        naturality_gap = max(naturality_gap, np.nanmax(np.abs(lhs - apply_mobius(g, inner))))
        outside += int(np.sum(~(np.linalg.norm(lhs, axis=1) < 1.0)))
    rows.append(check_row("conformal_naturality", naturality_gap, 1e-7, "conformal naturality: E(g o phi o h^-1) = g o E(phi) o h^-1"))
    rows.append(check_row("interior", outside, 0, "existence: the extension maps the open ball into itself"))

    fine_ev = ExtensionEvaluator(square, make_rule(2, 2 * rule.level), solver)
    points = random_ball_points(rng, SUITE_CONFIG["extension_probes"], 3, 0.4)
    coarse = square_ev.evaluate_points(points, workers)[["y1", "y2", "y3"]].to_numpy()
    fine = fine_ev.evaluate_points(points, workers)[["y1", "y2", "y3"]].to_numpy()
    rows.append(check_row("resolution", np.nanmax(np.abs(coarse - fine)), 1e-8,
                          "resolution: doubling the rule level leaves the extension unchanged"))

    radii = (0.2, 0.1, 0.05, 0.025)
    e1, e2 = np.eye(3)[0], np.eye(3)[1]
    identity_table = identity_ev.continuity_probe(e1, radii)
    tables["continuity_identity"] = identity_table
    rows.append(check_row("continuity_identity", int(not identity_table.attrs["shrinking"]), 0,
                          "continuity: the extension is continuous where the boundary map is"))
    square_table = square_ev.continuity_probe(e1, radii)
    tables["continuity_square"] = square_table
    rows.append(check_row("continuity_square", int(not square_table.attrs["shrinking"]), 0,
                          "continuity: the extension is continuous where the boundary map is", asserted=False))
    swap_table = ExtensionEvaluator(hemisphere_swap_map(2), rule, solver).continuity_probe(e2, radii)
    tables["continuity_swap"] = swap_table
    rows.append(check_row("continuity_swap", swap_table["sup_distance"].iloc[-1], 0.0,
                          "continuity: no continuity expected across a jump", asserted=False))

    return ExperimentReport("extension", checks_frame(rows), tables)


def blaschke_suite(rng, level=None, solver=None, workers=None):
    """Structure of Blaschke lift extensions and the z^d structure for d = 2, 3."""
    maps = [BlaschkeProduct(1.0, [0.3, -0.4j])]
    while len(maps) < SUITE_CONFIG["blaschke_maps"]:
        maps.append(random_blaschke(rng, int(rng.integers(2, 4))))
    reports = [blaschke_experiment_suite(f, level, solver, workers, rng) for f in maps]
    reports += [zd_structure_check(d, level, solver, workers) for d in (2, 3)]
    return merge_reports("blaschke", reports)


def inner_suite(rng, level=None, solver=None, workers=None):
    """Inner-function recovery on S^1 at the default circle level."""
    maps = [power_map(2), power_map(3), BlaschkeProduct(1.0, [0.5, 0.5]), BlaschkeProduct(1.0, [0.0, -0.8])]
    reports = [inner_recovery_check(f, rng=rng, solver=solver, workers=workers) for f in maps]
    return merge_reports("inner", reports)


def jacobian_suite(rng, level=None, solver=None, workers=None):
    """Implicit-function Jacobian against finite differences and exact cases."""
    cfg = solver or SolverConfig.from_config()
    rule = make_rule(2, level)
    rows = []

    identity_ev = ExtensionEvaluator(identity_map(2), rule, cfg)
    calibration = max(np.max(np.abs(identity_ev.extension_jacobian(z) - np.eye(3)))
                      for z in random_ball_points(rng, 5, 3, 0.8))
    rows.append(check_row("identity_calibration", calibration, 1e-8, "implicit jacobian: the Jacobian of the identity extension is I"))

    mobius_gap = 0.0
    for _ in range(5):
        g = random_mobius(rng, 2)
        ev = ExtensionEvaluator(mobius_boundary_map(g), rule, cfg)
        mobius_gap = max(mobius_gap, np.max(np.abs(ev.extension_jacobian(np.zeros(3))
                                                   - mobius_differential(g, np.zeros(3)))))
    rows.append(check_row("mobius_jacobian", mobius_gap, 1e-8, "implicit jacobian: the Jacobian of a Poincare extension is D g"))

    square = lift(power_map(2))
    candidates = [
        lambda: square,
        lambda: lift(random_blaschke(rng, 2, 0.5)),
        lambda: conjugated_map(random_mobius(rng, 2, 0.3), square, random_mobius(rng, 2, 0.3)),
    ]
    relative, largest_eigenvalue, residual = 0.0, -np.inf, 0.0
    records = []
    for k in range(SUITE_CONFIG["jacobian_pairs"]):
        phi = candidates[k % len(candidates)]()
        ev = ExtensionEvaluator(phi, rule, cfg)
        z = np.array([0.3, 0.0, 0.0]) if k == 0 else random_ball_points(rng, 1, 3, 0.5)[0]
        analytic = ev.extension_jacobian(z)
        numeric = ev.finite_difference_jacobian(z)
        error = np.linalg.norm(analytic - numeric) / np.linalg.norm(numeric)
        relative = max(relative, error)
        point = ev.extend_point(z)
        system = ev.implicit_system(z, point.value)
        largest_eigenvalue = max(largest_eigenvalue, np.linalg.eigvalsh(system.Jw).max())
        residual = max(residual, np.linalg.norm(system.F))
        singular = np.linalg.svd(analytic, compute_uv=False)
        records.append({"map": phi.descriptor, "x1": z[0], "x2": z[1], "x3": z[2], "relative_error": error,
                        "determinant": np.linalg.det(analytic), "min_singular": singular[-1]})

    rows.append(check_row("jacobian_vs_differences", relative, 1e-4,
                          "implicit jacobian: implicit-function Jacobian matches central differences"))
    rows.append(check_row("jw_negative_definite", largest_eigenvalue, -1e-12,
                          "implicit jacobian: J_w F is negative definite at solved points"))
    rows.append(check_row("implicit_residual", residual, 2.0 * cfg.tol, "implicit jacobian: F(z, Phi(z)) = 0"))
    return ExperimentReport("jacobian", checks_frame(rows), {"jacobians": pd.DataFrame(records)})


SUITES = {
    "naturality": naturality_suite,
    "barycenter": barycenter_suite,
    "extension": extension_suite,
    "blaschke": blaschke_suite,
    "inner": inner_suite,
    "jacobian": jacobian_suite,
}


def run_suite(name, seed=None, level=None, solver=None, workers=None):
    """
    Runs one property suite

    Args:
        name (str): One of SUITES
        seed (int): Base seed, defaults to SUITE_CONFIG
        level (int): S^2 rule level
        solver (SolverConfig): Solver settings
        workers (int): Threads for point evaluation

    Returns:
        ExperimentReport
    """
    if name not in SUITES:
        raise InvalidInputError(f"unknown suite '{name}', expected one of {sorted(SUITES)}")
    seed = SUITE_CONFIG["seed"] if seed is None else seed
    rng = make_rng(seed, _STREAMS[name])
    logger.info("running suite %s with seed %d", name, seed)
    report = SUITES[name](rng, level=level, solver=solver, workers=workers)
    for _, row in report.checks[report.checks["asserted"] & ~report.checks["passed"]].iterrows():
        logger.error("%s failed: %s = %.3e > %.1e (%s)", name, row["check"], row["value"], row["tolerance"], row["anchor"])
    return report
