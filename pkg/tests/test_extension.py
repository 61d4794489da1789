import numpy as np
import pandas as pd
import pytest
from numpy.testing import assert_allclose

from complex_maps import boundary_map, lift, power_map
from errors import DEExtensionError, InadmissibleSampleError, InvalidInputError
from extension import ExtensionEvaluator, vertical_derivative_closed_form
from measures import SphereMap, hemisphere_swap_map, identity_map, mobius_boundary_map
from mobius import MobiusMap, apply_mobius, mobius_differential, random_mobius
from quadrature import make_rule
from utils import random_ball_points


@pytest.fixture
def identity_ev(sphere_rule):
    return ExtensionEvaluator(identity_map(2), sphere_rule)


def test_identity_extends_to_identity(identity_ev, rng):
    for z in random_ball_points(rng, 10, 3, 0.9):
        assert_allclose(identity_ev.extend_at(z), z, atol=1e-9)


def test_mobius_boundary_map_extends_to_poincare_extension(sphere_rule, rng):
    g = random_mobius(rng, 2)
    ev = ExtensionEvaluator(mobius_boundary_map(g), sphere_rule)
    points = random_ball_points(rng, 10, 3, 0.9)
    images = np.array([ev.extend_at(z) for z in points])
    assert_allclose(images, apply_mobius(g, points), atol=1e-8)


def test_sphere_points_take_boundary_values(sphere_rule):
    ev = ExtensionEvaluator(lift(power_map(2)), sphere_rule)
    zeta = np.array([0.6, 0.8, 0.0])
    point = ev.extend_point(zeta)
    assert point.on_sphere
    assert_allclose(point.value, [0.6 ** 2 - 0.8 ** 2, 2 * 0.6 * 0.8, 0.0], atol=1e-14)


def test_points_just_inside_the_sphere_are_solved(sphere_rule, monkeypatch):
    ev = ExtensionEvaluator(identity_map(2), sphere_rule)
    sampled = []
    sample = ev._sample

    def recording_sample(z):
        sampled.append(z)
        return sample(z)

    monkeypatch.setattr(ev, "_sample", recording_sample)
    try:
        point = ev.extend_point([1.0 - 1e-13, 0.0, 0.0])
    except DEExtensionError:
        point = None
    assert len(sampled) == 1
    assert point is None or not point.on_sphere

    outside = ev.extend_point([1.0 + 1e-13, 0.0, 0.0])
    assert outside.on_sphere
    assert_allclose(outside.value, [1.0, 0.0, 0.0])
    assert len(sampled) == 1


def test_points_outside_the_ball_are_rejected(identity_ev):
    with pytest.raises(InvalidInputError):
        identity_ev.extend_point([0.9, 0.9, 0.0])
    with pytest.raises(InvalidInputError):
        identity_ev.extend_point([0.1, 0.1])


def test_rule_and_map_dimensions_must_agree(circle_rule):
    with pytest.raises(InvalidInputError):
        ExtensionEvaluator(identity_map(2), circle_rule)


def test_cache_returns_the_stored_point(identity_ev):
    z = np.array([0.1, 0.2, 0.3])
    assert identity_ev.extend_point(z) is identity_ev.extend_point(z.copy())


def test_constant_map_has_inadmissible_samples(sphere_rule):
    constant = SphereMap(lambda x: np.tile([1.0, 0.0, 0.0], (len(x), 1)), 2)
    ev = ExtensionEvaluator(constant, sphere_rule)
    with pytest.raises(InadmissibleSampleError):
        ev.extend_point(np.zeros(3))


def test_implicit_system_vanishes_at_solution(sphere_rule):
    ev = ExtensionEvaluator(lift(power_map(2)), sphere_rule)
    z = np.array([0.2, 0.1, 0.3])
    system = ev.implicit_system(z, ev.extend_at(z))
    assert np.linalg.norm(system.F) <= 2e-12
    assert np.linalg.eigvalsh(system.Jw).max() < 0.0


def test_identity_jacobian(identity_ev):
    z = np.array([0.3, -0.2, 0.4])
    assert_allclose(identity_ev.extension_jacobian(z), np.eye(3), atol=1e-8)
    assert_allclose(identity_ev.finite_difference_jacobian(z), np.eye(3), atol=1e-6)


def test_mobius_jacobian_at_origin(sphere_rule, rng):
    g = random_mobius(rng, 2, 0.5)
    ev = ExtensionEvaluator(mobius_boundary_map(g), sphere_rule)
    assert_allclose(ev.extension_jacobian(np.zeros(3)), mobius_differential(g, np.zeros(3)), atol=1e-8)


def test_mobius_extension_jacobian_is_conformal(sphere_rule, rng):
    g = random_mobius(rng, 2, 0.5)
    ev = ExtensionEvaluator(mobius_boundary_map(g), sphere_rule)
    for z in ([0.2, -0.1, 0.3], [0.0, 0.5, -0.4]):
        singular = np.linalg.svd(ev.extension_jacobian(np.array(z)), compute_uv=False)
        assert singular.min() == pytest.approx(singular.max(), rel=1e-7)
        assert_allclose(ev.extension_jacobian(np.array(z)), mobius_differential(g, np.array(z)), atol=1e-8)


def test_jacobian_rejects_sphere_points(identity_ev):
    with pytest.raises(InvalidInputError):
        identity_ev.extension_jacobian([1.0, 0.0, 0.0])


def test_evaluate_points_table(identity_ev):
    points = np.array([[0.1, 0.0, 0.0], [0.0, 0.0, 1.0], [0.9, 0.9, 0.0]])
    table = identity_ev.evaluate_points(points, workers=2)
    assert list(table.columns) == ["x1", "x2", "x3", "y1", "y2", "y3", "residual", "iterations",
                                   "converged", "atomic", "error"]
    assert table["error"].tolist() == ["", "", "INVALID_POINT"]
    assert_allclose(table.loc[:1, ["y1", "y2", "y3"]].to_numpy(), points[:2], atol=1e-9)
    assert np.isnan(table.loc[2, "y1"])


def test_evaluation_does_not_depend_on_worker_count(sphere_rule, rng):
    points = random_ball_points(rng, 12, 3, 0.9)
    phi = lift(power_map(3))
    one = ExtensionEvaluator(phi, sphere_rule, cache=False).evaluate_points(points, workers=1)
    many = ExtensionEvaluator(phi, sphere_rule, cache=False).evaluate_points(points, workers=4)
    pd.testing.assert_frame_equal(one, many)


def test_circle_extension_of_square_fixes_origin(circle_rule):
    ev = ExtensionEvaluator(boundary_map(power_map(2)), circle_rule)
    assert_allclose(ev.extend_at(np.zeros(2)), 0.0, atol=1e-12)


def test_continuity_probe(identity_ev, sphere_rule):
    table = identity_ev.continuity_probe([1.0, 0.0, 0.0], (0.2, 0.1, 0.05))
    assert table["radius"].tolist() == [0.2, 0.1, 0.05]
    assert table.attrs["shrinking"]
    swap = ExtensionEvaluator(hemisphere_swap_map(2), sphere_rule).continuity_probe([0.0, 1.0, 0.0], (0.1, 0.05))
    assert swap["sup_distance"].iloc[-1] > 1.0


def test_orbit_scan_of_identity(identity_ev):
    table = identity_ev.orbit_scan([0.2, 0.1, 0.0], 3)
    assert table["step"].tolist() == [0, 1, 2, 3]
    assert table["hyperbolic_step"].max() < 1e-8


def test_jacobian_rank_scan(identity_ev):
    table = identity_ev.jacobian_rank_scan(np.array([[0.1, 0.0, 0.0], [0.0, 0.3, 0.2]]), workers=1)
    assert table["rank"].tolist() == [3, 3]
    assert table["det_sign"].tolist() == [1, 1]


def test_vertical_derivative_of_identity(sphere_rule):
    assert vertical_derivative_closed_form(identity_map(2), sphere_rule) == pytest.approx(1.0, abs=1e-12)
    with pytest.raises(InvalidInputError):
        vertical_derivative_closed_form(identity_map(1), make_rule(1))


@pytest.mark.slow
def test_vertical_derivative_matches_implicit_jacobian(sphere_rule):
    phi = lift(power_map(2))
    ev = ExtensionEvaluator(phi, sphere_rule)
    closed = vertical_derivative_closed_form(phi, sphere_rule)
    assert closed == pytest.approx(ev.extension_jacobian(np.zeros(3))[2, 2], abs=1e-8)
    assert closed > 0.0


def test_reflection_gives_orientation_reversing_extension(sphere_rule):
    g = MobiusMap([0.1, 0.0, 0.2], np.diag([1.0, 1.0, -1.0]))
    ev = ExtensionEvaluator(mobius_boundary_map(g), sphere_rule)
    assert np.linalg.det(ev.extension_jacobian(np.array([0.1, 0.1, 0.1]))) < 0.0
