import numpy as np
import pytest
from numpy.testing import assert_allclose

from errors import InvalidInputError
from mobius import (
    INFINITY,
    BallPoint,
    MobiusMap,
    SpherePoint,
    apply_gw,
    apply_mobius,
    axis_rotation,
    boundary_jacobian_norm,
    compose,
    conjugation_reflection,
    geodesic_disc_transport,
    hyperbolic_distance,
    inverse,
    mobius_differential,
    random_mobius,
    reflection,
    stereo_lift,
    stereo_project,
)
from quadrature import make_rule
from utils import random_ball_points, random_sphere_points


def test_translation_moves_origin_to_w():
    w = np.array([0.3, -0.2, 0.5])
    assert_allclose(apply_gw(w, np.zeros(3)), w, atol=1e-15)


def test_translation_keeps_sphere(rng):
    points = random_sphere_points(rng, 50, 3)
    images = apply_gw([0.4, 0.1, -0.6], points)
    assert_allclose(np.linalg.norm(images, axis=1), 1.0, atol=1e-12)


def test_translation_by_minus_w_undoes_translation(rng):
    w = np.array([0.5, 0.2, -0.1])
    points = random_ball_points(rng, 20, 3, 0.95)
    assert_allclose(apply_gw(-w, apply_gw(w, points)), points, atol=1e-12)


def test_translation_rejects_w_outside_ball():
    with pytest.raises(InvalidInputError):
        apply_gw([1.0, 0.0], np.zeros(2))


def test_inverse_undoes_map(rng):
    for _ in range(5):
        g = random_mobius(rng, 2, allow_reflection=True)
        points = random_ball_points(rng, 10, 3, 0.9)
        assert_allclose(apply_mobius(inverse(g), apply_mobius(g, points)), points, atol=1e-10)


def test_compose_matches_successive_application(rng):
    g, h = random_mobius(rng, 2), random_mobius(rng, 2, allow_reflection=True)
    points = np.vstack([random_ball_points(rng, 10, 3, 0.9), random_sphere_points(rng, 10, 3)])
    assert_allclose(apply_mobius(compose(g, h), points), apply_mobius(g, apply_mobius(h, points)), atol=1e-10)
    assert compose(g, h).det_sign == h.det_sign


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9])
def test_composed_translations_along_an_axis(r):
    e1 = np.array([1.0, 0.0, 0.0])
    g = MobiusMap.translation(r * e1)
    twice = compose(g, g)
    assert_allclose(twice.w, 2.0 * r / (1.0 + r ** 2) * e1, atol=1e-14)
    assert_allclose(twice.rho, np.eye(3), atol=1e-12)


@pytest.mark.parametrize("r", [0.1, 0.5, 0.9, 0.99])
def test_hyperbolic_distance_from_origin(r):
    expected = np.log((1.0 + r) / (1.0 - r))
    assert hyperbolic_distance(np.zeros(3), [r, 0.0, 0.0]) == pytest.approx(expected, rel=1e-12)


def test_compose_rejects_mixed_dimensions():
    with pytest.raises(InvalidInputError):
        compose(MobiusMap.identity(1), MobiusMap.identity(2))


def test_mobius_map_validates_parts():
    with pytest.raises(InvalidInputError):
        MobiusMap([0.1, 0.0, 0.0], [[1.0, 0.1, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    with pytest.raises(InvalidInputError):
        MobiusMap([1.0, 0.0, 0.0], np.eye(3))
    with pytest.raises(InvalidInputError):
        MobiusMap([0.1, 0.0], np.eye(3))
    with pytest.raises(InvalidInputError):
        MobiusMap([0.1, 0.0, 0.0], np.eye(3), det_sign=-1)


def test_point_types():
    assert_allclose(SpherePoint([3.0, 4.0]).coords, [0.6, 0.8])
    with pytest.raises(InvalidInputError):
        SpherePoint([0.0, 0.0])
    with pytest.raises(InvalidInputError):
        BallPoint([0.6, 0.8])
    assert BallPoint([0.1, 0.2, 0.3]).dim == 2


def test_differential_at_origin_of_translation():
    w = np.array([0.3, 0.4, 0.0])
    jac = mobius_differential(MobiusMap.translation(w), np.zeros(3))
    assert_allclose(jac, (1.0 - w @ w) * np.eye(3), atol=1e-14)


def test_differential_matches_central_differences(rng):
    g = random_mobius(rng, 2)
    x = np.array([0.2, -0.3, 0.1])
    step = 1e-6
    columns = [(apply_mobius(g, x + step * e) - apply_mobius(g, x - step * e)) / (2 * step) for e in np.eye(3)]
    assert_allclose(mobius_differential(g, x), np.stack(columns, axis=1), atol=1e-8)


def test_boundary_jacobian_integrates_to_one():
    rule = make_rule(1, 8)
    rho = [[0.0, -1.0], [1.0, 0.0]]
    g = MobiusMap([0.3, 0.2], rho)
    assert rule.integrate(boundary_jacobian_norm(g, rule.nodes)) == pytest.approx(1.0, abs=1e-12)


def test_hyperbolic_distance_is_invariant(rng):
    a, b = random_ball_points(rng, 2, 3, 0.9)
    g = random_mobius(rng, 2)
    assert hyperbolic_distance(apply_mobius(g, a), apply_mobius(g, b)) == pytest.approx(hyperbolic_distance(a, b), rel=1e-9)
    assert hyperbolic_distance(a, a) == pytest.approx(0.0, abs=1e-12)


def test_stereographic_round_trip_and_poles():
    z = np.array([0.0, 0.5 - 0.2j, 3.0 + 4.0j, 1e6j])
    assert_allclose(stereo_project(stereo_lift(z)), z, rtol=1e-12, atol=1e-15)
    assert_allclose(stereo_lift(0.0), [0.0, 0.0, 1.0])
    assert_allclose(stereo_lift(INFINITY), [0.0, 0.0, -1.0])
    assert stereo_project(np.array([0.0, 0.0, -1.0])) == INFINITY


def test_reflections():
    x = np.array([0.1, 0.2, 0.3])
    assert_allclose(reflection(2)(x), [0.1, 0.2, -0.3])
    assert_allclose(conjugation_reflection(2)(x), [0.1, -0.2, 0.3])
    assert not reflection(2).orientation_preserving


def test_axis_rotation_is_multiplication_by_unit_complex():
    z = 0.4 + 0.3j
    theta = 0.7
    assert_allclose(axis_rotation(theta)(stereo_lift(z)), stereo_lift(np.exp(1j * theta) * z), atol=1e-14)


def test_geodesic_disc_transport_maps_equator_to_lifted_circle():
    t = 0.6
    angles = np.linspace(0.0, 2.0 * np.pi, 7, endpoint=False)
    equator = np.stack([np.cos(angles), np.sin(angles), np.zeros_like(angles)], axis=1)
    assert_allclose(geodesic_disc_transport(t)(equator), stereo_lift(t * np.exp(1j * angles)), atol=1e-14)
    with pytest.raises(InvalidInputError):
        geodesic_disc_transport(0.0)


def test_random_mobius_respects_options(rng):
    for _ in range(10):
        g = random_mobius(rng, 2, max_radius=0.5)
        assert g.orientation_preserving
        assert np.linalg.norm(g.w) <= 0.5
