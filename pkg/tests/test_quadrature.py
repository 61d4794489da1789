import numpy as np
import pytest
from numpy.testing import assert_allclose

from config import QUADRATURE_CONFIG
from errors import InvalidInputError, UnsupportedLevelError
from measures import harmonic_density
from mobius import axis_rotation
from quadrature import QuadratureRule, jitter_rule, make_rule, rotate_rule


@pytest.mark.parametrize("n, level", [(1, 5), (2, 6), (3, 3)])
def test_rules_are_probability_rules_on_the_sphere(n, level):
    rule = make_rule(n, level)
    assert rule.dim == n
    assert rule.weights.sum() == pytest.approx(1.0, abs=1e-13)
    assert_allclose(np.linalg.norm(rule.nodes, axis=1), 1.0, atol=1e-14)


def test_rule_sizes():
    assert make_rule(1, 6).size == 64
    assert make_rule(2, 5).size == 2 * 5 * 5
    assert make_rule(3, 3).size == 4 ** 3


def test_default_levels():
    assert make_rule(1).level == 8
    assert make_rule(2).level == 32


def test_second_moments():
    assert make_rule(1, 6).integrate(make_rule(1, 6).nodes[:, 0] ** 2) == pytest.approx(0.5, abs=1e-14)
    rule = make_rule(2, 8)
    second = rule.integrate(rule.nodes[:, :, None] * rule.nodes[:, None, :])
    assert_allclose(second, np.eye(3) / 3.0, atol=1e-14)
    assert_allclose(rule.integrate(rule.nodes), 0.0, atol=1e-15)


def test_product_rule_polynomial_exactness():
    rule = make_rule(2, 8)
    assert rule.integrate(rule.nodes[:, 2] ** 4) == pytest.approx(0.2, abs=1e-14)
    assert rule.integrate(rule.nodes[:, 0] ** 2 * rule.nodes[:, 1] ** 2) == pytest.approx(1.0 / 15.0, abs=1e-14)


def test_level_below_minimum():
    with pytest.raises(UnsupportedLevelError):
        make_rule(2, 2)


def test_monte_carlo_rule_is_antithetic():
    rule = make_rule(3, 4)
    assert rule.is_monte_carlo
    assert_allclose(rule.integrate(rule.nodes), 0.0, atol=1e-15)
    value, error = rule.integrate_with_error(rule.nodes[:, 0] ** 2)
    assert value == pytest.approx(0.25, abs=0.05)
    assert 0.0 < error < 0.05


def test_deterministic_rules_report_no_error():
    rule = make_rule(2, 6)
    _, error = rule.integrate_with_error(rule.nodes[:, 0])
    assert np.isnan(error)


def test_rules_are_cached():
    assert make_rule(2, 9) is make_rule(2, 9)


def test_rule_validation():
    with pytest.raises(InvalidInputError):
        QuadratureRule([[1.0, 0.0], [0.0, 1.0]], [0.7, 0.7], 0)
    with pytest.raises(InvalidInputError):
        QuadratureRule([[1.0, 0.0], [0.0, 1.0]], [1.5, -0.5], 0)


def test_rotate_rule_keeps_weights():
    rule = make_rule(2, 6)
    rotated = rotate_rule(rule, axis_rotation(0.3).rho)
    assert_allclose(rotated.weights, rule.weights)
    assert_allclose(np.linalg.norm(rotated.nodes, axis=1), 1.0, atol=1e-14)
    assert rotated.level == rule.level


def test_jitter_rule_moves_nodes_off_excluded_points(rng):
    rule = QuadratureRule([[0.0, 0.0, -1.0], [0.0, 0.0, 1.0]], [0.5, 0.5], 1)
    avoid = np.array([[0.0, 0.0, -1.0]])
    moved = jitter_rule(rule, avoid, 0.1, rng)
    assert np.min(np.linalg.norm(moved.nodes - avoid, axis=1)) >= 0.1


def test_jitter_rule_keeps_rule_when_far_enough(rng):
    rule = make_rule(2, 8)
    assert jitter_rule(rule, [[0.0, 0.0, -1.0]], 1e-6, rng) is rule


@pytest.fixture
def fresh_rules():
    make_rule.cache_clear()
    yield
    make_rule.cache_clear()


def test_configured_level_replaces_the_default(fresh_rules, monkeypatch):
    monkeypatch.setitem(QUADRATURE_CONFIG, "level", 4)
    assert make_rule(2).level == 4
    assert make_rule(2).size == 2 * 4 * 4
    assert make_rule(1).size == 16
    assert make_rule(2, 6).level == 6


def test_level_above_maximum():
    with pytest.raises(UnsupportedLevelError):
        make_rule(1, 512)
    with pytest.raises(UnsupportedLevelError):
        make_rule(3, 40)


def test_kernel_quadrature_error_falls_with_the_level():
    w = np.array([0.9, 0.0, 0.0])
    errors = [abs(make_rule(2, level).integrate(harmonic_density(w, make_rule(2, level).nodes)) - 1.0)
              for level in (16, 32)]
    assert errors[1] < 1e-2
    assert errors[1] * 4.0 <= errors[0]
