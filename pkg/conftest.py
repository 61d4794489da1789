import numpy as np
import pytest

from measures import SphereMeasure, density_measure, harmonic_density, uniform_measure
from quadrature import make_rule
from utils import make_rng


@pytest.fixture
def rng():
    return make_rng(1234)


@pytest.fixture
def circle_rule():
    return make_rule(1)


@pytest.fixture
def sphere_rule():
    return make_rule(2, 16)


@pytest.fixture
def uniform_sphere(sphere_rule):
    return uniform_measure(sphere_rule)


@pytest.fixture
def three_atoms():
    return SphereMeasure(np.eye(3), np.full(3, 1.0 / 3.0))


@pytest.fixture
def lopsided_atoms():
    points = [[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, -1.0, 0.0]]
    return SphereMeasure(points, [0.49, 0.01, 0.25, 0.25])


@pytest.fixture
def mixed_measure(sphere_rule):
    atoms = np.array([[0.0, 0.0, 1.0], [0.6, 0.8, 0.0]])
    density = harmonic_density([0.2, -0.1, 0.3], sphere_rule.nodes)
    return density_measure(sphere_rule, density, atoms, [0.2, 0.15])
