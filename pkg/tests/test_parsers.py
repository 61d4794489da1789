import numpy as np
import pytest
from numpy.testing import assert_allclose

from complex_maps import BlaschkeProduct, EntireMap, RationalMap
from errors import ParseError
from measures import check_admissible
from mobius import MobiusMap, apply_mobius, stereo_lift
from parsers import (
    build_complex_map,
    build_measure,
    build_sphere_map,
    parse_map,
    parse_measure,
    parse_points,
    read_text,
)

MEASURE_TEXT = """
# two atoms on top of a tilted density
dimension: 2
atoms: [[0, 0, 1], 0.2]
atoms: [[3, 4, 0], 0.1]   # renormalized to the sphere
density_expr: 1 + 0.5*x3
level: 8
"""


def test_parse_measure():
    spec = parse_measure(MEASURE_TEXT)
    assert spec.dimension == 2
    assert spec.atom_masses == [0.2, 0.1]
    assert spec.atom_lines == [4, 5]
    assert spec.level == 8
    assert spec.density.source == "1 + 0.5*x3"


def test_build_measure_with_density():
    mu = build_measure(parse_measure(MEASURE_TEXT))
    assert mu.total_mass == pytest.approx(1.0, abs=1e-12)
    assert_allclose(mu.atom_points[1], [0.6, 0.8, 0.0])
    assert mu.nodes.shape[0] == 2 * 8 * 8
    assert check_admissible(mu)


def test_level_override():
    mu = build_measure(parse_measure(MEASURE_TEXT), level=4)
    assert mu.nodes.shape[0] == 2 * 4 * 4


def test_constant_density():
    mu = build_measure(parse_measure("dimension: 1\ndensity_expr: 1\nlevel: 5"))
    assert mu.total_mass == pytest.approx(1.0)
    assert mu.dim == 1


def test_atomic_measure():
    mu = build_measure(parse_measure("dimension: 1\natoms: [[1, 0], 0.5]\natoms: [[0, 1], 0.5]\n"))
    assert not mu.has_density
    assert not check_admissible(mu)


def test_atoms_must_sum_to_one_without_density():
    with pytest.raises(ParseError) as info:
        build_measure(parse_measure("dimension: 1\natoms: [[1, 0], 0.3]\n"))
    assert info.value.line == 2


def test_negative_density_is_rejected():
    with pytest.raises(ParseError) as info:
        build_measure(parse_measure("dimension: 2\n\ndensity_expr: x3\nlevel: 4"))
    assert info.value.line == 3


@pytest.mark.parametrize("text, line, column", [
    ("dimension: 2\ncolour: 3", 2, 1),
    ("dimension: 2\n  atoms [[1,0,0], 0.2]", 2, 3),
    ("dimension: 2\natoms: [[1, 0], 0.2]", 2, 8),
    ("dimension: 2\natoms: [[1, 0, 0], -0.2]", 2, 8),
    ("dimension: 2\natoms: [[0, 0, 0], 0.2]", 2, 8),
    ("dimension: 2\ndensity_expr: 1 + q", 2, 19),
    ("dimension: zero", 1, 12),
    ("atoms: [[1, 0], 0.2]", 1, 1),
    ("dimension: 1", 1, 1),
])
def test_measure_errors_carry_positions(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_measure(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_parse_identity_and_mobius_maps():
    assert parse_map("# map\nidentity\n").kind == "identity"
    spec = parse_map("mobius: w=[0.1, 0, 0], rho=[[0, -1, 0], [1, 0, 0], [0, 0, 1]]")
    phi = build_sphere_map(spec, 2)
    g = MobiusMap([0.1, 0.0, 0.0], [[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
    points = np.array([[1.0, 0.0, 0.0], [0.0, 0.6, 0.8]])
    assert_allclose(phi(points), apply_mobius(g, points), atol=1e-15)
    assert build_sphere_map(parse_map("identity"), 1).dim == 1
    with pytest.raises(ParseError):
        build_sphere_map(spec, 1)


def test_parse_rational_and_blaschke_maps():
    rational = build_complex_map(parse_map("rational: num_coeffs=[0, 0, 1], den_coeffs=[1]"))
    assert isinstance(rational, RationalMap)
    assert rational.degree == 2
    blaschke = build_complex_map(parse_map("blaschke: sigma=1, zeros=[0.3, -0.4j]"))
    assert isinstance(blaschke, BlaschkeProduct)
    assert_allclose(blaschke.zeros, [0.3, -0.4j])
    hat = build_sphere_map(parse_map("blaschke: sigma=1, zeros=[0.3, -0.4j]"), 2)
    assert_allclose(hat(stereo_lift(0.2)), stereo_lift(blaschke(0.2)), atol=1e-14)
    sharp = build_sphere_map(parse_map("blaschke: sigma=1, zeros=[0.5]"), 1)
    assert sharp.dim == 1


def test_parse_expression_map():
    spec = parse_map("expr: exp(z) + i")
    f = build_complex_map(spec)
    assert isinstance(f, EntireMap)
    assert f(0.0) == pytest.approx(1.0 + 1j)
    with pytest.raises(ParseError):
        build_sphere_map(spec, 1)


@pytest.mark.parametrize("text, line, column", [
    ("spiral: a=1", 1, 1),
    ("identity: w=1", 1, 11),
    ("blaschke: sigma=1", 1, 11),
    ("blaschke: 1, zeros=[0.1]", 1, 11),
    ("blaschke: sigma=1, zeros=foo", 1, 26),
    ("expr: z + w", 1, 11),
    ("identity\nidentity", 2, 1),
    ("", 1, 1),
])
def test_map_errors_carry_positions(text, line, column):
    with pytest.raises(ParseError) as info:
        parse_map(text)
    assert (info.value.line, info.value.column) == (line, column)


def test_invalid_map_parameters_become_parse_errors():
    with pytest.raises(ParseError):
        build_complex_map(parse_map("blaschke: sigma=2, zeros=[0.1]"))
    with pytest.raises(ParseError):
        build_sphere_map(parse_map("mobius: w=[0.1, 0, 0], rho=[[1, 1, 0], [0, 1, 0], [0, 0, 1]]"), 2)
    with pytest.raises(ParseError):
        build_complex_map(parse_map("identity"))


def test_parse_points():
    points = parse_points("# probes\n0.1 0.2 0.3\n0.0, -0.5, 0.1\n\n", dim=2)
    assert_allclose(points, [[0.1, 0.2, 0.3], [0.0, -0.5, 0.1]])


@pytest.mark.parametrize("text, line", [
    ("0.1 0.2 0.3\n0.1 0.2", 2),
    ("0.1 x 0.3", 1),
    ("# nothing\n", 1),
])
def test_points_errors(text, line):
    with pytest.raises(ParseError) as info:
        parse_points(text, dim=2)
    assert info.value.line == line


def test_read_text(tmp_path):
    path = tmp_path / "map.txt"
    path.write_text("identity\n")
    assert read_text(path) == "identity\n"
    with pytest.raises(ParseError):
        read_text(tmp_path / "missing.txt")
