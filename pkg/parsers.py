"""
Readers for measure, map and points files.

Every error is a ParseError carrying the 1-based line and column of the
offending text.
"""

import ast
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from complex_maps import BlaschkeProduct, EntireMap, RationalMap, boundary_map, lift
from errors import InvalidInputError, ParseError
from expressions import parse_expression
from measures import SphereMeasure, density_measure, identity_map, mobius_boundary_map
from mobius import MobiusMap
from quadrature import make_rule

logger = logging.getLogger(__name__)

MAP_KINDS = ("identity", "mobius", "rational", "blaschke", "expr")


@dataclass
class MeasureSpec:
    dimension: int
    atom_points: list = field(default_factory=list)
    atom_masses: list = field(default_factory=list)
    atom_lines: list = field(default_factory=list)
    density: object = None
    density_line: int = 0
    level: int | None = None


@dataclass
class MapSpec:
    kind: str
    params: dict
    line: int = 1
    source: str = ""


def _content_lines(text):
    """(line number, column of first character, stripped text) of non-comment lines."""
    for number, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        stripped = body.lstrip()
        if stripped:
            yield number, len(body) - len(stripped) + 1, stripped


def _literal(text, line, column):
    try:
        return ast.literal_eval(text.strip())
    except (ValueError, SyntaxError) as e:
        offset = getattr(e, "offset", None) or 1
        raise ParseError(f"cannot read value '{text.strip()}'", line, column + offset - 1) from None


def _vector(value, line, column, length=None):
    try:
        vector = np.asarray(value, dtype=complex if np.iscomplexobj(np.asarray(value)) else float)
    except (TypeError, ValueError):
        raise ParseError("expected a list of numbers", line, column) from None
    if vector.ndim != 1 or (length is not None and vector.size != length):
        raise ParseError(f"expected a list of {length or 'some'} numbers", line, column)
    return vector


def parse_measure(text):
    """
    Parses a measure file

    Grammar:
        dimension: <n>
        atoms: [[c1, ..., c_{n+1}], mass]      (repeatable)
        density_expr: <expression in x1..x_{n+1}>
        level: <int>

    Returns:
        MeasureSpec
    """
    spec = None
    pending = []
    for line, column, body in _content_lines(text):
        key, sep, value = body.partition(":")
        if not sep:
            raise ParseError("expected 'key: value'", line, column)
        key = key.strip()
        value_column = column + len(key) + 1 + (len(value) - len(value.lstrip()))
        if key == "dimension":
            n = _literal(value, line, value_column)
            if not isinstance(n, int) or n < 1:
                raise ParseError("dimension must be a positive integer", line, value_column)
            spec = MeasureSpec(n)
        elif key in ("atoms", "density_expr", "level"):
            pending.append((key, value, line, value_column))
        else:
            raise ParseError(f"unknown key '{key}'", line, column)
    if spec is None:
        raise ParseError("missing 'dimension:' line", 1, 1)

    d = spec.dimension + 1
    for key, value, line, column in pending:
        if key == "atoms":
            atom = _literal(value, line, column)
            if not isinstance(atom, (list, tuple)) or len(atom) != 2:
                raise ParseError("atoms take [[coordinates], mass]", line, column)
            point = _vector(atom[0], line, column, d).real
            mass = atom[1]
            if not isinstance(mass, (int, float)) or mass <= 0:
                raise ParseError("atom mass must be a positive number", line, column)
            if np.linalg.norm(point) == 0.0:
                raise ParseError("atom at the zero vector", line, column)
            spec.atom_points.append(point)
            spec.atom_masses.append(float(mass))
            spec.atom_lines.append(line)
        elif key == "density_expr":
            variables = [f"x{i + 1}" for i in range(d)]
            spec.density = parse_expression(value, variables, line=line, column=column - 1)
            spec.density_line = line
        else:
            level = _literal(value, line, column)
            if not isinstance(level, int):
                raise ParseError("level must be an integer", line, column)
            spec.level = level
    if not spec.atom_masses and spec.density is None:
        raise ParseError("a measure needs atoms or a density", 1, 1)
    return spec


def build_measure(spec, level=None):
    """
    SphereMeasure from a MeasureSpec; the density part carries 1 - sum of atom masses

    Args:
        spec (MeasureSpec): Parsed file
        level (int): Rule level overriding the file's level
    """
    d = spec.dimension + 1
    points = np.array(spec.atom_points).reshape(-1, d)
    masses = np.array(spec.atom_masses)
    if spec.density is None:
        if abs(masses.sum() - 1.0) > 1e-10:
            raise ParseError(f"atom masses sum to {masses.sum()!r} without a density", spec.atom_lines[-1], 1)
        return SphereMeasure(points, masses)

    rule = make_rule(spec.dimension, level or spec.level)
    logger.debug("sampling density on %s rule with %d nodes", rule.kind, rule.size)
    values = spec.density(**{f"x{i + 1}": rule.nodes[:, i] for i in range(d)})
    values = np.broadcast_to(np.asarray(values), (rule.size,))
    if np.iscomplexobj(values) or not np.all(np.isfinite(values)) or np.any(values < 0):
        raise ParseError("density must be finite, real and non-negative on the sphere", spec.density_line, 1)
    try:
        return density_measure(rule, values.astype(float), points, masses)
    except InvalidInputError as e:
        raise ParseError(str(e), spec.density_line, 1) from e


def parse_map(text):
    """
    Parses a map file: a single line of one of

        identity
        mobius: w=[...], rho=[[...], ...]
        rational: num_coeffs=[...], den_coeffs=[...]
        blaschke: sigma=<complex>, zeros=[...]
        expr: <expression in z>

    Returns:
        MapSpec
    """
    lines = list(_content_lines(text))
    if len(lines) != 1:
        raise ParseError("a map file holds exactly one map", lines[1][0] if len(lines) > 1 else 1, 1)
    line, column, body = lines[0]
    kind, _, rest = body.partition(":")
    kind = kind.strip()
    if kind not in MAP_KINDS:
        raise ParseError(f"unknown map kind '{kind}'", line, column)
    rest_column = column + len(body) - len(rest.lstrip())
    if kind == "identity":
        if rest.strip():
            raise ParseError("identity takes no parameters", line, rest_column)
        return MapSpec(kind, {}, line, body)
    if kind == "expr":
        return MapSpec(kind, {"expression": parse_expression(rest, ("z",), complex_values=True,
                                                             line=line, column=rest_column - 1)}, line, body)

    try:
        call = ast.parse(f"f({rest.strip()})", mode="eval").body
    except SyntaxError as e:
        raise ParseError("parameters must read name=value, ...", line, rest_column + max((e.offset or 3) - 3, 0)) from None
    if call.args:
        raise ParseError("parameters must be named", line, rest_column + call.args[0].col_offset - 2)
    params = {}
    for keyword in call.keywords:
        at = rest_column + keyword.value.col_offset - 2
        try:
            params[keyword.arg] = ast.literal_eval(keyword.value)
        except ValueError:
            raise ParseError(f"cannot read value of '{keyword.arg}'", line, at) from None
    expected = {"mobius": {"w", "rho"}, "rational": {"num_coeffs", "den_coeffs"}, "blaschke": {"sigma", "zeros"}}[kind]
    if set(params) != expected:
        raise ParseError(f"{kind} takes exactly {sorted(expected)}", line, rest_column)
    return MapSpec(kind, params, line, body)


def build_complex_map(spec):
    """RationalMap, BlaschkeProduct or EntireMap for chart-level map kinds."""
    try:
        if spec.kind == "rational":
            return RationalMap(spec.params["num_coeffs"], spec.params["den_coeffs"])
        if spec.kind == "blaschke":
            return BlaschkeProduct(complex(spec.params["sigma"]), spec.params["zeros"])
        if spec.kind == "expr":
            return EntireMap(spec.params["expression"].source)
    except (InvalidInputError, TypeError) as e:
        raise ParseError(str(e), spec.line, 1) from e
    raise ParseError(f"'{spec.kind}' is not a map of the Riemann sphere", spec.line, 1)


def build_sphere_map(spec, dim):
    """
    SphereMap on S^dim for a MapSpec

    Chart-level maps lift to S^2; rational maps and Blaschke products also
    act on S^1 through their boundary values.
    """
    try:
        if spec.kind == "identity":
            return identity_map(dim)
        if spec.kind == "mobius":
            g = MobiusMap(spec.params["w"], spec.params["rho"])
            if g.dim != dim:
                raise ParseError(f"Mobius map acts on S^{g.dim}, expected S^{dim}", spec.line, 1)
            return mobius_boundary_map(g)
    except (InvalidInputError, TypeError, ValueError) as e:
        raise ParseError(str(e), spec.line, 1) from e
    f = build_complex_map(spec)
    if dim == 2:
        return lift(f)
    if dim == 1 and not isinstance(f, EntireMap):
        return boundary_map(f)
    raise ParseError(f"{spec.kind} maps act on S^2 (or S^1 for boundary values), not S^{dim}", spec.line, 1)


def parse_points(text, dim=None):
    """
    One point per line, whitespace or comma separated

    Returns:
        np.ndarray: (m, d) array
    """
    rows = []
    for line, column, body in _content_lines(text):
        fields = body.replace(",", " ").split()
        try:
            rows.append([float(x) for x in fields])
        except ValueError:
            raise ParseError(f"non-numeric coordinate in '{body}'", line, column) from None
        expected = dim + 1 if dim is not None else len(rows[0])
        if len(rows[-1]) != expected:
            raise ParseError(f"expected {expected} coordinates, got {len(rows[-1])}", line, column)
    if not rows:
        raise ParseError("no points", 1, 1)
    return np.array(rows)


def read_text(path):
    try:
        return Path(path).read_text()
    except OSError as e:
        raise ParseError(f"cannot read {path}: {e.strerror}", 0, 0) from e
