"""
Point sets of the closed ball used for extension tables and meshes.

Grid specs:
    disc:<side>[:<radius>]               square grid clipped to the equatorial disc
    radial:<c1>,...,<cd>:<count>[:<rmax>] points t * c / |c|, t in [0, rmax]
    shell:<radius>:<level>               radius times the nodes of a quadrature rule
    random:<count>[:<rmax>]              uniform directions, radius uniform in [0, rmax]
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from config import EXPERIMENT_CONFIG
from errors import InvalidInputError, ParseError
from quadrature import make_rule
from utils import random_ball_points


@dataclass(frozen=True, eq=False)
class Grid:
    points: np.ndarray
    faces: np.ndarray
    kind: str

    @property
    def size(self):
        return self.points.shape[0]


def _no_faces():
    return np.zeros((0, 3), dtype=int)


def disc_grid(dim, side=None, radius=None):
    """
    Square grid on the disc spanned by e1, e2, clipped to |x| <= radius

    Faces are the two triangles of every grid square with all corners kept.
    """
    if dim < 2:
        raise InvalidInputError("a disc grid needs at least two coordinates")
    side = side or EXPERIMENT_CONFIG["disc_grid_side"]
    radius = EXPERIMENT_CONFIG["disc_grid_radius"] if radius is None else radius
    axis = np.linspace(-radius, radius, side)
    u, v = np.meshgrid(axis, axis, indexing="ij")
    inside = u ** 2 + v ** 2 <= radius ** 2 * (1.0 + 1e-12)
    index = np.full(inside.shape, -1)
    index[inside] = np.arange(inside.sum())

    points = np.zeros((int(inside.sum()), dim))
    points[:, 0] = u[inside]
    points[:, 1] = v[inside]

    faces = []
    for i in range(side - 1):
        for j in range(side - 1):
            corners = index[i, j], index[i + 1, j], index[i + 1, j + 1], index[i, j + 1]
            if min(corners) >= 0:
                faces.append((corners[0], corners[1], corners[2]))
                faces.append((corners[0], corners[2], corners[3]))
    return Grid(points, np.array(faces, dtype=int).reshape(-1, 3), "disc")


def radial_grid(direction, count, r_max=0.95):
    direction = np.asarray(direction, dtype=float)
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        raise InvalidInputError("radial direction is the zero vector")
    if not 0.0 < r_max < 1.0:
        raise InvalidInputError("rmax must lie in (0, 1)")
    t = np.linspace(0.0, r_max, count)
    return Grid(np.outer(t, direction / norm), _no_faces(), "radial")


def shell_grid(dim, radius, level):
    """Rule nodes scaled to a sphere of the given radius; triangulated when dim = 3."""
    if not 0.0 < radius <= 1.0:
        raise InvalidInputError("shell radius must lie in (0, 1]")
    nodes = make_rule(dim - 1, level).nodes
    faces = ConvexHull(nodes).simplices if dim == 3 else _no_faces()
    return Grid(radius * nodes, np.asarray(faces, dtype=int), "shell")


def random_grid(dim, count, rng, r_max=0.9):
    return Grid(random_ball_points(rng, count, dim, r_max), _no_faces(), "random")


def _number(text, cast, spec):
    try:
        return cast(text)
    except ValueError:
        raise ParseError(f"'{text}' is not a valid number", 0, spec.find(text) + 1) from None


def parse_grid_spec(spec, dim, rng):
    """
    Builds a Grid from its text spec

    Args:
        spec (str): Grid spec, see the module docstring
        dim (int): Ambient dimension n + 1
        rng (np.random.Generator): Stream for random grids

    Returns:
        Grid

    Raises:
        ParseError: unknown kind or malformed fields
    """
    kind, _, rest = spec.strip().partition(":")
    fields = rest.split(":") if rest else []
    try:
        if kind == "disc" and 1 <= len(fields) <= 2:
            side = _number(fields[0], int, spec)
            radius = _number(fields[1], float, spec) if len(fields) == 2 else None
            return disc_grid(dim, side, radius)
        if kind == "radial" and 2 <= len(fields) <= 3:
            direction = [_number(c, float, spec) for c in fields[0].split(",")]
            if len(direction) != dim:
                raise ParseError(f"direction needs {dim} components", 0, len(kind) + 2)
            count = _number(fields[1], int, spec)
            if len(fields) == 3:
                return radial_grid(direction, count, _number(fields[2], float, spec))
            return radial_grid(direction, count)
        if kind == "shell" and len(fields) == 2:
            return shell_grid(dim, _number(fields[0], float, spec), _number(fields[1], int, spec))
        if kind == "random" and 1 <= len(fields) <= 2:
            count = _number(fields[0], int, spec)
            if len(fields) == 2:
                return random_grid(dim, count, rng, _number(fields[1], float, spec))
            return random_grid(dim, count, rng)
    except InvalidInputError as e:
        raise ParseError(str(e), 0, 1) from e
    raise ParseError(f"unknown grid spec '{spec}'", 0, 1)
