"""
Möbius group of the unit sphere S^n and the ball B^{n+1}.

Every element is stored in the normal form x -> g_w(rho x), with g_w the
hyperbolic translation taking the origin to w and rho orthogonal. For n = 2
the module also carries the stereographic chart of the Riemann sphere,

    S(z) = (2z, 1 - |z|^2) / (1 + |z|^2),

so S(0) = e3 and S(oo) = -e3.

All functions accept single points of shape (d,) or stacks of shape (m, d)
with d = n + 1.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.stats import special_ortho_group

from config import GEOMETRY_CONFIG
from errors import InvalidInputError
from utils import random_ball_points

logger = logging.getLogger(__name__)

INFINITY = complex(np.inf, 0.0)


def _coords(x):
    if isinstance(x, (SpherePoint, BallPoint)):
        return x.coords
    return np.asarray(x, dtype=float)


@dataclass(frozen=True, eq=False)
class SpherePoint:
    """Point of S^n, renormalized on construction."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        norm = np.linalg.norm(c)
        if c.size < 2 or not np.all(np.isfinite(c)) or norm == 0.0:
            raise InvalidInputError(f"cannot place {c} on the unit sphere")
        c = c / norm
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.size - 1


@dataclass(frozen=True, eq=False)
class BallPoint:
    """Point of the open ball, |x| < 1 - ball_margin."""

    coords: np.ndarray

    def __post_init__(self):
        c = np.array(self.coords, dtype=float).reshape(-1)
        if c.size < 2 or not np.all(np.isfinite(c)):
            raise InvalidInputError(f"invalid ball point {c}")
        if np.linalg.norm(c) >= 1.0 - GEOMETRY_CONFIG["ball_margin"]:
            raise InvalidInputError(f"|x| = {np.linalg.norm(c)!r} is not inside the open ball")
        c.setflags(write=False)
        object.__setattr__(self, "coords", c)

    @property
    def dim(self):
        return self.coords.size - 1


@dataclass(frozen=True, eq=False)
class MobiusMap:
    """
    Element x -> g_w(rho x) of the Möbius group

    Args:
        w: translation part, the image of the origin
        rho: orthogonal (n+1)x(n+1) matrix
        det_sign: det(rho); inferred when omitted
    """

    w: np.ndarray
    rho: np.ndarray
    det_sign: int | None = None

    def __post_init__(self):
        w = BallPoint(_coords(self.w)).coords
        d = w.size
        rho = np.array(self.rho, dtype=float)
        if rho.shape != (d, d):
            raise InvalidInputError(f"rho must be {d}x{d}, got {rho.shape}")
        tol = GEOMETRY_CONFIG["orthogonality_tolerance"]
        if np.max(np.abs(rho.T @ rho - np.eye(d))) > tol:
            raise InvalidInputError("rho is not orthogonal")
        sign = int(np.sign(np.linalg.det(rho)))
        if self.det_sign is not None and int(self.det_sign) != sign:
            raise InvalidInputError(f"det(rho) has sign {sign}, expected {self.det_sign}")
        rho.setflags(write=False)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "det_sign", sign)

    @property
    def dim(self):
        return self.w.size - 1

    @property
    def orientation_preserving(self):
        return self.det_sign > 0

    @classmethod
    def identity(cls, n):
        return cls(np.zeros(n + 1), np.eye(n + 1))

    @classmethod
    def translation(cls, w):
        w = _coords(w)
        return cls(w, np.eye(w.size))

    @classmethod
    def rotation(cls, rho):
        rho = np.asarray(rho, dtype=float)
        return cls(np.zeros(rho.shape[0]), rho)

    def __call__(self, x):
        return apply_mobius(self, x)


def _gw(w, x):
    # No conjugation anywhere: the complex-step differential relies on it.
    wx = x @ w
    xx = np.sum(x * x, axis=-1)
    ww = float(w @ w)
    num = x * (1.0 - ww) + np.multiply.outer(1.0 + xx + 2.0 * wx, w)
    den = 1.0 + ww * xx + 2.0 * wx
    return num / np.asarray(den)[..., None]


def apply_gw(w, x):
    """
    Applies the hyperbolic translation g_w taking 0 to w

    Args:
        w: point of the open ball
        x: point(s) of the closed ball, shape (d,) or (m, d)

    Returns:
        np.ndarray: g_w(x), same shape as x
    """
    w = _coords(w)
    if np.linalg.norm(w) >= 1.0:
        raise InvalidInputError(f"|w| = {np.linalg.norm(w)!r} must be < 1")
    return _gw(w, _coords(x))


def apply_mobius(g, x):
    return _gw(g.w, _coords(x) @ g.rho.T)


def identity(n):
    return MobiusMap.identity(n)


def reflection(n):
    """The reflection c in the coordinate plane x_{n+1} = 0."""
    return MobiusMap.rotation(np.diag([1.0] * n + [-1.0]))


def conjugation_reflection(n):
    """Reflection x2 -> -x2; the lift of complex conjugation when n = 2."""
    diag = np.ones(n + 1)
    diag[1] = -1.0
    return MobiusMap.rotation(np.diag(diag))


def axis_rotation(theta):
    """Rotation of R^3 about the x3-axis, the lift of z -> e^{i theta} z."""
    c, s = np.cos(theta), np.sin(theta)
    return MobiusMap.rotation([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def geodesic_disc_transport(t):
    """
    Returns h_t, the Poincaré extension of z -> t z

    h_t maps the equatorial disc onto the geodesic disc D_t whose boundary is
    the lifted circle S(t S^1). With S(0) = e3 its translation part is
    ((1 - t) / (1 + t)) e3.
    """
    if t <= 0:
        raise InvalidInputError("t must be positive")
    return MobiusMap.translation([0.0, 0.0, (1.0 - t) / (1.0 + t)])


def inverse(g):
    return MobiusMap(-(g.rho.T @ g.w), g.rho.T, g.det_sign)


def _orthonormalize(columns):
    q, r = np.linalg.qr(columns)
    diag = np.diag(r)
    if np.min(np.abs(diag)) < GEOMETRY_CONFIG["gram_schmidt_threshold"]:
        raise InvalidInputError("orthogonal part is rank deficient")
    return q * np.sign(diag)


def compose(g, h):
    """
    Canonical form of g∘h

    The translation part is (g∘h)(0); the orthogonal part is read off from
    the images of the standard basis under g_{-w}∘g∘h and re-orthonormalized.
    """
    d = g.dim + 1
    if h.dim + 1 != d:
        raise InvalidInputError("cannot compose maps of different dimension")
    w = apply_mobius(g, apply_mobius(h, np.zeros(d)))
    images = _gw(-w, apply_mobius(g, apply_mobius(h, np.eye(d))))
    return MobiusMap(w, _orthonormalize(images.T))


def mobius_differential(g, x):
    """
    Differential D_x g at a point of the closed ball

    Computed by complex-step differentiation of the exact formula, so the
    result carries no truncation error.

    Returns:
        np.ndarray: (d, d) matrix whose column j is the derivative along e_j
    """
    x = _coords(x)
    h = GEOMETRY_CONFIG["complex_step"]
    probes = x[None, :] + 1j * h * np.eye(x.size)
    values = _gw(g.w, probes @ g.rho.T)
    return values.imag.T / h


def boundary_jacobian_norm(g, zeta):
    """
    |Jac_g(zeta)| on S^n: ((1 - |w|^2) / |rho zeta + w|^2)^n

    Args:
        g (MobiusMap): Möbius map
        zeta: sphere point(s)

    Returns:
        float or np.ndarray
    """
    z = _coords(zeta) @ g.rho.T
    n = g.dim
    ww = float(g.w @ g.w)
    return ((1.0 - ww) / np.sum((z + g.w) ** 2, axis=-1)) ** n


def hyperbolic_distance(a, b):
    """Distance for the metric 2|dx| / (1 - |x|^2), computed as 2 artanh |g_{-a}(b)|."""
    a, b = _coords(a), _coords(b)
    return float(2.0 * np.arctanh(min(np.linalg.norm(apply_gw(-a, b)), 1.0)))


def chordal_distance(p, q):
    return np.linalg.norm(_coords(p) - _coords(q), axis=-1)


def homogeneous_to_sphere(a, b):
    """
    Lifts homogeneous chart coordinates z = a / b to S^2

    Both coordinates may vanish separately, never together.
    """
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ab = a * np.conj(b)
    aa = np.abs(a) ** 2
    bb = np.abs(b) ** 2
    total = aa + bb
    return np.stack([2.0 * ab.real, 2.0 * ab.imag, bb - aa], axis=-1) / total[..., None]


def sphere_to_homogeneous(p):
    """
    Homogeneous coordinates (a, b) with z = a / b and max(|a|, |b|) = 1

    Uses (x1 + i x2, 1 + x3) on the upper hemisphere and
    (1 - x3, x1 - i x2) on the lower one, so neither denominator cancels.
    """
    p = _coords(p)
    x1, x2, x3 = p[..., 0], p[..., 1], p[..., 2]
    upper = x3 >= 0.0
    a = np.where(upper, x1 + 1j * x2, 1.0 - x3)
    b = np.where(upper, 1.0 + x3, x1 - 1j * x2)
    scale = np.maximum(np.abs(a), np.abs(b))
    return a / scale, b / scale


def stereo_lift(z):
    """
    Stereographic lift S of chart values to S^2; INFINITY lifts to -e3

    Args:
        z: complex scalar or array

    Returns:
        np.ndarray: points of shape z.shape + (3,)
    """
    z = np.asarray(z, dtype=complex)
    infinite = np.isinf(z)
    large = infinite | (np.abs(np.where(infinite, 0.0, z)) > 1.0)
    safe = np.where(large & ~infinite, z, 1.0)
    a = np.where(large, 1.0, z)
    b = np.where(infinite, 0.0, np.where(large, 1.0 / safe, 1.0))
    return homogeneous_to_sphere(a, b)


def stereo_project(p):
    """Inverse of stereo_lift; -e3 projects to INFINITY."""
    a, b = sphere_to_homogeneous(p)
    pole = b == 0
    with np.errstate(divide="ignore", invalid="ignore"):
        z = a / np.where(pole, 1.0, b)
    z = np.where(pole, INFINITY, z)
    return z if z.ndim else complex(z)


def random_rotation(rng, d):
    return special_ortho_group.rvs(dim=d, random_state=rng)


def random_mobius(rng, n, max_radius=0.9, allow_reflection=False):
    """
    Draws a Möbius map with |g(0)| <= max_radius

    Args:
        rng (np.random.Generator): random stream
        n (int): sphere dimension
        max_radius (float): bound on the translation part
        allow_reflection (bool): whether orientation-reversing maps may occur

    Returns:
        MobiusMap
    """
    w = random_ball_points(rng, 1, n + 1, max_radius)[0]
    rho = random_rotation(rng, n + 1)
    if allow_reflection and rng.random() < 0.5:
        rho = rho @ np.diag([1.0] * n + [-1.0])
    return MobiusMap(w, rho)
