"""
Maps of the Riemann sphere and their lifts to S^2 (and, for inner
functions, to S^1).

Rational maps and Blaschke products are evaluated in homogeneous
coordinates (a, b), z = a / b, so poles and the point at infinity need no
special branches. Coefficients are stored in ascending powers.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import polynomial as P

from config import EXTENSION_CONFIG
from errors import IndeterminateError, InvalidInputError
from expressions import parse_expression
from measures import SphereMap
from mobius import (
    INFINITY,
    homogeneous_to_sphere,
    sphere_to_homogeneous,
    stereo_lift,
    stereo_project,
)
from quadrature import jitter_rule

logger = logging.getLogger(__name__)

MAX_DEGREE = 32
COMMON_ROOT_TOLERANCE = 1e-10
POLE_TOLERANCE = 1e-14


def _trim(coeffs):
    coeffs = np.atleast_1d(np.asarray(coeffs, dtype=complex))
    nonzero = np.flatnonzero(coeffs)
    if nonzero.size == 0:
        return np.zeros(1, dtype=complex)
    return coeffs[: nonzero[-1] + 1]


def _homogeneous_poly(coeffs, a, b, degree):
    # sum_k c_k a^k b^(degree - k) by Horner in a / b
    result = np.zeros(np.broadcast(a, b).shape, dtype=complex)
    for k in range(degree, -1, -1):
        c = coeffs[k] if k < coeffs.size else 0.0
        result = result * a + c * b ** (degree - k)
    return result


@dataclass(frozen=True, eq=False)
class RationalMap:
    """f = numerator / denominator, coefficients in ascending powers."""

    numerator: np.ndarray
    denominator: np.ndarray

    def __post_init__(self):
        num, den = _trim(self.numerator), _trim(self.denominator)
        if not np.any(den):
            raise InvalidInputError("denominator is identically zero")
        if max(num.size, den.size) - 1 > MAX_DEGREE:
            raise InvalidInputError(f"degree above {MAX_DEGREE}")
        if num.size > 1 and den.size > 1 and np.any(num):
            gaps = np.abs(P.polyroots(num)[:, None] - P.polyroots(den)[None, :])
            if gaps.min() < COMMON_ROOT_TOLERANCE:
                raise InvalidInputError("numerator and denominator share a root")
        num.setflags(write=False)
        den.setflags(write=False)
        object.__setattr__(self, "numerator", num)
        object.__setattr__(self, "denominator", den)

    @property
    def degree(self):
        return max(self.numerator.size, self.denominator.size) - 1

    @property
    def is_real_symmetric(self):
        """Real coefficients, so f(conj z) = conj f(z)."""
        return bool(np.all(self.numerator.imag == 0) and np.all(self.denominator.imag == 0))

    def homogeneous(self, a, b):
        d = self.degree
        return _homogeneous_poly(self.numerator, a, b, d), _homogeneous_poly(self.denominator, a, b, d)

    def __call__(self, z):
        return eval_rational(self, z)

    def describe(self):
        return f"rational of degree {self.degree}"


@dataclass(frozen=True, eq=False)
class BlaschkeProduct:
    """f(z) = sigma * prod_j (z + a_j) / (1 + conj(a_j) z)."""

    sigma: complex
    zeros: np.ndarray

    def __post_init__(self):
        zeros = np.atleast_1d(np.asarray(self.zeros, dtype=complex))
        if abs(abs(self.sigma) - 1.0) > 1e-12:
            raise InvalidInputError(f"|sigma| = {abs(self.sigma)!r} is not 1")
        if zeros.size == 0 or np.any(np.abs(zeros) >= 1.0):
            raise InvalidInputError("a Blaschke product needs at least one a_j with |a_j| < 1")
        if zeros.size > MAX_DEGREE:
            raise InvalidInputError(f"degree above {MAX_DEGREE}")
        zeros.setflags(write=False)
        object.__setattr__(self, "sigma", complex(self.sigma))
        object.__setattr__(self, "zeros", zeros)

    @property
    def degree(self):
        return self.zeros.size

    @property
    def is_mobius(self):
        return self.degree == 1

    @property
    def is_real_symmetric(self):
        """sigma = +-1 and the a_j closed under conjugation."""
        if abs(self.sigma.imag) > 1e-12:
            return False
        remaining = list(self.zeros)
        while remaining:
            a = remaining.pop()
            if abs(a.imag) <= 1e-12:
                continue
            gaps = [abs(b - np.conj(a)) for b in remaining]
            if not gaps or min(gaps) > 1e-12:
                return False
            remaining.pop(int(np.argmin(gaps)))
        return True

    def homogeneous(self, a, b):
        num = np.full(np.broadcast(a, b).shape, self.sigma, dtype=complex)
        den = np.ones_like(num)
        for zero in self.zeros:
            num = num * (a + zero * b)
            den = den * (b + np.conj(zero) * a)
        return num, den

    def __call__(self, z):
        return eval_rational(self, z)

    def to_rational(self):
        num, den = np.array([self.sigma]), np.array([1.0 + 0j])
        for zero in self.zeros:
            num = P.polymul(num, [zero, 1.0])
            den = P.polymul(den, [1.0, np.conj(zero)])
        return RationalMap(num, den)

    def describe(self):
        return f"blaschke of degree {self.degree}"


def power_map(d):
    """z -> z^d as a Blaschke product."""
    if d < 1:
        raise InvalidInputError("the power must be at least 1")
    return BlaschkeProduct(1.0, np.zeros(d))


@dataclass(frozen=True, eq=False)
class EntireMap:
    """
    Expression-defined map of the chart, e.g. exp(z)

    Infinity is an essential singularity: non-finite values and the point at
    infinity itself all map to infinity.
    """

    source: str

    def __post_init__(self):
        object.__setattr__(self, "_expression", parse_expression(self.source, ("z",), complex_values=True))

    @property
    def singular_points(self):
        return np.array([[0.0, 0.0, -1.0]])

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        finite = np.isfinite(z)
        values = np.asarray(self._expression(z=np.where(finite, z, 0.0)), dtype=complex)
        values = np.broadcast_to(values, z.shape)
        values = np.where(finite & np.isfinite(values), values, INFINITY)
        return values if values.ndim else complex(values)

    def describe(self):
        return f"entire map {self.source}"


def eval_rational(f, z):
    """
    Evaluates a rational map or Blaschke product at chart points

    Args:
        f (RationalMap | BlaschkeProduct): Map
        z: complex scalar or array; INFINITY is allowed

    Returns:
        complex or np.ndarray: INFINITY at poles

    Raises:
        IndeterminateError: numerator and denominator vanish together
    """
    z = np.asarray(z, dtype=complex)
    infinite = np.isinf(z)
    a = np.where(infinite, 1.0, z)
    b = np.where(infinite, 0.0, 1.0)
    num, den = f.homogeneous(a, b)
    scale = np.maximum(np.abs(num), np.abs(den))
    if np.any(scale == 0.0):
        raise IndeterminateError(f"{f.describe()} is 0/0 at {z}")
    pole = np.abs(den) < POLE_TOLERANCE * np.maximum(scale, 1.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        values = np.where(pole, INFINITY, num / np.where(pole, 1.0, den))
    return values if values.ndim else complex(values)


def lift(f):
    """
    The hat lift S o f o S^{-1} as a SphereMap on S^2

    Rational maps and Blaschke products go through homogeneous coordinates;
    expression maps go through the chart.
    """
    if isinstance(f, EntireMap):
        def chart(points):
            return stereo_lift(f(stereo_project(points)))

        return SphereMap(chart, 2, True, f.describe(), base=f)

    def hat(points):
        a, b = sphere_to_homogeneous(points)
        num, den = f.homogeneous(a, b)
        if np.any(np.maximum(np.abs(num), np.abs(den)) == 0.0):
            raise IndeterminateError(f"{f.describe()} is 0/0 on the sphere")
        return homogeneous_to_sphere(num, den)

    return SphereMap(hat, 2, True, f.describe(), base=f)


def boundary_map(f):
    """f^# on S^1 in R^2 for a map with unimodular boundary values."""

    def sharp(points):
        values = np.asarray(f(points[:, 0] + 1j * points[:, 1]), dtype=complex)
        return np.stack([values.real, values.imag], axis=1)

    return SphereMap(sharp, 1, True, f"boundary values of {f.describe()}", base=f)


def prepare_rule(f, rule, rng):
    """Moves the rule's nodes away from the singular points of an entire map."""
    if not isinstance(f, EntireMap):
        return rule
    return jitter_rule(rule, f.singular_points, EXTENSION_CONFIG["singularity_exclusion"], rng)


def cauchy_reconstruction(f, z, m):
    """
    f(z) from m boundary samples by the trapezoid Cauchy integral

        f(z) ~ (1 / m) sum_k f(zeta_k) zeta_k / (zeta_k - z),  zeta_k = e^{2 pi i k / m}
    """
    zeta = np.exp(2j * np.pi * np.arange(m) / m)
    boundary = np.asarray(f(zeta), dtype=complex)
    z = np.asarray(z, dtype=complex)
    kernel = zeta / (zeta - z[..., None])
    return np.mean(boundary * kernel, axis=-1)
