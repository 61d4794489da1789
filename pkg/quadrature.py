"""
Quadrature rules for the normalized surface measure eta_0 on S^n.

n = 1: 2**level equispaced nodes (trapezoid, spectrally accurate for smooth
periodic integrands).
n = 2: product rule, Gauss-Legendre in cos(polar angle) times 2*level
equispaced azimuths; exact for polynomials of degree <= 2*level - 1.
n >= 3: 4**level scrambled Halton points pushed to the sphere, antithetic
pairs so the linear moment vanishes exactly.
"""

from __future__ import annotations

import functools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri
from scipy.stats import qmc

from config import QUADRATURE_CONFIG
from errors import InvalidInputError, UnsupportedLevelError
from mobius import random_rotation

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class QuadratureRule:
    nodes: np.ndarray
    weights: np.ndarray
    order: int
    kind: str = "custom"
    level: int = 0

    def __post_init__(self):
        nodes = np.array(self.nodes, dtype=float)
        weights = np.array(self.weights, dtype=float)
        if nodes.ndim != 2 or weights.shape != (nodes.shape[0],):
            raise InvalidInputError("nodes must be (m, d) with one weight per node")
        if np.any(weights <= 0.0):
            raise InvalidInputError("quadrature weights must be positive")
        if abs(weights.sum() - 1.0) > QUADRATURE_CONFIG["weight_tolerance"]:
            raise InvalidInputError(f"weights sum to {weights.sum()!r}, expected 1")
        nodes.setflags(write=False)
        weights.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "weights", weights)

    @property
    def dim(self):
        return self.nodes.shape[1] - 1

    @property
    def size(self):
        return self.nodes.shape[0]

    @property
    def is_monte_carlo(self):
        return self.kind == "monte-carlo"

    def integrate(self, values):
        """
        Weighted sum of node values

        Args:
            values (np.ndarray): shape (m,) or (m, ...) sampled at the nodes

        Returns:
            float or np.ndarray
        """
        values = np.asarray(values)
        w = self.weights.reshape((-1,) + (1,) * (values.ndim - 1))
        return np.sum(w * values, axis=0)

    def integrate_with_error(self, values):
        """Returns (integral, standard error); the error is nan for deterministic rules."""
        values = np.asarray(values, dtype=float)
        value = self.integrate(values)
        if not self.is_monte_carlo:
            return value, np.full(np.shape(value), np.nan)
        spread = np.std(values, axis=0, ddof=1)
        return value, spread / np.sqrt(self.size)


def _circle_rule(level):
    count = 2 ** level
    angles = 2.0 * np.pi * np.arange(count) / count
    nodes = np.stack([np.cos(angles), np.sin(angles)], axis=1)
    return QuadratureRule(nodes, np.full(count, 1.0 / count), count - 1, "trapezoid", level)


def _product_rule(level):
    cos_polar, gl_weights = np.polynomial.legendre.leggauss(level)
    sin_polar = np.sqrt(1.0 - cos_polar ** 2)
    azimuths = 2.0 * np.pi * np.arange(2 * level) / (2 * level)
    nodes = np.stack(
        [
            np.outer(sin_polar, np.cos(azimuths)),
            np.outer(sin_polar, np.sin(azimuths)),
            np.outer(cos_polar, np.ones_like(azimuths)),
        ],
        axis=-1,
    ).reshape(-1, 3)
    weights = np.outer(gl_weights / 2.0, np.full(2 * level, 1.0 / (2 * level))).ravel()
    return QuadratureRule(nodes, weights, 2 * level - 1, "gauss-legendre", level)


def _monte_carlo_rule(n, level, seed):
    count = 4 ** level
    sampler = qmc.Halton(d=n + 1, scramble=True, seed=seed)
    uniform = np.clip(sampler.random(count // 2), 1e-12, 1.0 - 1e-12)
    half = ndtri(uniform)
    half /= np.linalg.norm(half, axis=1, keepdims=True)
    nodes = np.vstack([half, -half])
    return QuadratureRule(nodes, np.full(nodes.shape[0], 1.0 / nodes.shape[0]), 0, "monte-carlo", level)


@functools.lru_cache(maxsize=32)
def make_rule(n, level=None, seed=None):
    """
    Builds the quadrature rule for eta_0 on S^n

    Args:
        n (int): Sphere dimension
        level (int): Resolution; QUADRATURE_CONFIG["level"] or the per-dimension default
        seed (int): Seed of the low-discrepancy sequence (n >= 3 only)

    Returns:
        QuadratureRule: Rule with positive weights summing to one

    Raises:
        UnsupportedLevelError: level outside [min_level, max_level]
    """
    if n < 1:
        raise InvalidInputError("sphere dimension must be at least 1")
    if level is None:
        level = QUADRATURE_CONFIG["level"]
    if level is None:
        level = QUADRATURE_CONFIG["default_level"].get(n, QUADRATURE_CONFIG["monte_carlo_level"])
    max_level = QUADRATURE_CONFIG["max_level"].get(n, QUADRATURE_CONFIG["monte_carlo_max_level"])
    if level < QUADRATURE_CONFIG["min_level"]:
        raise UnsupportedLevelError(f"level {level} is below {QUADRATURE_CONFIG['min_level']}")
    if level > max_level:
        raise UnsupportedLevelError(f"level {level} exceeds {max_level} on S^{n}")
    if n == 1:
        return _circle_rule(level)
    if n == 2:
        return _product_rule(level)
    seed = QUADRATURE_CONFIG["monte_carlo_seed"] if seed is None else seed
    return _monte_carlo_rule(n, level, seed)


def rotate_rule(rule, rho):
    return QuadratureRule(rule.nodes @ np.asarray(rho).T, rule.weights, rule.order, rule.kind, rule.level)


def jitter_rule(rule, avoid, min_distance, rng, max_attempts=50):
    """
    Rotates a rule until no node lies within min_distance of the avoided points

    Args:
        rule (QuadratureRule): Rule to move
        avoid (np.ndarray): (k, d) points to keep away from
        min_distance (float): Chordal exclusion radius
        rng (np.random.Generator): Random stream for the rotations
        max_attempts (int): Rotations tried before giving up

    Returns:
        QuadratureRule: The original rule if it already keeps its distance
    """
    avoid = np.atleast_2d(avoid)

    def closest(candidate):
        gaps = np.linalg.norm(candidate.nodes[:, None, :] - avoid[None, :, :], axis=-1)
        return gaps.min()

    if closest(rule) >= min_distance:
        return rule
    for attempt in range(max_attempts):
        candidate = rotate_rule(rule, random_rotation(rng, rule.dim + 1))
        if closest(candidate) >= min_distance:
            logger.warning("rule rotated (attempt %d) to keep nodes %.1e away from excluded points",
                           attempt + 1, min_distance)
            return candidate
    raise InvalidInputError("could not move quadrature nodes away from the excluded points")
