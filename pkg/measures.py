"""
Probability measures on S^n and measurable sphere maps.

A SphereMeasure is an atomic part plus a density part sampled on quadrature
nodes. Everything downstream integrates the measure as a weighted point
cloud (`support`), so pushforwards never need a density: they move points and
keep masses.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from config import QUADRATURE_CONFIG
from errors import InvalidInputError, MapEvaluationError, RadiusExceededError
from mobius import (
    MobiusMap,
    SpherePoint,
    _coords,
    apply_gw,
    apply_mobius,
    inverse,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SphereMeasure:
    """
    Atoms plus a density sampled on quadrature nodes

    Args:
        atom_points: (k, d) atom locations, renormalized to the sphere
        atom_masses: (k,) positive masses
        nodes: (m, d) quadrature nodes or None
        weights: (m,) quadrature weights or None
        density: (m,) values of d(mu)/d(eta_0) at the nodes or None
        mass_tolerance: allowed |total mass - 1|, QUADRATURE_CONFIG["mass_tolerance"] if None
    """

    atom_points: np.ndarray
    atom_masses: np.ndarray
    nodes: np.ndarray | None = None
    weights: np.ndarray | None = None
    density: np.ndarray | None = None
    mass_tolerance: float | None = None

    def __post_init__(self):
        masses = np.array(self.atom_masses, dtype=float).reshape(-1)
        points = np.array(self.atom_points, dtype=float)
        if masses.size == 0:
            points = points.reshape(0, points.shape[-1] if points.ndim == 2 else 0)
        if masses.size and (points.ndim != 2 or points.shape[0] != masses.size):
            raise InvalidInputError("need one mass per atom")
        if np.any(masses <= 0.0):
            raise InvalidInputError("atom masses must be positive")
        if masses.size:
            points = points / np.linalg.norm(points, axis=1, keepdims=True)
        total = masses.sum()
        dim = points.shape[1] if masses.size else None
        if self.nodes is not None:
            nodes = np.array(self.nodes, dtype=float)
            weights = np.array(self.weights, dtype=float)
            density = np.array(self.density, dtype=float)
            if weights.shape != (nodes.shape[0],) or density.shape != weights.shape:
                raise InvalidInputError("nodes, weights and density must align")
            if np.any(density < 0.0) or np.any(weights <= 0.0):
                raise InvalidInputError("density must be non-negative and weights positive")
            if dim is not None and nodes.shape[1] != dim:
                raise InvalidInputError("atoms and nodes live on different spheres")
            dim = nodes.shape[1]
            total += float(np.sum(weights * density))
            for name, value in (("nodes", nodes), ("weights", weights), ("density", density)):
                value.setflags(write=False)
                object.__setattr__(self, name, value)
        if dim is None:
            raise InvalidInputError("a measure needs atoms or a density part")
        tolerance = QUADRATURE_CONFIG["mass_tolerance"] if self.mass_tolerance is None else self.mass_tolerance
        if abs(total - 1.0) > tolerance:
            raise InvalidInputError(f"total mass is {total!r}, expected 1")
        points.setflags(write=False)
        masses.setflags(write=False)
        object.__setattr__(self, "atom_points", points)
        object.__setattr__(self, "atom_masses", masses)

    @property
    def dim(self):
        if self.atom_masses.size:
            return self.atom_points.shape[1] - 1
        return self.nodes.shape[1] - 1

    @property
    def atoms(self):
        return [(SpherePoint(p), float(m)) for p, m in zip(self.atom_points, self.atom_masses)]

    @property
    def has_density(self):
        return self.nodes is not None

    @property
    def total_mass(self):
        total = float(self.atom_masses.sum())
        if self.has_density:
            total += float(np.sum(self.weights * self.density))
        return total

    def support(self):
        """
        Weighted point cloud representing the measure

        Returns:
            tuple: (points (m, d), masses (m,)); zero-density nodes dropped
        """
        if not self.has_density:
            return self.atom_points, self.atom_masses
        masses = self.weights * self.density
        keep = masses > 0.0
        return (
            np.vstack([self.atom_points.reshape(-1, self.nodes.shape[1]), self.nodes[keep]]),
            np.concatenate([self.atom_masses, masses[keep]]),
        )

    @classmethod
    def from_atoms(cls, points, masses):
        return cls(np.atleast_2d(np.asarray(points, dtype=float)), masses)


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    offender: np.ndarray | None
    mass: float
    largest_mass: float

    def __bool__(self):
        return self.admissible


@dataclass(frozen=True, eq=False)
class SphereMap:
    """
    Measurable endomorphism of S^n evaluated on stacks of points

    `func` maps an (m, d) array to an (m, d) array; outputs are renormalized
    to the sphere. Evaluation must be pure so that it can run from many
    threads at once.
    """

    func: Callable[[np.ndarray], np.ndarray]
    dim: int
    continuous: bool = True
    descriptor: str = ""
    base: object = field(default=None, repr=False)

    def __call__(self, points):
        points = _coords(points)
        single = points.ndim == 1
        stack = np.atleast_2d(points)
        with np.errstate(all="ignore"):
            values = np.asarray(self.func(stack), dtype=float)
        if values.shape != stack.shape or not np.all(np.isfinite(values)):
            raise MapEvaluationError(f"{self.descriptor or 'sphere map'} returned invalid values")
        norms = np.linalg.norm(values, axis=1, keepdims=True)
        if np.any(norms == 0.0):
            raise MapEvaluationError(f"{self.descriptor or 'sphere map'} returned the zero vector")
        values = values / norms
        return values[0] if single else values


def identity_map(n):
    return SphereMap(lambda x: x, n, True, "identity")


def mobius_boundary_map(g):
    return SphereMap(lambda x: apply_mobius(g, x), g.dim, True, "mobius", base=g)


def conjugated_map(g, phi, h):
    """The map g∘phi∘h^{-1}."""
    h_inv = inverse(h)
    return SphereMap(
        lambda x: apply_mobius(g, phi(apply_mobius(h_inv, x))),
        phi.dim,
        phi.continuous,
        f"conjugated {phi.descriptor}",
    )


def hemisphere_swap_map(n):
    """Identity on {x1 >= 0}, antipodal map on {x1 < 0}; jumps along x1 = 0."""

    def swap(x):
        return np.where(x[:, :1] >= 0.0, x, -x)

    return SphereMap(swap, n, False, "hemisphere swap")


def uniform_measure(rule):
    return SphereMeasure(np.zeros((0, rule.dim + 1)), [], rule.nodes, rule.weights, np.ones(rule.size))


def harmonic_density(w, zeta):
    """
    Density of eta_w with respect to eta_0: ((1 - |w|^2) / |zeta - w|^2)^n

    Args:
        w: ball point
        zeta: sphere point(s)

    Returns:
        float or np.ndarray
    """
    w, zeta = _coords(w), _coords(zeta)
    n = w.size - 1
    return ((1.0 - float(w @ w)) / np.sum((zeta - w) ** 2, axis=-1)) ** n


def harmonic_measure(w, rule, r_max=None):
    """
    Harmonic measure eta_w in kernel form on the rule's nodes

    The density is the Poisson kernel itself; its quadrature mass is one up
    to the rule's error, which must stay within
    QUADRATURE_CONFIG["kernel_mass_tolerance"].

    Raises:
        RadiusExceededError: |w| > r_max, or the rule cannot resolve the kernel
    """
    w = _coords(w)
    r_max = QUADRATURE_CONFIG["r_max"] if r_max is None else r_max
    if np.linalg.norm(w) > r_max:
        raise RadiusExceededError(f"|w| = {np.linalg.norm(w):.6f} exceeds r_max = {r_max}")
    density = harmonic_density(w, rule.nodes)
    tolerance = QUADRATURE_CONFIG["kernel_mass_tolerance"]
    mass = rule.integrate(density)
    if abs(mass - 1.0) > tolerance:
        raise RadiusExceededError(
            f"kernel at |w| = {np.linalg.norm(w):.6f} integrates to {mass:.6g} on a level {rule.level} rule"
        )
    return SphereMeasure(np.zeros((0, rule.dim + 1)), [], rule.nodes, rule.weights, density, tolerance)


def density_measure(rule, density_values, atom_points=None, atom_masses=None):
    """
    Measure with a density part renormalized to the mass left by the atoms

    Args:
        rule (QuadratureRule): Rule the density is sampled on
        density_values (np.ndarray): Non-negative values at the nodes
        atom_points, atom_masses: Optional atomic part

    Returns:
        SphereMeasure
    """
    d = rule.dim + 1
    atom_points = np.zeros((0, d)) if atom_points is None else np.atleast_2d(atom_points)
    atom_masses = np.zeros(0) if atom_masses is None else np.asarray(atom_masses, dtype=float)
    remaining = 1.0 - atom_masses.sum()
    density_values = np.asarray(density_values, dtype=float)
    if remaining <= 0.0:
        raise InvalidInputError("atoms already carry all the mass")
    integral = rule.integrate(density_values)
    if integral <= 0.0:
        raise InvalidInputError("density integrates to zero")
    return SphereMeasure(atom_points, atom_masses, rule.nodes, rule.weights,
                         density_values * (remaining / integral))


def push_forward(mu, g):
    """g_* mu: atoms and nodes transported by g, masses unchanged."""
    atoms = apply_mobius(g, mu.atom_points) if mu.atom_masses.size else mu.atom_points
    if not mu.has_density:
        return SphereMeasure(atoms, mu.atom_masses)
    return SphereMeasure(atoms, mu.atom_masses, apply_mobius(g, mu.nodes), mu.weights, mu.density,
                         mu.mass_tolerance)


def pushforward_functional(phi, base, test, rule):
    """
    Integral of `test` against phi_* eta_base in pullback form

        sum_i w_i test(phi(g_base(xi_i)))

    The integrand stays bounded however close `base` gets to the sphere.

    Args:
        phi (SphereMap): Sphere map
        base: Ball point
        test (callable): Vectorized function of (m, d) points
        rule (QuadratureRule): Rule for eta_0

    Returns:
        float or np.ndarray
    """
    return rule.integrate(test(phi(apply_gw(base, rule.nodes))))


def merge_atoms(points, masses, tol=None):
    """
    Merges support points closer than tol

    Returns:
        tuple: (representative points, merged masses)
    """
    tol = QUADRATURE_CONFIG["atom_merge_tolerance"] if tol is None else tol
    points = np.atleast_2d(points)
    masses = np.asarray(masses, dtype=float)
    if points.shape[0] < 2:
        return points, masses
    pairs = cKDTree(points).query_pairs(r=tol, output_type="ndarray")
    if pairs.size == 0:
        return points, masses
    count = points.shape[0]
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(count, count))
    _, labels = connected_components(graph, directed=False)
    _, first = np.unique(labels, return_index=True)
    return points[first], np.bincount(labels, weights=masses)


def check_support_admissible(points, masses, tol=None):
    merged_points, merged_masses = merge_atoms(points, masses, tol)
    heaviest = int(np.argmax(merged_masses))
    largest = float(merged_masses[heaviest])
    if largest >= 0.5:
        return AdmissibilityReport(False, merged_points[heaviest], largest, largest)
    return AdmissibilityReport(True, None, 0.0, largest)


def check_admissible(mu):
    """
    Admissibility: every atom (after merging coincident atoms) has mass < 1/2

    Returns:
        AdmissibilityReport: truthy iff admissible; carries the offending atom
    """
    if not mu.atom_masses.size:
        return AdmissibilityReport(True, None, 0.0, 0.0)
    return check_support_admissible(mu.atom_points, mu.atom_masses)


def measure_moments(mu):
    """
    First and second moments of mu

    Returns:
        tuple: (integral of zeta, integral of zeta zeta^T)
    """
    points, masses = mu.support()
    first = masses @ points
    second = (points * masses[:, None]).T @ points
    return first, second


def recentered_measure(mu, w):
    """(g_{-w})_* mu, the measure seen from w."""
    return push_forward(mu, MobiusMap.translation(-_coords(w)))
