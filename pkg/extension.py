"""
Douady-Earle extension Phi = E(phi) of a sphere map phi.

Phi(z) = B((phi o g_z)_* eta_0) inside the ball and Phi = phi on the sphere.
The pushforward is sampled in pullback form: the quadrature nodes xi_i are
moved by g_z, mapped by phi and keep their weights.
"""

from __future__ import annotations

import logging
import threading
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.linalg import null_space

from barycenter import SolverConfig, solve_cloud
from config import EXTENSION_CONFIG, GEOMETRY_CONFIG, OUTPUT_CONFIG
from errors import (
    DEExtensionError,
    InadmissibleSampleError,
    InvalidInputError,
    SingularJacobianError,
)
from measures import check_support_admissible
from mobius import BallPoint, _coords, _gw, hyperbolic_distance

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class ExtensionPoint:
    """Phi at one point with solver diagnostics."""

    at: np.ndarray
    value: np.ndarray
    residual: float
    iterations: int
    converged: bool
    atomic: bool = False
    on_sphere: bool = False


@dataclass(frozen=True, eq=False)
class ImplicitSystemValue:
    F: np.ndarray
    Jw: np.ndarray
    Jz: np.ndarray


class ExtensionEvaluator:
    """
    Evaluates the extension of `phi` with a fixed quadrature rule

    The evaluator is immutable apart from the memo cache, which maps quantized
    ball coordinates to ExtensionPoint values and is shared between threads.
    """

    def __init__(self, phi, rule, solver=None, cache=True):
        if phi.dim != rule.dim:
            raise InvalidInputError(f"map acts on S^{phi.dim} but the rule samples S^{rule.dim}")
        self.phi = phi
        self.rule = rule
        self.solver = solver or SolverConfig.from_config()
        self._cache = {} if cache else None
        self._lock = threading.Lock()

    @property
    def dim(self):
        return self.rule.dim

    def _key(self, z):
        return tuple(np.round(z / EXTENSION_CONFIG["cache_quantum"]).astype(np.int64))

    def _sample(self, z):
        """Pullback cloud phi(g_z(xi_i)) with the rule weights."""
        return self.phi(_gw(z, self.rule.nodes)), self.rule.weights

    def extend_point(self, z):
        """
        Phi(z) with diagnostics

        Points on the unit sphere, or outside it by at most sphere_tolerance,
        take the boundary value phi(z / |z|); every other point must lie in
        the open ball, however close to the sphere.

        Args:
            z: Point of the closed ball

        Returns:
            ExtensionPoint

        Raises:
            InadmissibleSampleError: half the sampled mass sits on one point
            NoConvergenceError: the barycenter solve failed
        """
        z = _coords(z).astype(float).reshape(-1)
        if z.size != self.dim + 1:
            raise InvalidInputError(f"expected a point of R^{self.dim + 1}, got {z.size} coordinates")
        radius = np.linalg.norm(z)
        if 1.0 - GEOMETRY_CONFIG["ball_margin"] <= radius <= 1.0 + GEOMETRY_CONFIG["sphere_tolerance"]:
            zeta = z / radius
            return ExtensionPoint(zeta, self.phi(zeta), 0.0, 0, True, on_sphere=True)
        z = BallPoint(z).coords

        key = self._key(z) if self._cache is not None else None
        if key is not None:
            with self._lock:
                cached = self._cache.get(key)
            if cached is not None:
                return cached

        cloud, masses = self._sample(z)
        report = check_support_admissible(cloud, masses)
        if not report:
            raise InadmissibleSampleError(
                f"sampled mass {report.mass:.6f} collapses onto one point at z = {z}",
                offender=report.offender,
                mass=report.mass,
            )
        atomic = report.largest_mass > EXTENSION_CONFIG["atomic_flag_ratio"] * masses.max()
        if atomic:
            logger.warning("sampled pushforward at z = %s carries an atom of mass %.4f", z, report.largest_mass)

        result = solve_cloud(cloud, masses, self.solver)
        point = ExtensionPoint(z, result.point, result.residual, result.iterations, result.converged, atomic)
        if key is not None:
            with self._lock:
                self._cache.setdefault(key, point)
        return point

    def extend_at(self, z):
        return self.extend_point(z).value

    def implicit_system(self, z, w):
        """
        F(z, w) and its partial Jacobians in recentered coordinates

        With psi = g_{-w} o phi o g_z on the nodes:
            F  = sum_i w_i psi_i
            Jw = -2 sum_i w_i (I - psi_i psi_i^T)
            Jz = 2n sum_i w_i psi_i xi_i^T

        Returns:
            ImplicitSystemValue
        """
        z = BallPoint(_coords(z)).coords
        w = BallPoint(_coords(w)).coords
        cloud, masses = self._sample(z)
        psi = _gw(-w, cloud)
        d = self.dim + 1
        weighted = psi * masses[:, None]
        F = masses @ psi
        Jw = -2.0 * (masses.sum() * np.eye(d) - weighted.T @ psi)
        Jz = 2.0 * self.dim * weighted.T @ self.rule.nodes
        return ImplicitSystemValue(F, Jw, Jz)

    def extension_jacobian(self, z):
        """
        Jac_Phi(z) by the implicit function theorem

            Jac_Phi(z) = (1 - |w|^2) / (1 - |z|^2) * (-Jw^{-1} Jz),  w = Phi(z)

        Raises:
            SingularJacobianError: Jw is numerically singular
        """
        point = self.extend_point(z)
        if point.on_sphere:
            raise InvalidInputError("the implicit-function Jacobian is defined inside the ball only")
        system = self.implicit_system(point.at, point.value)
        if np.linalg.cond(system.Jw) > EXTENSION_CONFIG["singular_condition"]:
            raise SingularJacobianError(f"J_w is singular at z = {point.at}")
        scale = (1.0 - float(point.value @ point.value)) / (1.0 - float(point.at @ point.at))
        return -scale * np.linalg.solve(system.Jw, system.Jz)

    def finite_difference_jacobian(self, z, step=None):
        """Central differences of extend_at, column j along e_j."""
        z = BallPoint(_coords(z)).coords
        step = EXTENSION_CONFIG["fd_step"] if step is None else step
        columns = []
        for e in np.eye(z.size):
            columns.append((self.extend_at(z + step * e) - self.extend_at(z - step * e)) / (2.0 * step))
        return np.stack(columns, axis=1)

    def continuity_probe(self, zeta0, radii, samples=2):
        """
        Empirical modulus of continuity of Phi at a boundary point

        For each radius r the probe set holds the ball point (1 - r) zeta0,
        ball points at depth r/2 tilted by r/2 along each tangent direction,
        and sphere points at chordal offset r.

        Returns:
            pd.DataFrame: radius, sup_distance, probes; attrs["shrinking"]
            tells whether the sup distance decreased with the radius
        """
        zeta0 = _coords(zeta0) / np.linalg.norm(_coords(zeta0))
        target = self.phi(zeta0)
        tangents = null_space(zeta0[None, :]).T
        records = []
        for radius in sorted(radii, reverse=True):
            probes = [(1.0 - radius) * zeta0]
            for t in tangents:
                for sign in (1.0, -1.0):
                    for fraction in np.linspace(0.5, 1.0, samples):
                        tilted = zeta0 + sign * fraction * radius * t
                        tilted /= np.linalg.norm(tilted)
                        probes.append((1.0 - 0.5 * radius) * tilted)
                        probes.append(tilted)
            distances = [np.linalg.norm(self.extend_at(p) - target) for p in probes]
            records.append({"radius": radius, "sup_distance": max(distances), "probes": len(probes)})
        table = pd.DataFrame(records)
        table.attrs["shrinking"] = bool(np.all(np.diff(table["sup_distance"].to_numpy()) <= 0.0))
        return table

    def _row(self, z):
        d = self.dim + 1
        row = {f"x{i + 1}": float(c) for i, c in enumerate(_coords(z))}
        try:
            point = self.extend_point(z)
        except DEExtensionError as e:
            logger.warning("evaluation failed at %s: %s", z, e)
            row.update({f"y{i + 1}": np.nan for i in range(d)})
            row.update(residual=np.nan, iterations=0, converged=False, atomic=False, error=e.code)
            return row
        row.update({f"y{i + 1}": float(c) for i, c in enumerate(point.value)})
        row.update(residual=point.residual, iterations=point.iterations, converged=point.converged,
                   atomic=point.atomic, error="")
        return row

    def evaluate_points(self, points, workers=None):
        """
        Evaluates Phi on a point set in parallel

        Results keep the input order whatever the worker count.

        Args:
            points (np.ndarray): (m, d) points of the closed ball
            workers (int): Thread count, defaults to OUTPUT_CONFIG

        Returns:
            pd.DataFrame: x*, y*, residual, iterations, converged, atomic, error
        """
        points = np.atleast_2d(np.asarray(points, dtype=float))
        workers = workers or OUTPUT_CONFIG["workers"]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(self._row, points))
        return pd.DataFrame(rows)

    def jacobian_rank_scan(self, points, workers=None):
        """Determinant sign, smallest singular value and numerical rank of Jac_Phi."""

        def scan(z):
            jac = self.extension_jacobian(z)
            singular = np.linalg.svd(jac, compute_uv=False)
            rank = int(np.sum(singular > EXTENSION_CONFIG["rank_tolerance"] * singular[0]))
            det = float(np.linalg.det(jac))
            return {"determinant": det, "det_sign": int(np.sign(det)),
                    "min_singular": float(singular[-1]), "rank": rank}

        points = np.atleast_2d(np.asarray(points, dtype=float))
        workers = workers or OUTPUT_CONFIG["workers"]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(scan, points))
        coords = pd.DataFrame(points, columns=[f"x{i + 1}" for i in range(points.shape[1])])
        return pd.concat([coords, pd.DataFrame(rows)], axis=1)

    def orbit_scan(self, start, steps):
        """
        Iterates Phi from a ball point

        Returns:
            pd.DataFrame: step, norm and hyperbolic length of each step
        """
        z = BallPoint(_coords(start)).coords
        records = [{"step": 0, "norm": float(np.linalg.norm(z)), "hyperbolic_step": 0.0}]
        for k in range(1, steps + 1):
            image = self.extend_at(z)
            records.append({"step": k, "norm": float(np.linalg.norm(image)),
                            "hyperbolic_step": hyperbolic_distance(z, image)})
            z = image
        return pd.DataFrame(records)


def vertical_derivative_closed_form(phi, rule, solver=None):
    """
    d Phi_3 / d x_3 at the origin for maps of S^2 commuting with x3 -> -x3

    Then w = Phi(0) lies in the equatorial plane, Jw and Jz leave the e3 line
    invariant and, with psi = g_{-w} o phi and M the rule mean, the
    implicit-function formula reduces to

        (1 - |w|^2) * n * M(psi_3 xi_3) / M(1 - psi_3^2)
    """
    if rule.dim != 2:
        raise InvalidInputError("the vertical derivative is defined for maps of S^2")
    image = phi(rule.nodes)
    w = solve_cloud(image, rule.weights, solver).point
    psi = _gw(-w, image)[:, 2]
    ratio = rule.integrate(psi * rule.nodes[:, 2]) / rule.integrate(1.0 - psi ** 2)
    return (1.0 - float(w @ w)) * rule.dim * ratio
