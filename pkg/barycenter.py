"""
The conformal barycenter B(mu): the unique zero of the vector field

    V_mu(w) = (1 - |w|^2) / 2 * integral of g_{-w}(zeta) d mu(zeta)

on the open ball. The solver works on weighted point clouds (see
SphereMeasure.support) so it serves measures and sampled pushforwards alike.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dataclass_field, replace

import numpy as np
from scipy.integrate import solve_ivp

from config import QUADRATURE_CONFIG, SOLVER_CONFIG
from errors import InadmissibleMeasureError, InvalidInputError, NoConvergenceError
from measures import check_admissible, merge_atoms, recentered_measure
from mobius import BallPoint, _coords, _gw
from utils import random_ball_points, random_sphere_points

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SolverConfig:
    tol: float = SOLVER_CONFIG["tol"]
    max_iters: int = SOLVER_CONFIG["max_iters"]
    clamp: float = SOLVER_CONFIG["clamp"]
    max_halvings: int = SOLVER_CONFIG["max_halvings"]
    initial_radius_cap: float = SOLVER_CONFIG["initial_radius_cap"]
    level: int | None = None

    @classmethod
    def from_config(cls, **overrides):
        """
        Builds a solver configuration from SOLVER_CONFIG

        Args:
            **overrides: Fields to replace; None values are ignored so CLI
                flags that were not given fall through to the defaults

        Returns:
            SolverConfig
        """
        values = {k: v for k, v in overrides.items() if v is not None}
        unknown = set(values) - set(cls.__dataclass_fields__)
        if unknown:
            raise InvalidInputError(f"unknown solver settings: {sorted(unknown)}")
        cfg = replace(cls(), **values)
        if cfg.tol <= 0 or cfg.max_iters < 1 or not 0 < cfg.clamp < 1:
            raise InvalidInputError(f"invalid solver configuration {cfg}")
        return cfg


@dataclass(frozen=True, eq=False)
class FieldValue:
    at: np.ndarray
    vector: np.ndarray
    normalized: np.ndarray


@dataclass(frozen=True, eq=False)
class BarycenterResult:
    point: np.ndarray
    residual: float
    iterations: int
    converged: bool
    history: tuple = dataclass_field(default=(), repr=False)

    @property
    def ball_point(self):
        return BallPoint(self.point)


@dataclass(frozen=True)
class BoundCheck:
    """Outcome of a mass-concentration lemma check at the origin."""

    hypothesis: bool
    mass: float
    threshold: float
    inner_product: float

    @property
    def holds(self):
        return (not self.hypothesis) or self.inner_product > 0.0

    def __bool__(self):
        return self.holds


@dataclass(frozen=True)
class InwardProbe:
    radius: float
    found: bool


@dataclass(frozen=True, eq=False)
class MultistartResult:
    points: np.ndarray
    spread: float


def _require_admissible(mu):
    report = check_admissible(mu)
    if not report:
        raise InadmissibleMeasureError(
            f"atom of mass {report.mass:.6f} >= 1/2", offender=report.offender, mass=report.mass
        )


def cloud_field(points, masses, w):
    """Normalized field sum_i m_i g_{-w}(p_i)."""
    return masses @ _gw(-np.asarray(w, dtype=float), points)


def field(mu, w):
    """
    Evaluates V_mu(w)

    Args:
        mu (SphereMeasure): Admissible measure
        w: Ball point

    Returns:
        FieldValue: Euclidean field and the field divided by (1 - |w|^2) / 2
    """
    _require_admissible(mu)
    w = BallPoint(_coords(w)).coords
    points, masses = mu.support()
    normalized = cloud_field(points, masses, w)
    return FieldValue(w, 0.5 * (1.0 - float(w @ w)) * normalized, normalized)


def cloud_jacobian_at_zero(points, masses):
    second = (points * masses[:, None]).T @ points
    return second - masses.sum() * np.eye(points.shape[1])


def field_jacobian_at_zero(mu):
    """Jac_V(0) = -integral of (I - zeta zeta^T) d mu; symmetric negative-definite."""
    _require_admissible(mu)
    return cloud_jacobian_at_zero(*mu.support())


def initial_guess(points, masses, cap):
    mean = masses @ points
    radius = np.linalg.norm(mean)
    if radius == 0.0:
        return np.zeros_like(mean)
    return mean * (min(radius, cap) / radius)


def solve_cloud(points, masses, cfg=None, start=None):
    """
    Barycenter of a weighted point cloud by conformal renormalization

    Each step recenters the cloud at the current iterate w, takes a damped
    Newton step delta at the origin of the recentered cloud and moves to
    g_w(delta).

    Args:
        points (np.ndarray): (m, d) unit vectors
        masses (np.ndarray): (m,) positive masses summing to one
        cfg (SolverConfig): Solver settings
        start (np.ndarray): Initial point, defaults to the capped Euclidean mean

    Returns:
        BarycenterResult

    Raises:
        NoConvergenceError: residual above tol after max_iters steps
    """
    cfg = cfg or SolverConfig.from_config()
    w = initial_guess(points, masses, cfg.initial_radius_cap) if start is None else np.array(start, dtype=float)
    recentered = _gw(-w, points)
    value = masses @ recentered
    residual = float(np.linalg.norm(value))
    history = [residual]
    iterations = 0

    while residual > cfg.tol and iterations < cfg.max_iters:
        iterations += 1
        jac = cloud_jacobian_at_zero(recentered, masses)
        delta = -np.linalg.solve(jac, 0.5 * value)
        step = np.linalg.norm(delta)
        if step > cfg.clamp:
            delta *= cfg.clamp / step

        for _ in range(cfg.max_halvings + 1):
            candidate = _gw(w, delta)
            if np.linalg.norm(candidate) < 1.0:
                moved = _gw(-candidate, points)
                moved_value = masses @ moved
                moved_residual = float(np.linalg.norm(moved_value))
                if moved_residual < residual:
                    break
            delta *= 0.5
        else:
            logger.debug("no decrease after %d halvings at residual %.3e", cfg.max_halvings, residual)
            break

        w, recentered, value, residual = candidate, moved, moved_value, moved_residual
        history.append(residual)
        logger.debug("iteration %d: |w| = %.15f, residual = %.3e", iterations, np.linalg.norm(w), residual)

    if residual > cfg.tol:
        _, merged = merge_atoms(points, masses)
        raise NoConvergenceError(
            f"residual {residual:.3e} above tol {cfg.tol:.1e} after {iterations} iterations",
            history=history,
            largest_atom=float(merged.max()),
            last_point=w,
        )
    return BarycenterResult(w, residual, iterations, True, tuple(history))


def barycenter(mu, cfg=None, start=None):
    """
    Conformal barycenter B(mu) of an admissible measure

    Args:
        mu (SphereMeasure): Admissible measure
        cfg (SolverConfig): Solver settings
        start: Optional initial point

    Returns:
        BarycenterResult
    """
    _require_admissible(mu)
    points, masses = mu.support()
    return solve_cloud(points, masses, cfg, start)


def flow_barycenter(mu, tol=None):
    """
    Integrates dw/dt = V_mu(w) until the normalized field drops below tol

    Independent of the Newton solver; used as an oracle for it.

    Returns:
        BarycenterResult: iterations counts field evaluations
    """
    _require_admissible(mu)
    tol = SOLVER_CONFIG["flow_tolerance"] if tol is None else tol
    points, masses = mu.support()

    def velocity(_, w):
        return 0.5 * (1.0 - float(w @ w)) * cloud_field(points, masses, w)

    def settled(_, w):
        return float(np.linalg.norm(cloud_field(points, masses, w))) - tol

    settled.terminal = True
    settled.direction = -1

    w = initial_guess(points, masses, SOLVER_CONFIG["initial_radius_cap"])
    evaluations = 0
    for _ in range(SOLVER_CONFIG["flow_max_chunks"]):
        if settled(0.0, w) <= 0.0:
            break
        solution = solve_ivp(velocity, (0.0, SOLVER_CONFIG["flow_chunk"]), w, method="RK45",
                             rtol=1e-12, atol=1e-15, events=settled)
        evaluations += solution.nfev
        w = solution.y[:, -1]
        if solution.status == 1:
            break
    residual = float(np.linalg.norm(cloud_field(points, masses, w)))
    # the event fires on the dense output, so allow the last step's slack
    converged = residual <= 10.0 * tol
    if not converged:
        logger.warning("flow stopped at residual %.3e", residual)
    return BarycenterResult(w, residual, evaluations, converged)


def _concentration_check(mu, inside, threshold, axis):
    points, masses = mu.support()
    mass = float(masses[inside(points)].sum())
    inner = 0.5 * float((masses @ points) @ axis)
    hypothesis = mass >= threshold
    if hypothesis and inner <= 0.0:
        logger.error("mass %.6f near the axis but <V(0), axis> = %.3e", mass, inner)
    return BoundCheck(hypothesis, mass, threshold, inner)


def _unit_axis(mu, axis):
    if axis is None:
        axis = np.eye(mu.dim + 1)[0]
    axis = np.asarray(axis, dtype=float)
    return axis / np.linalg.norm(axis)


def direction_bound_check(mu, delta, axis=None):
    """
    Chordal-ball concentration lemma at the origin

    If mu puts mass >= (1 + delta^2 / 2) / 2 in {zeta : |zeta - axis| <= delta}
    then <V_mu(0), axis> > 0.

    Args:
        mu (SphereMeasure): Measure
        delta (float): Chordal radius in (0, sqrt 2)
        axis: Unit vector, defaults to e1

    Returns:
        BoundCheck: truthy unless the hypothesis held and the conclusion failed
    """
    if not 0.0 < delta < np.sqrt(2.0):
        raise InvalidInputError(f"delta must lie in (0, sqrt 2), got {delta}")
    axis = _unit_axis(mu, axis)
    return _concentration_check(
        mu,
        lambda p: np.linalg.norm(p - axis, axis=1) <= delta,
        0.5 * (1.0 + 0.5 * delta * delta),
        axis,
    )


def douady_earle_bound_check(mu, radius=np.pi / 4.0, threshold=2.0 / 3.0, axis=None):
    """Geodesic-ball version: mass >= 2/3 within angle pi/4 of the axis."""
    axis = _unit_axis(mu, axis)
    return _concentration_check(
        mu,
        lambda p: np.arccos(np.clip(p @ axis, -1.0, 1.0)) <= radius,
        threshold,
        axis,
    )


def inward_radius_probe(mu, samples, rng=None, radii=None):
    """
    Smallest sampled radius r beyond which V_mu points inwards

    Checks <V_mu(w), w> < 0 for `samples` directions on every radius of a
    grid in [r, 0.999].

    Returns:
        InwardProbe: radius 0.999 with found=False when even the outermost
        shell fails
    """
    _require_admissible(mu)
    rng = rng or np.random.default_rng(QUADRATURE_CONFIG["monte_carlo_seed"])
    radii = np.linspace(0.05, 0.999, 39) if radii is None else np.sort(np.asarray(radii, dtype=float))
    directions = random_sphere_points(rng, samples, mu.dim + 1)
    points, masses = mu.support()

    inward = []
    for radius in radii:
        ws = radius * directions
        inner = [float(cloud_field(points, masses, w) @ w) for w in ws]
        inward.append(max(inner) < 0.0)

    if not inward[-1]:
        logger.warning("field does not point inwards at radius %.3f", radii[-1])
        return InwardProbe(float(radii[-1]), False)
    index = len(radii) - 1
    while index > 0 and inward[index - 1]:
        index -= 1
    return InwardProbe(float(radii[index]), True)


def multistart_barycenter(mu, starts, rng, cfg=None):
    """
    Solves from random initial points; a unique zero gives a tiny spread

    Returns:
        MultistartResult: solutions and their largest distance to the first
    """
    _require_admissible(mu)
    points, masses = mu.support()
    initial = random_ball_points(rng, starts, mu.dim + 1, SOLVER_CONFIG["initial_radius_cap"])
    solutions = np.array([solve_cloud(points, masses, cfg, start).point for start in initial])
    spread = float(np.max(np.linalg.norm(solutions - solutions[0], axis=1)))
    return MultistartResult(solutions, spread)


def recentering_residual(mu, result):
    """|integral of zeta| for (g_{-B})_* mu; zero exactly when B was found."""
    points, masses = recentered_measure(mu, result.point).support()
    return float(np.linalg.norm(masses @ points))
