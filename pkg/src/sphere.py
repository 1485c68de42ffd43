"""The discrete unit L^p sphere: normalization, projections, paths and descent."""

import logging
from dataclasses import dataclass, field as dataclass_field
from typing import Optional

import numpy as np
from pydantic_core import core_schema

from src.energy import SPHERE_TOL, eval_J, grad_I, grad_J, sign_gradients, sign_hessians
from src.exceptions import ConstraintViolationError, DegenerateInputError
from src.grid import Field, assembly_for, lp_norm, negative_part, positive_part
from src.models.fucik_models import Exponent, FucikParams, ShiftParam

ARMIJO = 1e-4
# Pre-normalization norm below which a chordal interpolant is rejected.
INTERPOLATION_GUARD = 0.1
# Smallest damping factor tried on a bordered Newton step.
NEWTON_MIN_STEP = 1e-6


@dataclass(frozen=True, eq=False)
class SpherePoint:
    field: Field
    p: Exponent

    def __post_init__(self):
        norm = lp_norm(self.field, self.p)
        if abs(norm - 1.0) > SPHERE_TOL:
            raise ConstraintViolationError(f"SpherePoint has L^{self.p.p:g} norm {norm:.12g}.")

    @classmethod
    def __get_pydantic_core_schema__(cls, source, handler):
        return core_schema.is_instance_schema(cls)

    @property
    def values(self) -> np.ndarray:
        return self.field.values

    @property
    def domain(self):
        return self.field.domain

    def __neg__(self) -> "SpherePoint":
        return SpherePoint(-self.field, self.p)


@dataclass
class Path:
    """Ordered beads on the sphere; the endpoints stay fixed while the path deforms."""

    beads: list[SpherePoint]
    params: Optional[np.ndarray] = dataclass_field(default=None)

    def __post_init__(self):
        if len(self.beads) < 2:
            raise ValueError("A path needs at least two beads.")
        if self.params is None:
            self.params = np.linspace(0.0, 1.0, len(self.beads))

    @classmethod
    def __get_pydantic_core_schema__(cls, source, handler):
        return core_schema.is_instance_schema(cls)

    def __len__(self) -> int:
        return len(self.beads)

    def matrix(self) -> np.ndarray:
        return np.array([bead.values for bead in self.beads])

    def values_of(self, s: ShiftParam) -> np.ndarray:
        return np.array([eval_J(bead.field, s, bead.p) for bead in self.beads])

    def spacings(self) -> np.ndarray:
        """Energy-norm distances between consecutive beads."""
        asm = assembly_for(self.beads[0].domain)
        matrix = self.matrix()
        return np.array([asm.energy_norm(step) for step in np.diff(matrix, axis=0)])


def normalize(u: Field, p: Exponent) -> SpherePoint:
    """Raises:
    DegenerateInputError: u is the zero field
    """
    norm = lp_norm(u, p)
    if norm <= 0.0:
        raise DegenerateInputError("Cannot normalize the zero field.")
    return SpherePoint(u.scaled(1.0 / norm), p)


def constraint_gradient(w: Field, p: Exponent) -> np.ndarray:
    """Nodal gradient of the integral of |w|^p, the normal of the sphere at w."""
    plus, minus = sign_gradients(w, p)
    return plus + minus


def tangent_project(w: SpherePoint, g: Field, p: Exponent, metric: str = "euclidean") -> Field:
    """Remove from g its component along the sphere normal at w.

    With metric="sobolev" the result is the K^{-1}-preconditioned direction,
    still orthogonal to the normal in the nodal pairing.
    """
    normal = constraint_gradient(w.field, p)
    if metric == "sobolev":
        asm = assembly_for(w.domain)
        riesz_g = asm.precondition(g.values)
        riesz_n = asm.precondition(normal)
        alpha = float(normal @ riesz_g) / float(normal @ riesz_n)
        return g.with_values(riesz_g - alpha * riesz_n)
    if metric != "euclidean":
        raise ValueError(f"Unknown metric: {metric}")
    alpha = float(normal @ g.values) / float(normal @ normal)
    return g.with_values(g.values - alpha * normal)


def retract(w: SpherePoint, v: Field) -> SpherePoint:
    """Raises:
    DegenerateInputError: the step annihilates the field
    """
    moved = w.field + v
    if lp_norm(moved, w.p) <= 0.0:
        raise DegenerateInputError("The step annihilates the field.")
    return normalize(moved, w.p)


def sign_path(u0: SpherePoint, p: Exponent, points: int = 21) -> Path:
    """Path from u0 to the normalized positive part of u0 collapsing the negative part.

    Raises:
        DegenerateInputError: u0 has no positive part
    """
    plus = positive_part(u0.field)
    minus = negative_part(u0.field)
    if not np.any(plus.values > 0.0):
        raise DegenerateInputError("The sign path needs a field with a nonzero positive part.")
    params = np.linspace(0.0, 1.0, points)
    beads = [u0] + [normalize(plus - minus.scaled(1.0 - t), p) for t in params[1:]]
    return Path(beads, params)


def chordal_interpolate(first: SpherePoint, second: SpherePoint, t: float) -> SpherePoint:
    """Normalized linear interpolation between two sphere points.

    Raises:
        DegenerateInputError: the chord passes too close to the zero field
    """
    chord = first.field.scaled(1.0 - t) + second.field.scaled(t)
    norm = lp_norm(chord, first.p)
    if norm < INTERPOLATION_GUARD:
        raise DegenerateInputError(f"Interpolant norm {norm:.3g} is below {INTERPOLATION_GUARD}.")
    return SpherePoint(chord.scaled(1.0 / norm), first.p)


def geodesic_interpolate(first: SpherePoint, second: SpherePoint, t: float) -> SpherePoint:
    """Great-circle interpolation in the nodal inner product, normalized back onto the L^p sphere.

    Used where the chord between two beads passes too close to the zero field.

    Raises:
        DegenerateInputError: the two points are antipodal, so the great circle is not unique
    """
    a = first.values / np.linalg.norm(first.values)
    b = second.values / np.linalg.norm(second.values)
    cosine = float(np.clip(a @ b, -1.0, 1.0))
    angle = float(np.arccos(cosine))
    if np.sin(angle) < 1e-12:
        if cosine > 0.0:
            return first
        raise DegenerateInputError("Antipodal points have no unique great circle between them.")
    mixed = (np.sin((1.0 - t) * angle) * a + np.sin(t * angle) * b) / np.sin(angle)
    return normalize(first.field.with_values(mixed), first.p)


def seed_path(start: SpherePoint, seed: Field, beads: int) -> Path:
    """Beads normalize(cos(theta) start + sin(theta) w) for theta from 0 to pi.

    w is the normalized seed with its component along start removed, so the
    path routes around the origin and ends at -start.
    """
    p = start.p
    base = start.values
    direction = seed.values - (float(seed.values @ base) / float(base @ base)) * base
    w = normalize(seed.with_values(direction), p).values
    thetas = np.linspace(0.0, np.pi, beads)
    points = [start]
    for theta in thetas[1:-1]:
        points.append(normalize(start.field.with_values(np.cos(theta) * base + np.sin(theta) * w), p))
    points.append(-start)
    return Path(points, thetas / np.pi)


def sphere_residual(w: Field, s: ShiftParam, p: Exponent) -> tuple[float, float]:
    """Value c of J_s at w and the dual norm of grad I(w, (s + c, c)).

    On the sphere that gradient equals the gradient of J_s minus c times the
    sphere normal, so it vanishes exactly at constrained critical points.
    """
    c = eval_J(w, s, p)
    residual = assembly_for(w.domain).dual_norm(grad_I(w, FucikParams(a=s.s + c, b=c), p).values)
    return c, residual


@dataclass
class DescentResult:
    point: SpherePoint
    value: float
    residual: float
    iterations: int
    converged: bool
    history: list[tuple[int, float, float]] = dataclass_field(default_factory=list)


def descent_direction(w: SpherePoint, s: ShiftParam, p: Exponent) -> tuple[np.ndarray, float]:
    """Preconditioned tangent descent direction d and the predicted decrease <grad J, d>."""
    gradient = grad_J(w.field, s, p)
    direction = tangent_project(w, gradient, p, metric="sobolev").values
    return direction, float(gradient.values @ direction)


def perpendicular_to_path(w: SpherePoint, direction: np.ndarray, tangent: np.ndarray, p: Exponent) -> np.ndarray:
    """Remove from a tangent direction its energy-inner-product component along a path tangent.

    The path tangent is first projected onto the tangent space of the sphere at
    w, so the result stays tangent to the sphere and remains a descent direction.
    """
    asm = assembly_for(w.domain)
    projected = tangent_project(w, w.field.with_values(tangent), p).values
    norm = asm.energy_norm(projected)
    if norm <= 0.0:
        return direction
    unit = projected / norm
    return direction - float(direction @ (asm.stiffness @ unit)) * unit


def armijo_step(
    w: SpherePoint,
    s: ShiftParam,
    p: Exponent,
    value: float,
    step: float,
    direction: Optional[np.ndarray] = None,
    max_move: Optional[float] = None,
    max_backtracks: int = 40,
) -> tuple[SpherePoint, float, float, bool]:
    """One backtracking step along a tangent descent direction.

    The direction defaults to the preconditioned one. With max_move the step is
    capped so that the energy norm of the displacement does not exceed it.
    Returns the new point, its value, the accepted step and whether the step was accepted.
    """
    gradient = grad_J(w.field, s, p).values
    if direction is None:
        direction = tangent_project(w, w.field.with_values(gradient), p, metric="sobolev").values
    decrease = float(gradient @ direction)
    if decrease <= 0.0:
        return w, value, step, False
    if max_move is not None:
        if max_move <= 0.0:
            return w, value, step, False
        length = assembly_for(w.domain).energy_norm(direction)
        if length > 0.0:
            step = min(step, max_move / length)
    for _ in range(max_backtracks):
        try:
            candidate = retract(w, w.field.with_values(-step * direction))
        except DegenerateInputError:
            step *= 0.5
            continue
        candidate_value = eval_J(candidate.field, s, p)
        if candidate_value <= value - ARMIJO * step * decrease:
            return candidate, candidate_value, step, True
        step *= 0.5
    return w, value, step, False


def descend(
    w: SpherePoint,
    s: ShiftParam,
    p: Exponent,
    tol: float,
    max_iter: int = 100000,
    damping: float = 1.0,
    log_every: int = 0,
) -> DescentResult:
    """Minimize J_s on the sphere from w until the residual certificate drops below tol."""
    step = damping / p.p
    value = eval_J(w.field, s, p)
    history = []
    residual = np.inf
    for iteration in range(max_iter):
        _, residual = sphere_residual(w.field, s, p)
        if log_every and iteration % log_every == 0:
            history.append((iteration, value, residual))
            logging.debug(f"descent iteration={iteration} value={value:.10g} residual={residual:.3e}")
        if residual <= tol:
            return DescentResult(w, value, residual, iteration, True, history)
        w, value, accepted, moved = armijo_step(w, s, p, value, min(2.0 * step, 4.0 * damping / p.p))
        if not moved:
            break
        step = accepted
    _, residual = sphere_residual(w.field, s, p)
    return DescentResult(w, value, residual, max_iter, residual <= tol, history)


def newton_polish(
    w: SpherePoint, s: ShiftParam, p: Exponent, tol: float, max_iter: int = 50
) -> tuple[SpherePoint, float, float]:
    """Bordered Newton on (w, c) for grad I(w, (s + c, c)) = 0 with the sphere constraint.

    Steps are damped by backtracking on the residual certificate. Returns the
    best point found, its value and residual.
    """
    asm = assembly_for(w.domain)
    n = w.domain.n_interior
    c, residual = sphere_residual(w.field, s, p)
    for iteration in range(max_iter):
        if residual <= tol:
            break
        ab = FucikParams(a=s.s + c, b=c)
        plus_grad, minus_grad = sign_gradients(w.field, p)
        plus_hess, minus_hess = sign_hessians(w.field, p)
        normal = plus_grad + minus_grad
        jacobian = np.zeros((n + 1, n + 1))
        jacobian[:n, :n] = asm.gradient_hessian(w.values, p) - ab.a * plus_hess - ab.b * minus_hess
        jacobian[:n, n] = -normal
        jacobian[n, :n] = normal
        rhs = np.concatenate((grad_I(w.field, ab, p).values, [0.0]))
        try:
            delta = np.linalg.solve(jacobian, -rhs)
        except np.linalg.LinAlgError:
            logging.debug("bordered Newton: singular Jacobian")
            break
        step = 1.0
        improved = False
        while step > NEWTON_MIN_STEP:
            try:
                candidate = retract(w, w.field.with_values(step * delta[:n]))
            except DegenerateInputError:
                step *= 0.5
                continue
            candidate_c, candidate_residual = sphere_residual(candidate.field, s, p)
            if candidate_residual < residual:
                w, c, residual = candidate, candidate_c, candidate_residual
                improved = True
                break
            step *= 0.5
        logging.debug(f"bordered Newton iteration={iteration} value={c:.12g} residual={residual:.3e}")
        if not improved:
            break
    return w, c, residual
