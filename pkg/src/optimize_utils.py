"""Newton, deflated Newton and quasi-Newton solvers for functionals on fields.

Residuals are measured in the dual norm of the discrete H^1_0 seminorm, so
tolerances do not depend on the mesh.
"""

import logging
from dataclasses import dataclass, field as dataclass_field
from typing import Callable, Optional

import numpy as np
from scipy.optimize import minimize

from src.energy import FunctionalHandle
from src.grid import Field, assembly_for


@dataclass
class SolverOutcome:
    field: Field
    residual: float
    iterations: int
    converged: bool


def dual_residual(handle: FunctionalHandle, u: Field) -> float:
    return assembly_for(u.domain).dual_norm(handle.gradient(u).values)


def central_difference(func: Callable[[Field], float], u: Field, v: Field, delta: float = 1e-6) -> float:
    """Centered-difference directional derivative of func at u along v."""
    return (func(u + v.scaled(delta)) - func(u - v.scaled(delta))) / (2.0 * delta)


def gradient_check(handle: FunctionalHandle, u: Field, v: Field, delta: float = 1e-6) -> float:
    """Relative mismatch between the analytic and the finite-difference directional derivative."""
    analytic = float(handle.gradient(u).values @ v.values)
    numeric = central_difference(handle.value, u, v, delta)
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-12)


@dataclass
class Deflation:
    """Deflation operator M(u) = prod_k (|u - u_k|^{-power} + shift) over known roots."""

    roots: list[Field] = dataclass_field(default_factory=list)
    power: float = 2.0
    shift: float = 1.0

    def factor(self, u: Field) -> float:
        asm = assembly_for(u.domain)
        result = 1.0
        for root in self.roots:
            distance = asm.energy_norm(u.values - root.values)
            result *= distance ** (-self.power) + self.shift if distance > 0.0 else np.inf
        return result

    def log_gradient(self, u: Field) -> np.ndarray:
        """Nodal gradient of log M at u."""
        asm = assembly_for(u.domain)
        gradient = np.zeros_like(u.values)
        for root in self.roots:
            difference = u.values - root.values
            squared = float(difference @ (asm.stiffness @ difference))
            if squared <= 0.0:
                continue
            term = squared ** (-self.power / 2.0)
            dterm = -self.power * squared ** (-self.power / 2.0 - 1.0) * (asm.stiffness @ difference)
            gradient += dterm / (term + self.shift)
        return gradient


def newton_solve(
    handle: FunctionalHandle,
    u0: Field,
    tol: float,
    max_iter: int = 60,
    deflation: Optional[Deflation] = None,
) -> SolverOutcome:
    """Damped Newton on grad = 0 with a dense Hessian.

    With a deflation the update is the Newton step of the deflated residual
    M(u) grad(u), and backtracking monitors M(u) |grad(u)|.
    """
    if handle.hessian is None:
        raise ValueError(f"{handle.tag} carries no Hessian.")
    asm = assembly_for(u0.domain)
    u = u0
    gradient = handle.gradient(u).values
    residual = asm.dual_norm(gradient)

    def merit(field: Field, value: float) -> float:
        return value if deflation is None or not deflation.roots else deflation.factor(field) * value

    current = merit(u, residual)
    completed = 0
    for iteration in range(max_iter):
        if residual <= tol:
            break
        try:
            delta = np.linalg.solve(handle.hessian(u), -gradient)
        except np.linalg.LinAlgError:
            logging.debug(f"{handle.tag}: singular Hessian at Newton iteration {iteration}")
            break
        if deflation is not None and deflation.roots:
            denominator = 1.0 - float(deflation.log_gradient(u) @ delta)
            if abs(denominator) > 1e-14:
                delta = delta / denominator
        step = 1.0
        while step >= 1e-6:
            candidate = u.with_values(u.values + step * delta)
            candidate_gradient = handle.gradient(candidate).values
            candidate_residual = asm.dual_norm(candidate_gradient)
            candidate_merit = merit(candidate, candidate_residual)
            if np.isfinite(candidate_merit) and candidate_merit < current:
                u, gradient, residual, current = candidate, candidate_gradient, candidate_residual, candidate_merit
                completed += 1
                break
            step *= 0.5
        else:
            logging.debug(f"{handle.tag}: Newton line search failed at iteration {iteration}")
            break
        logging.debug(f"{handle.tag}: Newton iteration={iteration} residual={residual:.3e} step={step:g}")
    return SolverOutcome(u, residual, completed, residual <= tol)


def quasi_newton_minimize(handle: FunctionalHandle, u0: Field, gtol: float = 1e-10, max_iter: int = 5000) -> Field:
    """L-BFGS-B in the coordinates z = L^T u, where K = L L^T is the stiffness matrix.

    In these coordinates the Euclidean gradient norm is the dual norm.
    """
    asm = assembly_for(u0.domain)
    to_field = asm.chol_inv.T

    def objective(z: np.ndarray) -> tuple[float, np.ndarray]:
        u = u0.with_values(to_field @ z)
        return handle.value(u), asm.chol_inv @ handle.gradient(u).values

    z0 = np.linalg.solve(to_field, u0.values)
    result = minimize(objective, z0, jac=True, method="L-BFGS-B", options={"gtol": gtol, "maxiter": max_iter})
    logging.debug(f"{handle.tag}: L-BFGS-B finished with status {result.status} after {result.nit} iterations")
    return u0.with_values(to_field @ result.x)
