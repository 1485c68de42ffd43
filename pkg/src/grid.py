"""Piecewise-linear fields on a uniform 1D mesh.

Fields store interior nodal values only; both boundary values are zero by
construction. Integrals of nonlinear functions of a field use 3-point Gauss
quadrature per element, gradient terms use the element-constant slopes.
"""

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from pydantic_core import core_schema
from scipy.linalg import solve_triangular

from src.models.fucik_models import Domain, Exponent

GAUSS_POINTS = 0.5 + 0.5 * np.array([-np.sqrt(0.6), 0.0, np.sqrt(0.6)])
GAUSS_WEIGHTS = np.array([5.0, 8.0, 5.0]) / 18.0
# Values of the left and right hat functions at the Gauss points of an element.
SHAPE_LEFT = 1.0 - GAUSS_POINTS
SHAPE_RIGHT = GAUSS_POINTS


@dataclass(frozen=True, eq=False)
class Field:
    """Nodal coefficients of a P1 function that vanishes at both ends."""

    values: np.ndarray
    domain: Domain

    def __post_init__(self):
        values = np.array(self.values, dtype=float).reshape(-1)
        if values.shape[0] != self.domain.n_interior:
            raise ValueError(
                f"Field has {values.shape[0]} values but the domain has {self.domain.n_interior} interior nodes."
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Field values must be finite.")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def __get_pydantic_core_schema__(cls, source, handler):
        return core_schema.is_instance_schema(cls)

    def with_values(self, values: np.ndarray) -> "Field":
        return Field(values, self.domain)

    def scaled(self, factor: float) -> "Field":
        return Field(factor * self.values, self.domain)

    def __neg__(self) -> "Field":
        return Field(-self.values, self.domain)

    def __add__(self, other: "Field") -> "Field":
        return Field(self.values + other.values, self.domain)

    def __sub__(self, other: "Field") -> "Field":
        return Field(self.values - other.values, self.domain)

    def padded(self) -> np.ndarray:
        """Nodal values including the two boundary zeros."""
        return np.concatenate(([0.0], self.values, [0.0]))

    @classmethod
    def zeros(cls, domain: Domain) -> "Field":
        return cls(np.zeros(domain.n_interior), domain)

    @classmethod
    def interpolate(cls, func, domain: Domain) -> "Field":
        """Nodal interpolant of a vectorized function of x."""
        return cls(func(domain.nodes()), domain)


class Assembly:
    """Per-domain quadrature and stiffness data shared by every evaluation."""

    def __init__(self, domain: Domain):
        self.domain = domain
        self.h = domain.h
        n = domain.n_interior
        main = np.full(n, 2.0 / self.h)
        off = np.full(n - 1, -1.0 / self.h)
        self.stiffness = np.diag(main) + np.diag(off, 1) + np.diag(off, -1)
        cholesky = np.linalg.cholesky(self.stiffness)
        # K = L L^T, dual norm of g is |L^{-1} g|.
        self.chol_inv = solve_triangular(cholesky, np.eye(n), lower=True)

    @staticmethod
    def pad(values: np.ndarray) -> np.ndarray:
        return np.concatenate(([0.0], values, [0.0]))

    def slopes(self, values: np.ndarray) -> np.ndarray:
        return np.diff(self.pad(values)) / self.h

    def quadrature_values(self, values: np.ndarray) -> np.ndarray:
        """Field values at the Gauss points, shape (elements, 3)."""
        full = self.pad(values)
        return np.outer(full[:-1], SHAPE_LEFT) + np.outer(full[1:], SHAPE_RIGHT)

    def integrate(self, integrand: np.ndarray) -> float:
        """Integral of a function given at the Gauss points."""
        return float(self.h * np.sum(integrand @ GAUSS_WEIGHTS))

    def load(self, density: np.ndarray) -> np.ndarray:
        """Vector of integrals of density times each interior hat function."""
        weighted = self.h * density * GAUSS_WEIGHTS
        full = np.zeros(self.domain.n_interior + 2)
        full[:-1] += weighted @ SHAPE_LEFT
        full[1:] += weighted @ SHAPE_RIGHT
        return full[1:-1]

    def weighted_mass(self, density: np.ndarray) -> np.ndarray:
        """Dense tridiagonal matrix of integrals of density times products of hat functions."""
        weighted = self.h * density * GAUSS_WEIGHTS
        left_left = weighted @ (SHAPE_LEFT * SHAPE_LEFT)
        right_right = weighted @ (SHAPE_RIGHT * SHAPE_RIGHT)
        left_right = weighted @ (SHAPE_LEFT * SHAPE_RIGHT)
        diagonal = left_left[1:] + right_right[:-1]
        off = left_right[1:-1]
        return np.diag(diagonal) + np.diag(off, 1) + np.diag(off, -1)

    def gradient_energy(self, values: np.ndarray, p: Exponent) -> tuple[float, np.ndarray]:
        """Discrete integral of |u'|^p (regularized, zero at u = 0) and its nodal gradient."""
        slopes = self.slopes(values)
        r = slopes * slopes + p.eps_reg * p.eps_reg
        energy = self.h * float(np.sum(r ** (p.p / 2.0) - p.eps_reg ** p.p))
        flux = p.p * r ** ((p.p - 2.0) / 2.0) * slopes
        gradient = flux[:-1] - flux[1:]
        return energy, gradient

    def gradient_hessian(self, values: np.ndarray, p: Exponent) -> np.ndarray:
        slopes = self.slopes(values)
        squared = slopes * slopes
        r = squared + p.eps_reg * p.eps_reg
        ratio = np.divide(squared, r, out=np.zeros_like(r), where=r > 0.0)
        curvature = p.p * r ** ((p.p - 2.0) / 2.0) * (1.0 + (p.p - 2.0) * ratio) / self.h
        diagonal = curvature[:-1] + curvature[1:]
        off = -curvature[1:-1]
        return np.diag(diagonal) + np.diag(off, 1) + np.diag(off, -1)

    def dual_norm(self, gradient: np.ndarray) -> float:
        """Norm of a nodal gradient in the dual of the discrete H^1_0 seminorm."""
        return float(np.linalg.norm(self.chol_inv @ gradient))

    def precondition(self, gradient: np.ndarray) -> np.ndarray:
        """Riesz representative K^{-1} g of a nodal gradient."""
        return self.chol_inv.T @ (self.chol_inv @ gradient)

    def energy_norm(self, values: np.ndarray) -> float:
        """Discrete H^1_0 seminorm (v^T K v)^{1/2}."""
        return float(np.sqrt(max(values @ (self.stiffness @ values), 0.0)))


@lru_cache(maxsize=32)
def assembly_for(domain: Domain) -> Assembly:
    return Assembly(domain)


def lp_norm(u: Field, p: Exponent) -> float:
    asm = assembly_for(u.domain)
    return asm.integrate(np.abs(asm.quadrature_values(u.values)) ** p.p) ** (1.0 / p.p)


def grad_seminorm_energy(u: Field, p: Exponent) -> float:
    energy, _ = assembly_for(u.domain).gradient_energy(u.values, p)
    return energy


def positive_part(u: Field) -> Field:
    return u.with_values(np.maximum(u.values, 0.0))


def negative_part(u: Field) -> Field:
    return u.with_values(np.maximum(-u.values, 0.0))


def splitting_defect(u: Field, p: Exponent) -> float:
    """Gap between the gradient energy of u and the sum over its nodal sign parts.

    Zero unless some element carries a sign change.
    """
    whole = grad_seminorm_energy(u, p)
    return abs(whole - grad_seminorm_energy(positive_part(u), p) - grad_seminorm_energy(negative_part(u), p))


def sign_change_count(u: Field) -> int:
    full = u.padded()
    signs = np.sign(full[np.abs(full) > 0.0])
    return int(np.count_nonzero(np.diff(signs)))


def max_norm(u: Field) -> float:
    return float(np.max(np.abs(u.values))) if u.values.size else 0.0


def sine_mode(domain: Domain, k: int) -> Field:
    """Interpolant of sin(k pi (x - left) / length)."""
    return Field.interpolate(lambda x: np.sin(k * np.pi * (x - domain.left) / domain.length), domain)
