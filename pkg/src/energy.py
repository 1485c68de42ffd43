"""Functionals of the asymmetric p-Laplacian problem and their nodal gradients.

All gradients are derivatives with respect to the interior nodal values, so a
vanishing gradient is the discrete weak form of the corresponding equation.
"""

import logging
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from src.exceptions import ConstraintViolationError, OnSpectrumBandError, PreconditionError
from src.grid import Field, assembly_for, grad_seminorm_energy, lp_norm
from src.models.fucik_models import Exponent, FucikParams, PerturbationSpec, ShiftParam, Sign
from src.models.spectrum_models import SpectrumData
from src.nonlinearity import DERIVATIVE_FLOOR, Nonlinearity

SPHERE_TOL = 1e-10


@dataclass(frozen=True)
class FunctionalHandle:
    """Value and gradient of a functional on fields, with an optional Hessian."""

    value: Callable[[Field], float]
    gradient: Callable[[Field], Field]
    tag: str
    hessian: Optional[Callable[[Field], np.ndarray]] = None

    def __call__(self, u: Field) -> float:
        return self.value(u)


def _power_parts(u: Field, p: Exponent) -> tuple[np.ndarray, np.ndarray]:
    """Positive and negative parts of the field at the quadrature points."""
    q = assembly_for(u.domain).quadrature_values(u.values)
    return np.maximum(q, 0.0), np.maximum(-q, 0.0)


def sign_integrals(u: Field, p: Exponent) -> tuple[float, float]:
    """Integrals of (u+)^p and (u-)^p."""
    asm = assembly_for(u.domain)
    plus, minus = _power_parts(u, p)
    return asm.integrate(plus**p.p), asm.integrate(minus**p.p)


def sign_gradients(u: Field, p: Exponent) -> tuple[np.ndarray, np.ndarray]:
    """Nodal gradients of the integrals of (u+)^p and (u-)^p."""
    asm = assembly_for(u.domain)
    plus, minus = _power_parts(u, p)
    return p.p * asm.load(plus ** (p.p - 1.0)), -p.p * asm.load(minus ** (p.p - 1.0))


def sign_hessians(u: Field, p: Exponent) -> tuple[np.ndarray, np.ndarray]:
    asm = assembly_for(u.domain)
    plus, minus = _power_parts(u, p)
    scale = p.p * (p.p - 1.0)
    if p.p < 2.0:
        plus_density = np.where(plus > 0.0, np.maximum(plus, DERIVATIVE_FLOOR) ** (p.p - 2.0), 0.0)
        minus_density = np.where(minus > 0.0, np.maximum(minus, DERIVATIVE_FLOOR) ** (p.p - 2.0), 0.0)
    else:
        plus_density = np.where(plus > 0.0, plus ** (p.p - 2.0), 0.0)
        minus_density = np.where(minus > 0.0, minus ** (p.p - 2.0), 0.0)
    return scale * asm.weighted_mass(plus_density), scale * asm.weighted_mass(minus_density)


def eval_I(u: Field, ab: FucikParams, p: Exponent) -> float:
    plus, minus = sign_integrals(u, p)
    return grad_seminorm_energy(u, p) - ab.a * plus - ab.b * minus


def grad_I(u: Field, ab: FucikParams, p: Exponent) -> Field:
    _, gradient = assembly_for(u.domain).gradient_energy(u.values, p)
    plus, minus = sign_gradients(u, p)
    return u.with_values(gradient - ab.a * plus - ab.b * minus)


def hessian_I(u: Field, ab: FucikParams, p: Exponent) -> np.ndarray:
    plus, minus = sign_hessians(u, p)
    return assembly_for(u.domain).gradient_hessian(u.values, p) - ab.a * plus - ab.b * minus


def eval_J(u: Field, s: ShiftParam, p: Exponent) -> float:
    plus, _ = sign_integrals(u, p)
    return grad_seminorm_energy(u, p) - s.s * plus


def grad_J(u: Field, s: ShiftParam, p: Exponent) -> Field:
    return grad_I(u, FucikParams(a=s.s, b=0.0), p)


def check_on_sphere(w: Field, p: Exponent, tol: float = SPHERE_TOL) -> None:
    """Raises:
    ConstraintViolationError: w is not on the unit L^p sphere
    """
    norm = lp_norm(w, p)
    if abs(norm - 1.0) > tol:
        raise ConstraintViolationError(f"Field has L^{p.p:g} norm {norm:.12g}, expected 1.")


def eval_Jtilde(w, s: ShiftParam, p: Exponent) -> float:
    """J_s restricted to the unit sphere. Accepts a SpherePoint or a Field."""
    field = getattr(w, "field", w)
    check_on_sphere(field, p)
    return eval_J(field, s, p)


def eval_Phi(u: Field, f: Nonlinearity, p: Exponent) -> float:
    asm = assembly_for(u.domain)
    q = asm.quadrature_values(u.values)
    return grad_seminorm_energy(u, p) - p.p * asm.integrate(f.F(q))


def eval_Psi(u: Field, f: Nonlinearity, ab: FucikParams, p: Exponent) -> float:
    """Phi - I(ab), integrated from the primitives: -p times the integral of F(u) - (a (u+)^p + b (u-)^p) / p."""
    asm = assembly_for(u.domain)
    q = asm.quadrature_values(u.values)
    plus, minus = np.maximum(q, 0.0), np.maximum(-q, 0.0)
    return -p.p * asm.integrate(f.F(q) - (ab.a * plus**p.p + ab.b * minus**p.p) / p.p)


def grad_Phi(u: Field, f: Nonlinearity, p: Exponent) -> Field:
    asm = assembly_for(u.domain)
    _, gradient = asm.gradient_energy(u.values, p)
    q = asm.quadrature_values(u.values)
    return u.with_values(gradient - p.p * asm.load(f.f(q)))


def hessian_Phi(u: Field, f: Nonlinearity, p: Exponent) -> np.ndarray:
    asm = assembly_for(u.domain)
    q = asm.quadrature_values(u.values)
    return asm.gradient_hessian(u.values, p) - p.p * asm.weighted_mass(f.df(q))


def eval_PhiPM(u: Field, f: Nonlinearity, sign: Sign, p: Exponent) -> float:
    return eval_Phi(u, f.truncated(sign), p)


def grad_PhiPM(u: Field, f: Nonlinearity, sign: Sign, p: Exponent) -> Field:
    return grad_Phi(u, f.truncated(sign), p)


def I_handle(ab: FucikParams, p: Exponent) -> FunctionalHandle:
    return FunctionalHandle(
        value=lambda u: eval_I(u, ab, p),
        gradient=lambda u: grad_I(u, ab, p),
        hessian=lambda u: hessian_I(u, ab, p),
        tag=f"I[a={ab.a:g},b={ab.b:g}]",
    )


def Phi_handle(f: Nonlinearity, p: Exponent, sign: Optional[Sign] = None) -> FunctionalHandle:
    g = f if sign is None else f.truncated(sign)
    suffix = "" if sign is None else sign.value
    return FunctionalHandle(
        value=lambda u: eval_Phi(u, g, p),
        gradient=lambda u: grad_Phi(u, g, p),
        hessian=lambda u: hessian_Phi(u, g, p),
        tag=f"Phi{suffix}",
    )


def smoothstep(x: float) -> tuple[float, float]:
    """3x^2 - 2x^3 clamped to [0, 1], with its derivative."""
    if x <= 0.0:
        return 0.0, 0.0
    if x >= 1.0:
        return 1.0, 0.0
    return x * x * (3.0 - 2.0 * x), 6.0 * x * (1.0 - x)


def cutoff_inner(t: float) -> tuple[float, float]:
    """1 on [0, 1/2], 0 on [1, inf)."""
    value, slope = smoothstep(2.0 * t - 1.0)
    return 1.0 - value, -2.0 * slope


def cutoff_outer(t: float) -> tuple[float, float]:
    """0 on [0, 1], 1 on [2, inf)."""
    return smoothstep(t - 1.0)


def seminorm(u: Field, p: Exponent) -> tuple[float, np.ndarray]:
    """W^{1,p} seminorm and its nodal gradient."""
    energy, gradient = assembly_for(u.domain).gradient_energy(u.values, p)
    if energy <= 0.0:
        return 0.0, np.zeros_like(gradient)
    norm = energy ** (1.0 / p.p)
    return norm, (norm / (p.p * energy)) * gradient


def build_PhiTilde(
    f: Nonlinearity,
    ab0: FucikParams,
    ab: FucikParams,
    pert: PerturbationSpec,
    p: Exponent,
    spectrum: Optional[SpectrumData] = None,
    band_fraction: float = 0.02,
) -> FunctionalHandle:
    """Surgery on Phi that equals I(ab0) near 0, Phi on the annulus [rho, R] and I(ab) far out.

    Raises:
        PreconditionError: rho >= R
        OnSpectrumBandError: ab0 or ab lies within the rejection band of the spectrum
    """
    if pert.rho >= pert.R:
        raise PreconditionError(f"rho = {pert.rho:g} must be smaller than R = {pert.R:g}.")
    if spectrum is not None:
        band = band_fraction * spectrum.lambda1
        for name, point in (("(a0,b0)", ab0), ("(a,b)", ab)):
            distance = spectrum.distance_to(point.a, point.b)
            if distance < band:
                raise OnSpectrumBandError(
                    f"{name} = ({point.a:g}, {point.b:g}) is {distance:.4g} from the spectrum, "
                    f"inside the band {band:.4g}; the perturbed functional needs both points off the spectrum."
                )
    rho, R = pert.rho, pert.R

    def region(u: Field) -> tuple[str, float, np.ndarray]:
        norm, dnorm = seminorm(u, p)
        if norm <= 0.5 * rho:
            return "inner", norm, dnorm
        if rho <= norm <= R:
            return "middle", norm, dnorm
        if norm >= 2.0 * R:
            return "outer", norm, dnorm
        return ("inner_blend" if norm < rho else "outer_blend"), norm, dnorm

    def value(u: Field) -> float:
        where, norm, _ = region(u)
        if where == "inner":
            return eval_I(u, ab0, p)
        if where == "middle":
            return eval_Phi(u, f, p)
        if where == "outer":
            return eval_I(u, ab, p)
        phi = eval_Phi(u, f, p)
        if where == "inner_blend":
            weight, _ = cutoff_inner(norm / rho)
            return phi - weight * (phi - eval_I(u, ab0, p))
        weight, _ = cutoff_outer(norm / R)
        return phi - weight * (phi - eval_I(u, ab, p))

    def gradient(u: Field) -> Field:
        where, norm, dnorm = region(u)
        if where == "inner":
            return grad_I(u, ab0, p)
        if where == "middle":
            return grad_Phi(u, f, p)
        if where == "outer":
            return grad_I(u, ab, p)
        phi = eval_Phi(u, f, p)
        dphi = grad_Phi(u, f, p).values
        if where == "inner_blend":
            weight, dweight = cutoff_inner(norm / rho)
            other, dother, scale = eval_I(u, ab0, p), grad_I(u, ab0, p).values, rho
        else:
            weight, dweight = cutoff_outer(norm / R)
            other, dother, scale = eval_I(u, ab, p), grad_I(u, ab, p).values, R
        psi = phi - other
        values = dphi - weight * (dphi - dother) - (dweight / scale) * psi * dnorm
        return u.with_values(values)

    logging.debug(f"Perturbed functional built with rho={rho:.4g}, R={R:.4g}")
    return FunctionalHandle(value=value, gradient=gradient, tag=f"PhiTilde[rho={rho:g},R={R:g}]")
