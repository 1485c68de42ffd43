"""Model nonlinearities f(t) with prescribed slopes at 0 and at infinity.

f(t) = A(t) t^{p-1} for t >= 0 and -B(|t|) |t|^{p-1} for t < 0, where A and B
move from (a0, b0) to (a, b) through a smoothstep in |t| on [t_small, t_large].
The smoothstep is a cubic in |t|, so the primitive is a finite sum of powers
and is evaluated in closed form.
"""

from functools import lru_cache

import numpy as np
from numpy.polynomial import Polynomial
from pydantic import BaseModel, Field, model_validator

from src.models.fucik_models import Exponent, FucikParams, Sign

# Floor for |t| where t^{p-2} appears in derivatives with p < 2.
DERIVATIVE_FLOOR = 1e-12


@lru_cache(maxsize=64)
def blend_coefficients(t_small: float, t_large: float) -> tuple[float, ...]:
    """Coefficients of 3x^2 - 2x^3, x = (r - t_small) / (t_large - t_small), as a polynomial in r."""
    width = t_large - t_small
    x = Polynomial([-t_small / width, 1.0 / width])
    smoothstep = Polynomial([0.0, 0.0, 3.0, -2.0])
    coefficients = smoothstep(x).coef
    return tuple(np.pad(coefficients, (0, 4 - len(coefficients))))


class Nonlinearity(BaseModel):
    p: Exponent
    ab0: FucikParams  # slopes near 0
    ab: FucikParams  # slopes at infinity
    t_small: float = Field(gt=0.0)
    t_large: float = Field(gt=0.0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_blend_interval(self) -> "Nonlinearity":
        if self.t_large <= self.t_small:
            raise ValueError("t_large must be greater than t_small.")
        return self

    @classmethod
    def fucik(cls, ab: FucikParams, p: Exponent) -> "Nonlinearity":
        """Pure asymmetric nonlinearity a (t+)^{p-1} - b (t-)^{p-1}."""
        return cls(p=p, ab0=ab, ab=ab, t_small=1.0, t_large=2.0)

    def truncated(self, sign: Sign) -> "Nonlinearity":
        """f restricted to one sign of t, zero on the other side."""
        if sign is Sign.positive:
            ab0 = FucikParams(a=self.ab0.a, b=0.0)
            ab = FucikParams(a=self.ab.a, b=0.0)
        else:
            ab0 = FucikParams(a=0.0, b=self.ab0.b)
            ab = FucikParams(a=0.0, b=self.ab.b)
        return self.model_copy(update={"ab0": ab0, "ab": ab})

    @property
    def is_pure(self) -> bool:
        return self.ab0 == self.ab

    def _blend(self, r: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Smoothstep value and derivative in r = |t|."""
        width = self.t_large - self.t_small
        x = np.clip((r - self.t_small) / width, 0.0, 1.0)
        value = x * x * (3.0 - 2.0 * x)
        slope = np.where((r > self.t_small) & (r < self.t_large), 6.0 * x * (1.0 - x) / width, 0.0)
        # Exact plateaus outside the blend.
        value = np.where(r <= self.t_small, 0.0, np.where(r >= self.t_large, 1.0, value))
        return value, slope

    def _slope_coefficient(self, r: np.ndarray, negative: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        c0 = np.where(negative, self.ab0.b, self.ab0.a)
        c_inf = np.where(negative, self.ab.b, self.ab.a)
        beta, dbeta = self._blend(r)
        return c0 + (c_inf - c0) * beta, (c_inf - c0) * dbeta

    def f(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r = np.abs(t)
        negative = t < 0.0
        coefficient, _ = self._slope_coefficient(r, negative)
        return np.where(negative, -1.0, 1.0) * coefficient * r ** (self.p.p - 1.0)

    def df(self, t: np.ndarray) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        r = np.abs(t)
        negative = t < 0.0
        coefficient, dcoefficient = self._slope_coefficient(r, negative)
        p = self.p.p
        floored = np.maximum(r, DERIVATIVE_FLOOR) if p < 2.0 else r
        return dcoefficient * r ** (p - 1.0) + (p - 1.0) * coefficient * floored ** (p - 2.0)

    def _primitive_branch(self, r: np.ndarray, c0: float, c_inf: float) -> np.ndarray:
        p = self.p.p
        ts, tl = self.t_small, self.t_large
        result = c0 * r**p / p
        if c0 == c_inf:
            return result
        coefficients = blend_coefficients(ts, tl)
        inside = np.minimum(r, tl)

        def blend_integral(upper):
            return sum(
                beta_k * (upper ** (k + p) - ts ** (k + p)) / (k + p) for k, beta_k in enumerate(coefficients)
            )

        in_blend = (r > ts) & (r < tl)
        result = np.where(in_blend, result + (c_inf - c0) * blend_integral(inside), result)
        at_large = c0 * tl**p / p + (c_inf - c0) * blend_integral(tl)
        beyond = at_large + c_inf * (r**p - tl**p) / p
        return np.where(r >= tl, beyond, result)

    def F(self, t: np.ndarray) -> np.ndarray:
        """Primitive of f with F(0) = 0."""
        t = np.asarray(t, dtype=float)
        r = np.abs(t)
        positive = self._primitive_branch(r, self.ab0.a, self.ab.a)
        negative = self._primitive_branch(r, self.ab0.b, self.ab.b)
        return np.where(t < 0.0, negative, positive)


def make_model_nonlinearity(
    ab0: FucikParams, ab: FucikParams, p: Exponent, t_small: float, t_large: float
) -> Nonlinearity:
    """Nonlinearity with slopes ab0 for |t| <= t_small and ab for |t| >= t_large."""
    return Nonlinearity(p=p, ab0=ab0, ab=ab, t_small=t_small, t_large=t_large)
