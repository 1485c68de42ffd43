import math
from enum import Enum

import numpy as np
from pydantic import BaseModel, Field, field_validator, model_validator

DEFAULT_EPS_REG = 1e-8


class Sign(str, Enum):
    positive = "+"
    negative = "-"

    @property
    def factor(self) -> int:
        return 1 if self is Sign.positive else -1


class SignClass(str, Enum):
    positive = "positive"
    negative = "negative"
    sign_changing = "sign-changing"
    trivial = "trivial"


class ScenarioTag(str, Enum):
    positive_crossing = "positive_crossing"  # slopes cross lambda1 in a
    negative_crossing = "negative_crossing"  # slopes cross lambda1 in b
    c2_crossing = "c2_crossing"  # the two points lie on opposite sides of C(2)
    fixed_sign = "fixed_sign"  # opposite sides of C_l(1) or C_u(1)
    third_solution = "third_solution"  # (a0,b0) above C(2), (a,b) below C_l(1)


class Domain(BaseModel):
    """Uniform mesh of [left, right] with homogeneous Dirichlet ends."""

    left: float = 0.0
    right: float = 1.0
    n_interior: int = Field(gt=0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_interval(self) -> "Domain":
        if not (math.isfinite(self.left) and math.isfinite(self.right)):
            raise ValueError("Interval ends must be finite.")
        if self.right <= self.left:
            raise ValueError("right must be greater than left.")
        return self

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def h(self) -> float:
        return self.length / (self.n_interior + 1)

    def nodes(self) -> np.ndarray:
        """Interior node coordinates."""
        return self.left + self.h * np.arange(1, self.n_interior + 1)

    def all_nodes(self) -> np.ndarray:
        """Node coordinates including both boundary nodes."""
        return self.left + self.h * np.arange(self.n_interior + 2)


class Exponent(BaseModel):
    p: float = Field(gt=1.0)
    eps_reg: float = Field(default=0.0, ge=0.0)

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_regularization(self) -> "Exponent":
        if not math.isfinite(self.p):
            raise ValueError("p must be finite.")
        if self.eps_reg == 0.0 and self.p < 2.0:
            raise ValueError("eps_reg = 0 is only allowed when p >= 2.")
        return self

    @classmethod
    def of(cls, p: float, domain: Domain | None = None, eps_reg: float | None = None) -> "Exponent":
        """Exponent with the default regularization for p < 2.

        The default is 1e-8 times the slope of a unit-norm sine bump on the domain.
        """
        if eps_reg is None:
            if p >= 2.0:
                eps_reg = 0.0
            else:
                length = domain.length if domain is not None else 1.0
                eps_reg = DEFAULT_EPS_REG * math.pi * length ** (-1.0 - 1.0 / p)
        return cls(p=p, eps_reg=eps_reg)


class FucikParams(BaseModel):
    a: float
    b: float

    class Config:
        frozen = True

    @field_validator("a", "b")
    @classmethod
    def check_finite(cls, value: float) -> float:
        if not math.isfinite(value):
            raise ValueError("Fucik parameters must be finite.")
        return value

    def swapped(self) -> "FucikParams":
        return FucikParams(a=self.b, b=self.a)


class ShiftParam(BaseModel):
    s: float = Field(ge=0.0)

    class Config:
        frozen = True


class PerturbationSpec(BaseModel):
    """Radii and cutoff profiles of the perturbed functional."""

    rho: float = Field(gt=0.0)
    R: float = Field(gt=0.0)
    cutoff_inner: str = "smoothstep"  # 1 on [0, 1/2], 0 on [1, inf)
    cutoff_outer: str = "smoothstep"  # 0 on [0, 1], 1 on [2, inf)
    norm_used: str = "w1p_seminorm"

    class Config:
        frozen = True

    @model_validator(mode="after")
    def check_radii(self) -> "PerturbationSpec":
        if self.R <= self.rho:
            raise ValueError("R must be greater than rho.")
        return self


class MinimaxConfig(BaseModel):
    beads: int = Field(default=41, ge=5)
    tol: float = Field(default=1e-7, gt=0.0)
    grad_tol: float = Field(default=1e-6, gt=0.0)
    patience: int = Field(default=10, gt=0)
    max_sweeps: int = Field(default=3000, gt=0)
    step_damping: float = Field(default=1.0, gt=0.0)
    climb_iterations: int = Field(default=400, gt=0)
    climb_damping: float = Field(default=0.3, gt=0.0)
    warm_start: bool = True
    workers: int = Field(default=1, gt=0)


class SolveConfig(BaseModel):
    t_small: float = Field(default=0.5, gt=0.0)
    t_large: float = Field(default=1.5, gt=0.0)
    report_tol: float = Field(default=1e-6, gt=0.0)
    newton_tol: float = Field(default=1e-10, gt=0.0)
    restarts: int = Field(default=20, gt=0)
    amplitudes: int = Field(default=16, gt=0)
    separation: float = Field(default=1e-2, gt=0.0)
    trivial_tol: float = Field(default=1e-6, gt=0.0)
    band_fraction: float = Field(default=0.02, gt=0.0)
    seed: int = 7
    workers: int = Field(default=1, gt=0)
    minimax: MinimaxConfig = MinimaxConfig(beads=25, grad_tol=1e-6)

    @model_validator(mode="after")
    def check_blend(self) -> "SolveConfig":
        if self.t_large <= self.t_small:
            raise ValueError("t_large must be greater than t_small.")
        return self
