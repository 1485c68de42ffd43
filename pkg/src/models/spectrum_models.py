from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, Field

from src.exceptions import ExtrapolationError

SPECTRUM_FORMAT_VERSION = 1


class RegionLabel(str, Enum):
    below_Cl1 = "below_Cl1"  # a < lambda1 and b < lambda1
    between_Cl1_Cu1 = "between_Cl1_Cu1"  # exactly one slope above lambda1
    between_Cu1_C2 = "between_Cu1_C2"  # both above lambda1, below the first nontrivial curve
    above_C2 = "above_C2"  # above the first nontrivial curve
    on_spectrum_band = "on_spectrum_band"  # too close to the computed spectrum to claim anything


# Critical groups of the asymmetric functional at 0, per region.
REGION_GROUPS: dict[RegionLabel, list[str]] = {
    RegionLabel.below_Cl1: ["C_q = δ_{q0}ℤ"],
    RegionLabel.between_Cl1_Cu1: ["C_q = 0 ∀q"],
    RegionLabel.between_Cu1_C2: ["C_q = δ_{q1}ℤ"],
    RegionLabel.above_C2: ["C_0 = C_1 = 0", "C_q (q ≥ 2) undetermined"],
    RegionLabel.on_spectrum_band: [],
}


class Provenance(BaseModel):
    left: float
    right: float
    n_interior: int
    p: float
    eps_reg: float
    config_hash: str
    version: str


class CurvePoint(BaseModel):
    s: float = Field(ge=0.0)
    c: float
    a: float
    b: float
    grad_residual: float

    @classmethod
    def from_sc(cls, s: float, c: float, grad_residual: float) -> "CurvePoint":
        return cls(s=s, c=c, a=s + c, b=c, grad_residual=grad_residual)


class CurveFailure(BaseModel):
    s: float
    detail: str


class SpectrumData(BaseModel):
    """Computed portion of the Fucik spectrum.

    The trivial lines are stored through lambda1; the curve holds the upper
    branch (a >= b) only, the mirror branch is its reflection.
    """

    version: int = SPECTRUM_FORMAT_VERSION
    lambda1: float
    lambda2: float
    curve: List[CurvePoint]
    failures: List[CurveFailure] = []
    monotone: bool = True
    provenance: Optional[Provenance] = None

    def s_range(self) -> tuple[float, float]:
        return self.curve[0].s, self.curve[-1].s

    def interpolate_c(self, s: float) -> float:
        """Piecewise-linear c(s) on the traced range.

        Raises:
            ExtrapolationError: s outside the traced range
        """
        if not self.curve:
            raise ExtrapolationError("The spectrum holds no curve points.", needed_s=s)
        low, high = self.s_range()
        if s < low or s > high:
            raise ExtrapolationError(
                f"s = {s:.6g} is outside the traced range [{low:.6g}, {high:.6g}].", needed_s=s
            )
        s_values = np.array([point.s for point in self.curve])
        c_values = np.array([point.c for point in self.curve])
        return float(np.interp(s, s_values, c_values))

    def both_branches(self) -> list[tuple[float, float]]:
        """(a, b) samples of the upper branch followed by the mirrored branch."""
        upper = [(point.a, point.b) for point in self.curve]
        lower = [(point.b, point.a) for point in self.curve]
        return upper + lower

    def distance_to(self, a: float, b: float) -> float:
        """Euclidean distance from (a, b) to the trivial lines and both sampled branches."""
        distance = min(abs(a - self.lambda1), abs(b - self.lambda1))
        query = np.array([a, b])
        for branch in (
            [(point.a, point.b) for point in self.curve],
            [(point.b, point.a) for point in self.curve],
        ):
            vertices = np.array(branch)
            if len(vertices) == 1:
                distance = min(distance, float(np.linalg.norm(query - vertices[0])))
                continue
            starts = vertices[:-1]
            edges = vertices[1:] - starts
            lengths = np.einsum("ij,ij->i", edges, edges)
            t = np.clip(
                np.einsum("ij,ij->i", query - starts, edges) / np.where(lengths > 0, lengths, 1.0), 0.0, 1.0
            )
            closest = starts + t[:, None] * edges
            distance = min(distance, float(np.min(np.linalg.norm(closest - query, axis=1))))
        return distance


class RegionPrediction(BaseModel):
    a: float
    b: float
    label: RegionLabel
    groups: List[str]
    distance_to_spectrum: Optional[float] = None
    provenance: Optional[Provenance] = None


class StabilityProbe(BaseModel):
    """Result of sampling a disk around a classified point."""

    center: tuple[float, float]
    radius: float
    label: RegionLabel
    stable: bool
    crossed: List[RegionLabel] = []
    samples: int

    def __bool__(self) -> bool:
        return self.stable
