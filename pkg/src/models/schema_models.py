from typing import Dict, List, Optional

from pydantic import BaseModel, Field as PydanticField, field_serializer

from src.grid import Field
from src.models.fucik_models import Domain, Exponent, PerturbationSpec, ScenarioTag, SignClass
from src.models.spectrum_models import Provenance
from src.sphere import Path, SpherePoint


class EigenPair(BaseModel):
    eigenvalue: float = PydanticField(gt=0.0)
    phi: SpherePoint
    residual: float
    p: Exponent
    iterations: int
    lambda2: Optional[float] = None
    history: List[List[float]] = PydanticField(default_factory=list, exclude=True)  # (iteration, value, residual)

    class Config:
        arbitrary_types_allowed = True

    @field_serializer("phi")
    def serialize_phi(self, phi: SpherePoint) -> list[float]:
        return phi.values.tolist()


class SweepRecord(BaseModel):
    sweep: int
    max_value: float
    grad_norm: float
    argmax: int
    reparam_defect: float = 0.0  # increase of the path max caused by reparametrization


class MinimaxResult(BaseModel):
    s: float
    c: float
    argmax_bead: SpherePoint
    argmax_index: int
    plateau_width: int = 1  # beads sharing the max value
    path: Path
    grad_norm_at_max: float
    iterations: int
    sweeps: List[SweepRecord] = []
    converged: bool = True
    flagged: Optional[str] = None
    provenance: Optional[Provenance] = None

    class Config:
        arbitrary_types_allowed = True

    @field_serializer("argmax_bead")
    def serialize_bead(self, bead: SpherePoint) -> list[float]:
        return bead.values.tolist()

    @field_serializer("path")
    def serialize_path(self, path: Path) -> list[list[float]]:
        return path.matrix().tolist()


class ConnectivityResult(BaseModel):
    s: float
    b: float
    c: float
    margin: float
    connected: Optional[bool]  # None inside the margin band
    witness: Optional[Path] = None
    witness_max: Optional[float] = None

    class Config:
        arbitrary_types_allowed = True

    @property
    def inconclusive(self) -> bool:
        return self.connected is None

    @field_serializer("witness")
    def serialize_witness(self, witness: Optional[Path]) -> Optional[list[list[float]]]:
        return None if witness is None else witness.matrix().tolist()


class GapProbeResult(BaseModel):
    s: float
    lambda1: float
    runs: int
    converged_runs: int
    values: List[float]
    violations: List[float]  # converged values strictly inside the forbidden gap


class SignedSolution(BaseModel):
    field: Field
    residual: float
    energy: float
    trivial: bool
    attempts: int = 1

    class Config:
        arbitrary_types_allowed = True

    @field_serializer("field")
    def serialize_field(self, field: Field) -> list[float]:
        return field.values.tolist()


class SolutionRecord(BaseModel):
    field: Field
    residual: float
    independent_residual: float
    sign: SignClass
    energy: float
    scenario: ScenarioTag
    method: str
    norm: float
    local_minimizer: Optional[bool] = None

    class Config:
        arbitrary_types_allowed = True

    @field_serializer("field")
    def serialize_field(self, field: Field) -> list[float]:
        return field.values.tolist()


class SolveReport(BaseModel):
    scenarios: List[ScenarioTag] = []
    labels: Dict[str, str] = {}
    solutions: List[SolutionRecord] = []
    distances: List[List[float]] = []
    perturbation: Optional[PerturbationSpec] = None
    notes: List[str] = []
    missing: List[str] = []  # mandated solutions that were not found
    provenance: Optional[Provenance] = None


class CheckRow(BaseModel):
    name: str
    value: float
    threshold: float
    passed: bool
    detail: Optional[str] = None


class CheckReport(BaseModel):
    p: float
    n_interior: int
    seed: int
    rows: List[CheckRow] = []
    provenance: Optional[Provenance] = None

    @property
    def passed(self) -> bool:
        return all(row.passed for row in self.rows)


class EigReport(BaseModel):
    lambda1: float
    lambda2: float
    residuals: Dict[str, float]
    iterations: int
    provenance: Optional[Provenance] = None


class FieldRecord(BaseModel):
    """Nodal values of a field together with the mesh they live on."""

    domain: Domain
    values: List[float]
