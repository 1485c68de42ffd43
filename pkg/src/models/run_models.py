from enum import Enum
from pathlib import Path
from typing import List, Optional

from pydantic import BaseModel, Field, model_validator

from src.models.fucik_models import Domain, Exponent, FucikParams, MinimaxConfig, SolveConfig


class Command(str, Enum):
    eig = "eig"  # first eigenpair and lambda2
    mpass = "mpass"  # mountain pass value c(s) at one shift
    curve = "curve"  # trace the first nontrivial curve
    classify = "classify"  # region label of one (a, b)
    solve = "solve"  # multiplicity experiment
    check = "check"  # invariant suite


# Flags each command cannot run without.
REQUIRED_FLAGS: dict[Command, tuple[str, ...]] = {
    Command.eig: (),
    Command.mpass: ("s",),
    Command.curve: (),
    Command.classify: ("a", "b", "spectrum"),
    Command.solve: ("a0", "b0", "a", "b"),
    Command.check: (),
}


class RunConfig(BaseModel):
    """Merged flags, config file and defaults of one CLI invocation."""

    command: Command
    p: float = Field(default=2.0, gt=1.0)
    nodes: int = Field(default=200, gt=2)
    left: float = 0.0
    right: float = 1.0
    eps_reg: Optional[float] = Field(default=None, ge=0.0)
    tol: float = Field(default=1e-8, gt=0.0)
    beads: int = Field(default=41, ge=5)
    grad_tol: float = Field(default=1e-6, gt=0.0)
    s: Optional[float] = Field(default=None, ge=0.0)
    s_max: Optional[float] = Field(default=None, gt=0.0)
    s_grid: Optional[List[float]] = None
    a: Optional[float] = None
    b: Optional[float] = None
    a0: Optional[float] = None
    b0: Optional[float] = None
    t_small: float = Field(default=0.5, gt=0.0)
    t_large: float = Field(default=1.5, gt=0.0)
    restarts: int = Field(default=20, gt=0)
    spectrum: Optional[Path] = None
    seed: int = 7
    thread_num: int = Field(default=1, gt=0)
    output_dir: Path = Path("out")

    @model_validator(mode="after")
    def check_required(self) -> "RunConfig":
        missing = [name for name in REQUIRED_FLAGS[self.command] if getattr(self, name) is None]
        if missing:
            raise ValueError(f"{self.command.value} requires {', '.join('--' + name.replace('_', '-') for name in missing)}")
        if self.t_large <= self.t_small:
            raise ValueError("t_large must be greater than t_small.")
        if self.s_grid is not None and (not self.s_grid or self.s_grid[0] != 0.0):
            raise ValueError("s_grid must start at 0.")
        return self

    def domain(self) -> Domain:
        return Domain(left=self.left, right=self.right, n_interior=self.nodes)

    def exponent(self) -> Exponent:
        return Exponent.of(self.p, self.domain(), self.eps_reg)

    def minimax_config(self) -> MinimaxConfig:
        return MinimaxConfig(beads=self.beads, tol=self.tol, grad_tol=self.grad_tol, workers=self.thread_num)

    def solve_config(self) -> SolveConfig:
        return SolveConfig(
            t_small=self.t_small,
            t_large=self.t_large,
            restarts=self.restarts,
            seed=self.seed,
            workers=self.thread_num,
            minimax=MinimaxConfig(
                beads=min(self.beads, 25), tol=self.tol, grad_tol=self.grad_tol, workers=self.thread_num
            ),
        )

    def ab0(self) -> FucikParams:
        return FucikParams(a=self.a0, b=self.b0)

    def ab(self) -> FucikParams:
        return FucikParams(a=self.a, b=self.b)

    def hashed(self) -> dict:
        """Config content that determines the artifacts; output location and worker count excluded."""
        return self.model_dump(mode="json", exclude={"output_dir", "thread_num"})
