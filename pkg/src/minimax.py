"""Discrete mountain pass by string deformation.

A string of beads joins two fixed endpoints. Each sweep moves every interior
bead one Armijo step downhill across the path (all beads from the same
snapshot, none further than a fraction of its spacing), then redistributes the
beads uniformly in energy-norm arclength around the top bead. A
redistribution that would raise the path maximum is skipped. Once the maximum
stagnates, the top bead is refined by climbing-image iterations and a Newton
solve, and the refined saddle replaces it.

The same engine runs on the unit sphere (the minimax value c(s)) and in the
ambient field space (mountain passes of the BVP functionals).
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field as dataclass_field
from typing import Optional, Protocol, Sequence

import numpy as np

from src.energy import FunctionalHandle, eval_J, grad_I
from src.exceptions import ConvergenceError, DegenerateInputError, PreconditionError
from src.grid import Field, assembly_for, sine_mode
from src.models.fucik_models import FucikParams, MinimaxConfig, ShiftParam
from src.models.schema_models import ConnectivityResult, EigenPair, MinimaxResult, SweepRecord
from src.optimize_utils import newton_solve
from src.sphere import (
    ARMIJO,
    Path,
    SpherePoint,
    armijo_step,
    chordal_interpolate,
    descent_direction,
    geodesic_interpolate,
    newton_polish,
    perpendicular_to_path,
    retract,
    seed_path,
    sphere_residual,
    tangent_project,
)

# Relative window in which beads count as sharing the path maximum.
PLATEAU_TOL = 1e-12
# A refined saddle must keep its value within this fraction of the string maximum.
POLISH_VALUE_WINDOW = 0.05
# Largest bead displacement per sweep, as a fraction of the shorter adjacent spacing.
MAX_MOVE_FRACTION = 0.25
# Largest increase of the path maximum a reparametrization may cause.
REPARAM_DEFECT_TOL = 1e-10
# Climbing and Newton rounds in one refinement, and refinements per run.
REFINE_ROUNDS = 4
MAX_REFINEMENTS = 5


class Landscape(Protocol):
    asm: object

    def value(self, bead) -> float: ...

    def residual(self, bead) -> float: ...

    def descend(
        self, bead, value: float, step: float, tangent: np.ndarray, max_move: float
    ) -> tuple[object, float, float, bool]: ...

    def interpolate(self, first, second, t: float): ...

    def climb(self, bead, tangent: np.ndarray, step: float): ...

    def polish(self, bead, tol: float) -> tuple[object, float, float]: ...

    def vector(self, bead) -> np.ndarray: ...


class SphereLandscape:
    """J_s on the unit L^p sphere."""

    def __init__(self, s: ShiftParam, domain, p):
        self.s = s
        self.p = p
        self.asm = assembly_for(domain)

    def value(self, bead: SpherePoint) -> float:
        return eval_J(bead.field, self.s, self.p)

    def residual(self, bead: SpherePoint) -> float:
        return sphere_residual(bead.field, self.s, self.p)[1]

    def descend(self, bead, value, step, tangent, max_move):
        direction, _ = descent_direction(bead, self.s, self.p)
        direction = perpendicular_to_path(bead, direction, tangent, self.p)
        return armijo_step(bead, self.s, self.p, value, step, direction=direction, max_move=max_move)

    def interpolate(self, first, second, t):
        try:
            return chordal_interpolate(first, second, t)
        except DegenerateInputError:
            logging.debug("chord passes near the origin; interpolating along the great circle")
            return geodesic_interpolate(first, second, t)

    def climb(self, bead, tangent, step):
        direction, _ = descent_direction(bead, self.s, self.p)
        unit = tangent_project(bead, bead.field.with_values(tangent), self.p).values
        length = self.asm.energy_norm(unit)
        climbing = direction
        if length > 0.0:
            unit = unit / length
            climbing = direction - 2.0 * float(direction @ (self.asm.stiffness @ unit)) * unit
        return retract(bead, bead.field.with_values(-step * climbing))

    def polish(self, bead, tol):
        return newton_polish(bead, self.s, self.p, tol)

    def vector(self, bead) -> np.ndarray:
        return bead.values


class AmbientLandscape:
    """An unconstrained functional on fields, descended with the K^{-1} gradient."""

    def __init__(self, handle: FunctionalHandle, domain, p):
        self.handle = handle
        self.p = p
        self.asm = assembly_for(domain)

    def value(self, bead: Field) -> float:
        return self.handle.value(bead)

    def residual(self, bead: Field) -> float:
        return self.asm.dual_norm(self.handle.gradient(bead).values)

    def descend(self, bead, value, step, tangent, max_move, max_backtracks: int = 40):
        gradient = self.handle.gradient(bead).values
        direction = self.asm.precondition(gradient)
        tangent_norm = self.asm.energy_norm(tangent)
        if tangent_norm > 0.0:
            unit = tangent / tangent_norm
            direction = direction - float(direction @ (self.asm.stiffness @ unit)) * unit
        decrease = float(gradient @ direction)
        if decrease <= 0.0 or max_move <= 0.0:
            return bead, value, step, False
        length = self.asm.energy_norm(direction)
        if length > 0.0:
            step = min(step, max_move / length)
        for _ in range(max_backtracks):
            candidate = bead.with_values(bead.values - step * direction)
            candidate_value = self.handle.value(candidate)
            if candidate_value <= value - ARMIJO * step * decrease:
                return candidate, candidate_value, step, True
            step *= 0.5
        return bead, value, step, False

    def interpolate(self, first, second, t):
        return first.with_values((1.0 - t) * first.values + t * second.values)

    def climb(self, bead, tangent, step):
        direction = self.asm.precondition(self.handle.gradient(bead).values)
        climbing = direction - 2.0 * float(direction @ (self.asm.stiffness @ tangent)) * tangent
        return bead.with_values(bead.values - step * climbing)

    def polish(self, bead, tol):
        if self.handle.hessian is None:
            return bead, self.value(bead), self.residual(bead)
        outcome = newton_solve(self.handle, bead, tol)
        return outcome.field, self.value(outcome.field), outcome.residual

    def vector(self, bead) -> np.ndarray:
        return bead.values


@dataclass
class StringOutcome:
    beads: list
    values: np.ndarray
    argmax: int
    plateau_width: int
    saddle: object
    saddle_value: float
    residual: float
    sweeps: list[SweepRecord] = dataclass_field(default_factory=list)
    stagnated: bool = False


def path_maximum(values: np.ndarray) -> tuple[int, int]:
    """Lowest index attaining the maximum (within PLATEAU_TOL) and the plateau width."""
    top = float(np.max(values))
    ties = np.flatnonzero(values >= top - PLATEAU_TOL * max(1.0, abs(top)))
    return int(ties[0]), int(len(ties))


class StringMethod:
    def __init__(self, landscape: Landscape, cfg: MinimaxConfig, step: float):
        self.landscape = landscape
        self.cfg = cfg
        self.base_step = step
        self.asm = landscape.asm

    def _move_bead(self, bead, value, step, tangent, max_move):
        return self.landscape.descend(bead, value, min(2.0 * step, 4.0 * self.base_step), tangent, max_move)

    def _descent_sweep(self, beads: list, values: np.ndarray, steps: np.ndarray, executor) -> None:
        """Move each interior bead downhill across the path, at most a fraction of its spacing.

        Every bead moves from the same snapshot, so the sweep does not depend on
        the order or the number of workers.
        """
        matrix = np.array([self.landscape.vector(bead) for bead in beads])
        spacings = np.array([self.asm.energy_norm(step) for step in np.diff(matrix, axis=0)])
        interior = range(1, len(beads) - 1)
        jobs = [
            (
                beads[k],
                values[k],
                steps[k],
                matrix[k + 1] - matrix[k - 1],
                MAX_MOVE_FRACTION * min(spacings[k - 1], spacings[k]),
            )
            for k in interior
        ]
        if executor is None:
            moved = [self._move_bead(*job) for job in jobs]
        else:
            moved = list(executor.map(lambda job: self._move_bead(*job), jobs))
        for k, (bead, value, step, accepted) in zip(interior, moved):
            beads[k], values[k] = bead, value
            steps[k] = step if accepted else 0.5 * steps[k]

    def _uniform(self, beads: list, count: int) -> list:
        matrix = np.array([self.landscape.vector(bead) for bead in beads])
        lengths = np.array([self.asm.energy_norm(step) for step in np.diff(matrix, axis=0)])
        cumulative = np.concatenate(([0.0], np.cumsum(lengths)))
        if cumulative[-1] <= 0.0:
            raise DegenerateInputError("The path has zero length.")
        targets = np.linspace(0.0, cumulative[-1], count)
        result = [beads[0]]
        for target in targets[1:-1]:
            segment = min(int(np.searchsorted(cumulative, target, side="right")) - 1, len(lengths) - 1)
            if lengths[segment] <= 0.0:
                result.append(beads[segment])
                continue
            t = (target - cumulative[segment]) / lengths[segment]
            result.append(self.landscape.interpolate(beads[segment], beads[segment + 1], float(np.clip(t, 0.0, 1.0))))
        result.append(beads[-1])
        return result

    def reparametrize(self, beads: list, pin: Optional[int] = None) -> list:
        """Beads at uniform energy-norm arclength along the current polyline.

        With pin, that bead keeps its place and index and each side of it is
        redistributed on its own.
        """
        if pin is None or pin <= 0 or pin >= len(beads) - 1:
            return self._uniform(beads, len(beads))
        left = self._uniform(beads[: pin + 1], pin + 1)
        right = self._uniform(beads[pin:], len(beads) - pin)
        return left + right[1:]

    def _climb(self, bead, value: float, tangent: np.ndarray, window: float) -> tuple[object, float, float]:
        """Climbing-image iterations from bead, kept within window of value.

        A step that leaves the window or blows the residual up restarts from the
        best point with half the step.
        """
        best = (bead, value, self.landscape.residual(bead))
        step = self.cfg.climb_damping * self.base_step
        floor = 1e-6 * step
        current = bead
        for _ in range(self.cfg.climb_iterations):
            try:
                current = self.landscape.climb(current, tangent, step)
            except DegenerateInputError:
                current, step = best[0], 0.5 * step
            else:
                residual = self.landscape.residual(current)
                current_value = self.landscape.value(current)
                if not np.isfinite(residual) or residual > 10.0 * best[2] or abs(current_value - value) > window:
                    current, step = best[0], 0.5 * step
                elif residual < best[2]:
                    best = (current, current_value, residual)
            if best[2] <= 0.1 * self.cfg.grad_tol or step < floor:
                break
        return best

    def _refine(self, beads: list, values: np.ndarray, index: int) -> tuple[object, float, float]:
        """Climbing image then Newton polish of the top bead, repeated while the residual keeps dropping.

        Only candidates whose value stays within POLISH_VALUE_WINDOW of the string
        maximum are accepted; otherwise the top bead itself is returned.
        """
        value = float(values[index])
        window = POLISH_VALUE_WINDOW * max(1.0, abs(value))
        best = (beads[index], value, self.landscape.residual(beads[index]))
        tangent = self.landscape.vector(beads[index + 1]) - self.landscape.vector(beads[index - 1])
        tangent_norm = self.asm.energy_norm(tangent)
        for attempt in range(REFINE_ROUNDS):
            candidate = best
            if tangent_norm > 0.0:
                candidate = self._climb(best[0], value, tangent / tangent_norm, window)
            polished, polished_value, polished_residual = self.landscape.polish(candidate[0], 1e-2 * self.cfg.grad_tol)
            if polished_residual < candidate[2] and abs(polished_value - value) <= window:
                candidate = (polished, polished_value, polished_residual)
            logging.debug(f"refinement round {attempt}: residual {candidate[2]:.3e}")
            if candidate[2] >= 0.5 * best[2]:
                best = min(best, candidate, key=lambda item: item[2])
                break
            best = candidate
            if best[2] <= self.cfg.grad_tol:
                break
        return best

    def run(self, beads: Sequence, label: str = "string") -> StringOutcome:
        """Sweep until the path maximum stagnates and the refined top bead resolves the saddle.

        A stagnated string whose refined saddle still misses grad_tol keeps
        sweeping, up to MAX_REFINEMENTS refinements or max_sweeps sweeps.
        """
        cfg = self.cfg
        beads = list(beads)
        values = np.array([self.landscape.value(bead) for bead in beads])
        steps = np.full(len(beads), self.base_step)
        history = [float(np.max(values))]
        sweeps: list[SweepRecord] = []
        stagnated = False
        refined = None
        refinements = 0
        executor = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
        try:
            for sweep in range(1, cfg.max_sweeps + 1):
                self._descent_sweep(beads, values, steps, executor)
                descended_max = float(np.max(values))
                index, _ = path_maximum(values)
                candidate = self.reparametrize(beads, pin=index)
                candidate_values = np.array([self.landscape.value(bead) for bead in candidate])
                if float(np.max(candidate_values)) <= descended_max + REPARAM_DEFECT_TOL:
                    beads, values = candidate, candidate_values
                current = float(np.max(values))
                index, _ = path_maximum(values)
                residual = self.landscape.residual(beads[index])
                sweeps.append(
                    SweepRecord(
                        sweep=sweep,
                        max_value=current,
                        grad_norm=residual,
                        argmax=index,
                        reparam_defect=max(0.0, current - descended_max),
                    )
                )
                history.append(current)
                if sweep % 50 == 0:
                    logging.debug(f"{label}: sweep={sweep} max={current:.10g} residual={residual:.3e}")
                if len(history) <= cfg.patience:
                    continue
                reference = history[-1 - cfg.patience]
                if abs(current - reference) > cfg.tol * max(1.0, abs(current)):
                    continue
                stagnated = True
                if index == 0 or index == len(beads) - 1:
                    break
                refined = self._refine(beads, values, index)
                refinements += 1
                if refined[2] <= cfg.grad_tol or refinements >= MAX_REFINEMENTS:
                    break
                logging.debug(f"{label}: refined residual {refined[2]:.3e} above {cfg.grad_tol:.1e}; sweeping on")
                refined = None
                history = history[-1:]
        finally:
            if executor is not None:
                executor.shutdown()
        index, plateau = path_maximum(values)
        if index == 0 or index == len(beads) - 1:
            raise DegenerateInputError(f"{label}: the path maximum sits at an endpoint.")
        if refined is None:
            refined = self._refine(beads, values, index)
        saddle, saddle_value, residual = refined
        beads[index] = saddle
        values[index] = saddle_value
        logging.info(
            f"{label}: {len(sweeps)} sweeps, stagnated={stagnated}, saddle value {saddle_value:.10g}, "
            f"residual {residual:.3e}"
        )
        return StringOutcome(beads, values, index, plateau, saddle, saddle_value, residual, sweeps, stagnated)


def mountain_pass_c(
    s: ShiftParam, eig: EigenPair, cfg: MinimaxConfig, initial: Optional[Path] = None
) -> MinimaxResult:
    """Minimax value c(s) of J_s over sphere paths joining phi1 and -phi1.

    Raises:
        DegenerateInputError: the path maximum does not exceed lambda1
        ConvergenceError: the saddle residual stays above cfg.grad_tol
    """
    p = eig.p
    phi = eig.phi
    domain = phi.domain
    if initial is None:
        path = seed_path(phi, sine_mode(domain, 2), cfg.beads)
    else:
        path = Path([phi] + list(initial.beads[1:-1]) + [-phi])
    engine = StringMethod(SphereLandscape(s, domain, p), cfg, cfg.step_damping / p.p)
    outcome = engine.run(path.beads, label=f"mountain pass s={s.s:g}")
    c = outcome.saddle_value
    result = MinimaxResult(
        s=s.s,
        c=c,
        argmax_bead=outcome.saddle,
        argmax_index=outcome.argmax,
        plateau_width=outcome.plateau_width,
        path=Path(outcome.beads),
        grad_norm_at_max=outcome.residual,
        iterations=len(outcome.sweeps),
        sweeps=outcome.sweeps,
    )
    if c <= eig.eigenvalue + cfg.tol:
        raise DegenerateInputError(
            f"Path maximum {c:.8g} does not exceed lambda1 = {eig.eigenvalue:.8g}; the endpoints are mis-set."
        )
    if outcome.residual > cfg.grad_tol:
        result.converged = False
        result.flagged = "saddle not resolved; increase beads"
        raise ConvergenceError(
            f"s = {s.s:g}: saddle not resolved (residual {outcome.residual:.3e}); increase beads.",
            best=result,
            residual=outcome.residual,
        )
    return result


def verify_critical_point(res: MinimaxResult, s: ShiftParam, scale: float = 1.0) -> float:
    """Dual norm of grad I(scale * bead, (s + c, c)) at the argmax bead."""
    bead = res.argmax_bead.field.scaled(scale)
    gradient = grad_I(bead, FucikParams(a=s.s + res.c, b=res.c), res.argmax_bead.p)
    return assembly_for(bead.domain).dual_norm(gradient.values)


def connectivity_check(
    s: ShiftParam, b: float, eig: EigenPair, cfg: MinimaxConfig, result: Optional[MinimaxResult] = None
) -> ConnectivityResult:
    """Decide whether the sublevel set {J_s < b} joins phi1 and -phi1.

    Raises:
        PreconditionError: b does not exceed the endpoint values lambda1 - s and lambda1
    """
    lambda1 = eig.eigenvalue
    if b <= max(lambda1 - s.s, lambda1):
        raise PreconditionError(
            f"b = {b:g} does not exceed lambda1 = {lambda1:.6g}; the sublevel set misses an endpoint."
        )
    if result is None:
        result = mountain_pass_c(s, eig, cfg)
    c = result.c
    margin = 0.01 * (c - lambda1)
    if c < b - margin:
        witness_max = float(np.max(result.path.values_of(s)))
        if witness_max < b:
            return ConnectivityResult(s=s.s, b=b, c=c, margin=margin, connected=True, witness=result.path,
                                      witness_max=witness_max)
        return ConnectivityResult(s=s.s, b=b, c=c, margin=margin, connected=None, witness_max=witness_max)
    if c >= b + margin:
        return ConnectivityResult(s=s.s, b=b, c=c, margin=margin, connected=False)
    return ConnectivityResult(s=s.s, b=b, c=c, margin=margin, connected=None)


def ambient_mountain_pass(
    handle: FunctionalHandle, start: Field, end: Field, cfg: MinimaxConfig, p, seed_beads: Optional[list] = None
) -> StringOutcome:
    """Mountain pass between two fields for an unconstrained functional."""
    domain = start.domain
    if seed_beads is None:
        ts = np.linspace(0.0, 1.0, cfg.beads)
        seed_beads = [start.with_values((1.0 - t) * start.values + t * end.values) for t in ts]
    engine = StringMethod(AmbientLandscape(handle, domain, p), cfg, cfg.step_damping / p.p)
    return engine.run(seed_beads, label=f"mountain pass on {handle.tag}")
