"""Multiple solutions of -Delta_p u = f(u) on an interval with Dirichlet ends.

Signed solutions come from the truncated functionals Phi+ and Phi- (global
minimization when they are coercive, a mountain pass from 0 otherwise). The
third solution is a mountain pass between the two signed minimizers on the
perturbed functional. Every reported solution is certified by its dual-norm
residual and re-checked against an element-by-element residual assembly.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np
from scipy.linalg import solve_banded

from src.eigen import compute_lambda1
from src.energy import Phi_handle, build_PhiTilde, eval_Phi, grad_I, grad_Phi
from src.exceptions import DegenerateInputError, OnSpectrumBandError, PreconditionError
from src.grid import GAUSS_POINTS, GAUSS_WEIGHTS, Field, assembly_for, max_norm, sine_mode
from src.minimax import ambient_mountain_pass, mountain_pass_c
from src.models.fucik_models import (
    Domain,
    Exponent,
    FucikParams,
    PerturbationSpec,
    ScenarioTag,
    ShiftParam,
    Sign,
    SignClass,
    SolveConfig,
)
from src.models.schema_models import EigenPair, SignedSolution, SolutionRecord, SolveReport
from src.models.spectrum_models import RegionLabel, SpectrumData
from src.nonlinearity import Nonlinearity, make_model_nonlinearity
from src.optimize_utils import Deflation, newton_solve, quasi_newton_minimize
from src.spectrum import classify

ABOVE_CU1 = {RegionLabel.between_Cu1_C2, RegionLabel.above_C2}
PERTURBATION_SEARCH_STEPS = 40
LOCAL_MIN_SAMPLES = 200
LOCAL_MIN_RADIUS = 1e-3
LOCAL_MIN_SLACK = 1e-10


def sign_class(u: Field, trivial_tol: float) -> SignClass:
    scale = max_norm(u)
    if scale <= trivial_tol:
        return SignClass.trivial
    floor = -1e-9 * scale
    if np.all(u.values >= floor):
        return SignClass.positive
    if np.all(u.values <= -floor):
        return SignClass.negative
    return SignClass.sign_changing


def independent_residual(u: Field, f: Nonlinearity, p: Exponent) -> float:
    """Weak-form residual of the BVP assembled element by element, in the dual norm.

    Shares no assembly code with grad_Phi; the dual norm comes from a banded
    solve with the stiffness matrix.
    """
    domain = u.domain
    h = domain.h
    full = u.padded()
    residual = np.zeros(domain.n_interior + 2)
    for element in range(domain.n_interior + 1):
        left, right = full[element], full[element + 1]
        slope = (right - left) / h
        flux = p.p * (slope * slope + p.eps_reg * p.eps_reg) ** ((p.p - 2.0) / 2.0) * slope
        residual[element] -= flux
        residual[element + 1] += flux
        for xi, weight in zip(GAUSS_POINTS, GAUSS_WEIGHTS):
            value = left * (1.0 - xi) + right * xi
            source = p.p * float(f.f(value)) * weight * h
            residual[element] -= source * (1.0 - xi)
            residual[element + 1] -= source * xi
    g = residual[1:-1]
    n = domain.n_interior
    banded = np.zeros((3, n))
    banded[0, 1:] = -1.0 / h
    banded[1, :] = 2.0 / h
    banded[2, :-1] = -1.0 / h
    riesz = solve_banded((1, 1), banded, g)
    return float(np.sqrt(max(g @ riesz, 0.0)))


def local_minimizer_check(
    u: Field, f: Nonlinearity, p: Exponent, seed: int = 7, samples: int = LOCAL_MIN_SAMPLES, radius: float = LOCAL_MIN_RADIUS
) -> bool:
    """Phi(u + v) >= Phi(u) - slack for random perturbations v of energy norm radius."""
    asm = assembly_for(u.domain)
    rng = np.random.default_rng(seed)
    base = eval_Phi(u, f, p)
    for _ in range(samples):
        direction = rng.normal(size=u.values.shape)
        direction *= radius / asm.energy_norm(direction)
        if eval_Phi(u.with_values(u.values + direction), f, p) < base - LOCAL_MIN_SLACK:
            return False
    return True


def _restart_starts(domain: Domain, sign: Sign, cfg: SolveConfig) -> list[Field]:
    """Signed smooth starting fields with log-spaced amplitudes, seeded by cfg.seed."""
    amplitudes = np.geomspace(0.25 * cfg.t_small, 2.0 * cfg.t_large, cfg.restarts)
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)]
    starts = []
    for amplitude, rng in zip(amplitudes, rngs):
        profile = np.abs(sum(rng.normal() * sine_mode(domain, k).values / k for k in range(1, 5)))
        profile += 0.1 * sine_mode(domain, 1).values
        profile /= np.max(profile)
        starts.append(Field(sign.factor * amplitude * profile, domain))
    return starts


def _deflated_search(
    f: Nonlinearity,
    p: Exponent,
    starts: list[Field],
    known: list[Field],
    cfg: SolveConfig,
    sign: Optional[Sign] = None,
) -> list[Field]:
    """Deflated Newton from each start; every new root is deflated for the following starts."""
    handle = Phi_handle(f, p, sign)
    deflation = Deflation(roots=list(known))
    found = []
    for start in starts:
        outcome = newton_solve(handle, start, cfg.newton_tol, max_iter=100, deflation=deflation)
        if not outcome.converged or max_norm(outcome.field) <= cfg.trivial_tol:
            continue
        if any(max_norm(outcome.field - root) < cfg.separation for root in deflation.roots):
            continue
        logging.debug(f"deflated Newton found a root with max norm {max_norm(outcome.field):.4g}")
        deflation.roots.append(outcome.field)
        found.append(outcome.field)
    return found


def _coercive_minimum(f: Nonlinearity, sign: Sign, domain: Domain, cfg: SolveConfig) -> tuple[Optional[Field], int]:
    handle = Phi_handle(f, f.p, sign)
    starts = _restart_starts(domain, sign, cfg)

    def attempt(start: Field) -> Optional[Field]:
        minimizer = quasi_newton_minimize(handle, start)
        if max_norm(minimizer) <= cfg.trivial_tol:
            return None
        outcome = newton_solve(handle, minimizer, cfg.newton_tol)
        if max_norm(outcome.field) <= cfg.trivial_tol or outcome.residual > cfg.report_tol:
            return None
        return outcome.field

    if cfg.workers > 1:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            candidates = list(executor.map(attempt, starts))
    else:
        candidates = [attempt(start) for start in starts]
    candidates = [u for u in candidates if u is not None]
    if not candidates:
        return None, len(starts)
    best = min(candidates, key=handle.value)
    return best, len(starts)


def _mountain_pass_from_zero(f: Nonlinearity, sign: Sign, domain: Domain, cfg: SolveConfig) -> Optional[Field]:
    handle = Phi_handle(f, f.p, sign)
    profile = sine_mode(domain, 1)
    amplitude = 2.0 * cfg.t_large
    for _ in range(30):
        end = profile.scaled(sign.factor * amplitude)
        if handle.value(end) < 0.0:
            break
        amplitude *= 2.0
    else:
        logging.warning(f"Phi{sign.value} stays nonnegative along the first mode; no mountain pass endpoint.")
        return None
    outcome = ambient_mountain_pass(handle, Field.zeros(domain), end, cfg.minimax, f.p)
    polished = newton_solve(handle, outcome.saddle, cfg.newton_tol)
    if polished.converged and max_norm(polished.field) > cfg.trivial_tol:
        return polished.field
    return None


def solve_signed(
    f: Nonlinearity, sign: Sign, domain: Domain, cfg: SolveConfig, lambda1: Optional[float] = None
) -> SignedSolution:
    """Nontrivial critical point of Phi+ or Phi-, or a certificate that only 0 was found.

    A coercive truncated functional (slope at infinity below lambda1) is
    minimized from cfg.restarts starts; otherwise a mountain pass from 0 is
    attempted, with deflated Newton as fallback.
    """
    p = f.p
    if lambda1 is None:
        lambda1 = compute_lambda1(domain, p).eigenvalue
    if sign is Sign.positive:
        near_zero, at_infinity = f.ab0.a, f.ab.a
    else:
        near_zero, at_infinity = f.ab0.b, f.ab.b
    if (near_zero - lambda1) * (at_infinity - lambda1) >= 0.0:
        logging.warning(
            f"Slopes {near_zero:g} and {at_infinity:g} do not cross lambda1 = {lambda1:.6g}; "
            f"a {'positive' if sign is Sign.positive else 'negative'} solution is not guaranteed."
        )
    handle = Phi_handle(f, p, sign)
    attempts = 1
    solution: Optional[Field] = None
    if at_infinity < lambda1:
        solution, attempts = _coercive_minimum(f, sign, domain, cfg)
    else:
        if near_zero < lambda1:
            solution = _mountain_pass_from_zero(f, sign, domain, cfg)
        if solution is None:
            starts = _restart_starts(domain, sign, cfg)
            attempts = len(starts)
            found = _deflated_search(f, p, starts, [Field.zeros(domain)], cfg, sign)
            solution = min(found, key=handle.value) if found else None
    if solution is None:
        logging.info(f"Phi{sign.value}: only the trivial solution found after {attempts} attempts")
        return SignedSolution(field=Field.zeros(domain), residual=0.0, energy=0.0, trivial=True, attempts=attempts)
    residual = assembly_for(domain).dual_norm(handle.gradient(solution).values)
    energy = handle.value(solution)
    logging.info(f"Phi{sign.value}: solution with energy {energy:.8g}, residual {residual:.2e}")
    return SignedSolution(field=solution, residual=residual, energy=energy, trivial=False, attempts=attempts)


def choose_perturbation(
    f: Nonlinearity, domain: Domain, cfg: SolveConfig, probes: Optional[list[Field]] = None
) -> PerturbationSpec:
    """Radii rho and R at which the gradient of Phi dominates half the homogeneous lower bound.

    rho starts where the field cannot leave [-t_small, t_small] and is halved;
    R starts at 4 t_large and is doubled, each until the bound holds on every probe direction.

    Raises:
        PreconditionError: no admissible radius within the search budget
    """
    p = f.p
    asm = assembly_for(domain)
    if probes is None:
        probes = [sine_mode(domain, k) for k in range(1, 5)]
        rng = np.random.default_rng(cfg.seed)
        probes += [Field(rng.normal(size=domain.n_interior) * sine_mode(domain, 1).values, domain) for _ in range(4)]
    units = []
    for probe in probes:
        energy, _ = asm.gradient_energy(probe.values, p)
        units.append(probe.scaled(energy ** (-1.0 / p.p)))

    def lower_bound(ab: FucikParams) -> float:
        return min(asm.dual_norm(grad_I(unit, ab, p).values) for unit in units)

    delta_inner = lower_bound(f.ab0)
    delta_outer = lower_bound(f.ab)

    def holds(radii: tuple[float, ...], delta: float) -> bool:
        return all(
            asm.dual_norm(grad_Phi(unit.scaled(r), f, p).values) >= 0.5 * r ** (p.p - 1.0) * delta
            for r in radii
            for unit in units
        )

    rho = cfg.t_small / domain.length ** (1.0 - 1.0 / p.p)
    for _ in range(PERTURBATION_SEARCH_STEPS):
        if holds((0.5 * rho, 0.75 * rho, rho), delta_inner):
            break
        rho *= 0.5
    else:
        raise PreconditionError("No inner radius satisfies the gradient lower bound.")
    R = max(4.0 * cfg.t_large, 2.0 * rho)
    for _ in range(PERTURBATION_SEARCH_STEPS):
        if holds((R, 1.5 * R, 2.0 * R), delta_outer):
            break
        R *= 2.0
    else:
        raise PreconditionError("No outer radius satisfies the gradient lower bound.")
    logging.info(f"perturbation radii rho={rho:.4g}, R={R:.4g}")
    return PerturbationSpec(rho=rho, R=R)


def _record(
    u: Field,
    f: Nonlinearity,
    scenario: ScenarioTag,
    method: str,
    cfg: SolveConfig,
    check_local_min: bool = False,
) -> SolutionRecord:
    p = f.p
    asm = assembly_for(u.domain)
    energy, _ = asm.gradient_energy(u.values, p)
    return SolutionRecord(
        field=u,
        residual=asm.dual_norm(grad_Phi(u, f, p).values),
        independent_residual=independent_residual(u, f, p),
        sign=sign_class(u, cfg.trivial_tol),
        energy=eval_Phi(u, f, p),
        scenario=scenario,
        method=method,
        norm=energy ** (1.0 / p.p),
        local_minimizer=local_minimizer_check(u, f, p, seed=cfg.seed) if check_local_min else None,
    )


def distance_matrix(fields: list[Field]) -> list[list[float]]:
    return [[max_norm(u - v) for v in fields] for u in fields]


def _is_new(u: Field, known: list[Field], cfg: SolveConfig) -> bool:
    if max_norm(u) <= cfg.trivial_tol:
        return False
    return all(max_norm(u - other) >= cfg.separation for other in known)


def _require_labels(f: Nonlinearity, spec: SpectrumData, cfg: SolveConfig) -> tuple[RegionLabel, RegionLabel]:
    band = cfg.band_fraction * spec.lambda1
    label0 = classify(f.ab0.a, f.ab0.b, spec, band).label
    label = classify(f.ab.a, f.ab.b, spec, band).label
    if RegionLabel.on_spectrum_band in (label0, label):
        raise OnSpectrumBandError(
            f"(a0,b0) is {label0.value} and (a,b) is {label.value}; resonant data is excluded."
        )
    return label0, label


def solve_third(
    f: Nonlinearity, spec: SpectrumData, domain: Domain, cfg: SolveConfig, lambda1: Optional[float] = None
) -> SolveReport:
    """Signed minimizers u0+ and u0- plus a mountain pass between them on the perturbed functional.

    Raises:
        PreconditionError: (a0,b0) is not above the first nontrivial curve or (a,b) is not below C_l(1)
    """
    p = f.p
    label0, label = _require_labels(f, spec, cfg)
    if label0 is not RegionLabel.above_C2 or label is not RegionLabel.below_Cl1:
        raise PreconditionError(
            f"The third solution needs (a0,b0) above C(2) and (a,b) below C_l(1); "
            f"got (a0,b0) {label0.value} and (a,b) {label.value}."
        )
    lambda1 = spec.lambda1 if lambda1 is None else lambda1
    report = SolveReport(
        scenarios=[ScenarioTag.positive_crossing, ScenarioTag.negative_crossing, ScenarioTag.third_solution],
        labels={"ab0": label0.value, "ab": label.value},
    )
    minimizers = {}
    for sign, tag in ((Sign.positive, ScenarioTag.positive_crossing), (Sign.negative, ScenarioTag.negative_crossing)):
        signed = solve_signed(f, sign, domain, cfg, lambda1)
        if signed.trivial:
            report.missing.append(f"{'positive' if sign is Sign.positive else 'negative'} minimizer")
            continue
        if signed.energy >= 0.0:
            report.notes.append(f"Phi{sign.value} minimizer energy {signed.energy:.6g} is not negative.")
        minimizers[sign] = signed.field
        report.solutions.append(
            _record(signed.field, f, tag, f"minimize Phi{sign.value}", cfg, check_local_min=True)
        )
    if len(minimizers) < 2:
        report.missing.append("third nontrivial solution")
        report.distances = distance_matrix([record.field for record in report.solutions])
        return report

    pert = choose_perturbation(f, domain, cfg)
    report.perturbation = pert
    handle = build_PhiTilde(f, f.ab0, f.ab, pert, p, spec, cfg.band_fraction)
    start, end = minimizers[Sign.positive], minimizers[Sign.negative]
    bend = sine_mode(domain, 2).values
    amplitude = 0.5 * max(max_norm(start), max_norm(end))
    ts = np.linspace(0.0, 1.0, cfg.minimax.beads)
    seed_beads = [
        start.with_values((1.0 - t) * start.values + t * end.values + np.sin(np.pi * t) * amplitude * bend) for t in ts
    ]
    known = [Field.zeros(domain), start, end]
    third: Optional[Field] = None
    method = "mountain pass on the perturbed functional"
    try:
        outcome = ambient_mountain_pass(handle, start, end, cfg.minimax, p, seed_beads=seed_beads)
        polished = newton_solve(Phi_handle(f, p), outcome.saddle, cfg.newton_tol)
        if polished.converged and _is_new(polished.field, known, cfg):
            third = polished.field
        else:
            distance = min(max_norm(polished.field - other) for other in known)
            report.notes.append(f"Mountain pass saddle collapsed onto a known solution (distance {distance:.3g}).")
    except (DegenerateInputError, PreconditionError) as error:
        report.notes.append(f"Mountain pass failed: {error.detail}")
    if third is None:
        method = "deflated Newton"
        starts = [Field(r * bend, domain) for r in np.geomspace(0.25 * cfg.t_small, 2.0 * cfg.t_large, cfg.amplitudes)]
        found = _deflated_search(f, p, starts, known, cfg)
        third = found[0] if found else None
    if third is None:
        report.missing.append("third nontrivial solution")
    else:
        report.solutions.append(_record(third, f, ScenarioTag.third_solution, method, cfg))
    report.distances = distance_matrix([record.field for record in report.solutions])
    return report


def solve_crossing_c2(
    f: Nonlinearity, spec: SpectrumData, eig: EigenPair, domain: Domain, cfg: SolveConfig
) -> list[Field]:
    """Nontrivial solutions when both slope pairs lie above C_u(1) on opposite sides of C(2).

    Deflated Newton from scaled Fucik eigenfunctions of the first nontrivial
    curve at both slope pairs, oriented to the larger slope.
    """
    directions = []
    for ab in (f.ab, f.ab0):
        s = ShiftParam(s=abs(ab.a - ab.b))
        result = mountain_pass_c(s, eig, cfg.minimax)
        w = result.argmax_bead.field
        if ab.a < ab.b:
            w = -w
        directions.append(w.scaled(1.0 / max_norm(w)))
    amplitudes = np.geomspace(0.5 * cfg.t_small, 2.0 * cfg.t_large, cfg.amplitudes)
    starts = [direction.scaled(r) for direction in directions for r in amplitudes]
    return _deflated_search(f, f.p, starts, [Field.zeros(domain)], cfg)


def multiplicity_experiment(
    ab0: FucikParams,
    ab: FucikParams,
    spec: SpectrumData,
    domain: Domain,
    p: Exponent,
    cfg: SolveConfig,
    eig: Optional[EigenPair] = None,
) -> SolveReport:
    """Run every solver whose hypothesis the two slope pairs satisfy and consolidate the results.

    Raises:
        OnSpectrumBandError: either point lies on the spectrum band
    """
    f = make_model_nonlinearity(ab0, ab, p, cfg.t_small, cfg.t_large)
    label0, label = _require_labels(f, spec, cfg)
    lambda1 = spec.lambda1
    scenarios: list[ScenarioTag] = []
    if (ab0.a - lambda1) * (ab.a - lambda1) < 0.0:
        scenarios.append(ScenarioTag.positive_crossing)
    if (ab0.b - lambda1) * (ab.b - lambda1) < 0.0:
        scenarios.append(ScenarioTag.negative_crossing)
    if (label0 is RegionLabel.above_C2) != (label is RegionLabel.above_C2):
        scenarios.append(ScenarioTag.c2_crossing)
    across_lower = (label0 is RegionLabel.below_Cl1) != (label is RegionLabel.below_Cl1)
    across_upper = (label0 in ABOVE_CU1) != (label in ABOVE_CU1)
    if across_lower or across_upper:
        scenarios.append(ScenarioTag.fixed_sign)
    if label0 is RegionLabel.above_C2 and label is RegionLabel.below_Cl1:
        scenarios.append(ScenarioTag.third_solution)

    report = SolveReport(scenarios=scenarios, labels={"ab0": label0.value, "ab": label.value})
    if not scenarios:
        report.notes.append(
            "no multiplicity scenario applies" if label0 is label else "this pair of regions is not covered"
        )
        return report
    logging.info(f"scenarios for {ab0} -> {ab}: {[tag.value for tag in scenarios]}")

    if ScenarioTag.third_solution in scenarios:
        third = solve_third(f, spec, domain, cfg, lambda1)
        report.solutions, report.perturbation = third.solutions, third.perturbation
        report.notes += third.notes
        report.missing += third.missing
    else:
        signed: dict[Sign, Field] = {}
        for sign, tag in ((Sign.positive, ScenarioTag.positive_crossing), (Sign.negative, ScenarioTag.negative_crossing)):
            if tag in scenarios or ScenarioTag.fixed_sign in scenarios:
                result = solve_signed(f, sign, domain, cfg, lambda1)
                if not result.trivial and result.residual <= cfg.report_tol:
                    signed[sign] = result.field
                    report.solutions.append(
                        _record(result.field, f, tag if tag in scenarios else ScenarioTag.fixed_sign,
                                f"critical point of Phi{sign.value}", cfg)
                    )
                elif tag in scenarios:
                    report.missing.append(f"{'positive' if sign is Sign.positive else 'negative'} solution")
        if ScenarioTag.fixed_sign in scenarios:
            if across_lower and across_upper:
                for sign in (Sign.positive, Sign.negative):
                    name = f"{'positive' if sign is Sign.positive else 'negative'} solution"
                    if sign not in signed and name not in report.missing:
                        report.missing.append(name)
            elif not signed:
                report.missing.append("fixed-sign solution")
        if ScenarioTag.c2_crossing in scenarios:
            if label0 in ABOVE_CU1 and label in ABOVE_CU1:
                eig = eig or compute_lambda1(domain, p)
                known = [record.field for record in report.solutions]
                crossing = [u for u in solve_crossing_c2(f, spec, eig, domain, cfg) if _is_new(u, known, cfg)]
                for u in crossing:
                    report.solutions.append(_record(u, f, ScenarioTag.c2_crossing, "deflated Newton", cfg))
                if not crossing and not report.solutions:
                    report.missing.append("nontrivial solution across C(2)")
            elif not report.solutions:
                report.missing.append("nontrivial solution across C(2)")
    report.distances = distance_matrix([record.field for record in report.solutions])
    for record in report.solutions:
        if record.residual > cfg.report_tol:
            report.notes.append(f"{record.method}: residual {record.residual:.2e} above report tolerance")
    return report
