import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional

import numpy as np

from src.exceptions import ConvergenceError
from src.grid import Field, sine_mode
from src.minimax import mountain_pass_c
from src.models.fucik_models import Domain, Exponent, MinimaxConfig, ShiftParam
from src.models.schema_models import EigenPair, GapProbeResult
from src.sphere import SpherePoint, descend, newton_polish, normalize

# Residual at which descent hands over to the bordered Newton solve.
DESCENT_HANDOVER = 1e-4
GAP_MARGIN = 0.1
# Iterations between entries of the recorded descent trace.
DESCENT_LOG_EVERY = 10
GAP_PROBE_MODES = 8


def initial_bump(domain: Domain, p: Exponent) -> SpherePoint:
    """Normalized interpolant of (x - left)(right - x)."""
    return normalize(Field.interpolate(lambda x: (x - domain.left) * (domain.right - x), domain), p)


def compute_lambda1(
    dom: Domain, p: Exponent, tol: float = 1e-8, max_iter: int = 100000, log_every: int = DESCENT_LOG_EVERY
) -> EigenPair:
    """First eigenpair by descent of the Rayleigh energy on the unit sphere.

    Raises:
        ConvergenceError: the residual stays above tol, or the limit changes sign
    """
    s = ShiftParam(s=0.0)
    start = initial_bump(dom, p)
    result = descend(start, s, p, max(tol, DESCENT_HANDOVER), max_iter=max_iter, log_every=log_every)
    phi, value, residual = result.point, result.value, result.residual
    if residual > tol:
        phi, value, residual = newton_polish(phi, s, p, tol)
    iterations = result.iterations
    if np.all(phi.values < 0.0):
        phi = -phi
    if not np.all(phi.values > 0.0):
        raise ConvergenceError(
            "First eigenfunction candidate changes sign; restart the descent from another positive guess.",
            best=phi,
            residual=residual,
        )
    if residual > tol:
        raise ConvergenceError(
            f"First eigenpair residual {residual:.3e} above tolerance {tol:.1e}.", best=phi, residual=residual
        )
    logging.info(f"lambda1 = {value:.10g} (p = {p.p:g}, n = {dom.n_interior}, residual {residual:.2e})")
    return EigenPair(
        eigenvalue=value,
        phi=phi,
        residual=residual,
        p=p,
        iterations=iterations,
        history=[list(entry) for entry in result.history],
    )


def compute_lambda2(
    dom: Domain, p: Exponent, tol: float = 1e-6, eig: Optional[EigenPair] = None, cfg: Optional[MinimaxConfig] = None
) -> float:
    """Second eigenvalue as the minimax value c(0)."""
    if eig is None:
        eig = compute_lambda1(dom, p)
    cfg = cfg or MinimaxConfig(grad_tol=tol)
    result = mountain_pass_c(ShiftParam(s=0.0), eig, cfg)
    logging.info(f"lambda2 = {result.c:.10g} (residual {result.grad_norm_at_max:.2e})")
    return result.c


def random_smooth_start(domain: Domain, p: Exponent, rng: np.random.Generator) -> SpherePoint:
    coefficients = rng.normal(size=GAP_PROBE_MODES)
    values = sum(c * sine_mode(domain, k + 1).values for k, c in enumerate(coefficients))
    return normalize(Field(values, domain), p)


def spectral_gap_probe(
    eig: EigenPair,
    s: ShiftParam,
    runs: int = 50,
    seed: int = 7,
    tol: float = 1e-6,
    max_iter: int = 5000,
    workers: int = 1,
) -> GapProbeResult:
    """Random descent runs on J_s; collects converged values inside (lambda1 - s, lambda1)."""
    domain = eig.phi.domain
    p = eig.p
    rngs = [np.random.default_rng(child) for child in np.random.SeedSequence(seed).spawn(runs)]

    def single_run(rng: np.random.Generator):
        start = random_smooth_start(domain, p, rng)
        outcome = descend(start, s, p, tol, max_iter=max_iter)
        return outcome.value if outcome.converged else None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            outcomes = list(executor.map(single_run, rngs))
    else:
        outcomes = [single_run(rng) for rng in rngs]
    values = [value for value in outcomes if value is not None]
    low = eig.eigenvalue - s.s + GAP_MARGIN
    high = eig.eigenvalue - GAP_MARGIN
    violations = [value for value in values if low < value < high]
    if violations:
        logging.warning(f"gap probe s={s.s:g}: {len(violations)} converged values inside ({low:.4g}, {high:.4g})")
    return GapProbeResult(
        s=s.s, lambda1=eig.eigenvalue, runs=runs, converged_runs=len(values), values=values, violations=violations
    )
