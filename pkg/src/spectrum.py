import logging
from concurrent.futures import ThreadPoolExecutor
from typing import Optional, Sequence

import numpy as np

from src.exceptions import ConvergenceError, DegenerateInputError, ExtrapolationError, PreconditionError
from src.minimax import mountain_pass_c
from src.models.fucik_models import MinimaxConfig, ShiftParam
from src.models.schema_models import EigenPair, MinimaxResult
from src.models.spectrum_models import (
    REGION_GROUPS,
    CurveFailure,
    CurvePoint,
    Provenance,
    RegionLabel,
    RegionPrediction,
    SpectrumData,
    StabilityProbe,
)
from src.sphere import Path

BAND_FRACTION = 0.02
PROBE_ANGLES = 16


def default_s_grid(lambda1: float) -> list[float]:
    """Geometric s-grid resolving the curvature near s = 0 and the approach to the asymptote."""
    return [0.0, lambda1 / 4.0, lambda1 / 2.0, lambda1, 2.0 * lambda1, 5.0 * lambda1]


def trace_curve(
    eig: EigenPair,
    s_values: Sequence[float],
    cfg: MinimaxConfig,
    provenance: Optional[Provenance] = None,
) -> SpectrumData:
    """Sample the first nontrivial curve at the given shifts.

    Failed shifts are kept as failure markers; a curve that is not strictly
    decreasing in c is flagged through SpectrumData.monotone.

    Raises:
        PreconditionError: s_values is not ascending from 0
    """
    s_values = [float(s) for s in s_values]
    if not s_values or s_values[0] != 0.0 or any(b <= a for a, b in zip(s_values, s_values[1:])):
        raise PreconditionError("s_values must be strictly ascending and start at 0.")

    results: list[Optional[MinimaxResult]] = []
    failures: list[CurveFailure] = []

    def attempt(s: float, initial: Optional[Path]) -> Optional[MinimaxResult]:
        try:
            return mountain_pass_c(ShiftParam(s=s), eig, cfg, initial=initial)
        except (ConvergenceError, DegenerateInputError) as error:
            logging.warning(f"curve point s={s:g} failed: {error.detail}")
            failures.append(CurveFailure(s=s, detail=error.detail))
            return None

    if cfg.warm_start:
        previous: Optional[Path] = None
        for s in s_values:
            result = attempt(s, previous)
            results.append(result)
            if result is not None:
                previous = result.path
    else:
        with ThreadPoolExecutor(max_workers=cfg.workers) as executor:
            results = list(executor.map(lambda s: attempt(s, None), s_values))
        failures.sort(key=lambda failure: failure.s)

    curve = [CurvePoint.from_sc(r.s, r.c, r.grad_norm_at_max) for r in results if r is not None]
    if not curve or curve[0].s != 0.0:
        raise ConvergenceError("The curve point at s = 0 failed; lambda2 is unavailable.")
    c_values = np.array([point.c for point in curve])
    monotone = bool(np.all(np.diff(c_values) < 0.0))
    if not monotone:
        logging.warning("Traced curve is not strictly decreasing; dataset flagged.")
    return SpectrumData(
        lambda1=eig.eigenvalue,
        lambda2=curve[0].c,
        curve=curve,
        failures=failures,
        monotone=monotone,
        provenance=provenance,
    )


def classify(a: float, b: float, spec: SpectrumData, band: Optional[float] = None) -> RegionPrediction:
    """Region of (a, b) relative to the trivial lines and the first nontrivial curve.

    Raises:
        ExtrapolationError: both slopes exceed lambda1 and |a - b| lies outside the traced range
    """
    if band is None:
        band = BAND_FRACTION * spec.lambda1
    lambda1 = spec.lambda1

    def prediction(label: RegionLabel, distance: Optional[float] = None) -> RegionPrediction:
        return RegionPrediction(a=a, b=b, label=label, groups=list(REGION_GROUPS[label]), distance_to_spectrum=distance)

    if abs(a - lambda1) < band or abs(b - lambda1) < band:
        return prediction(RegionLabel.on_spectrum_band)
    if a < lambda1 and b < lambda1:
        return prediction(RegionLabel.below_Cl1)
    if (a > lambda1) != (b > lambda1):
        return prediction(RegionLabel.between_Cl1_Cu1)
    high, low = max(a, b), min(a, b)
    c = spec.interpolate_c(high - low)
    distance = spec.distance_to(a, b)
    if distance < band or abs(low - c) < band:
        return prediction(RegionLabel.on_spectrum_band, distance)
    if low < c:
        return prediction(RegionLabel.between_Cu1_C2, distance)
    return prediction(RegionLabel.above_C2, distance)


def region_stability_probe(
    a0: float, b0: float, spec: SpectrumData, band: Optional[float] = None, radius: float = 0.1
) -> StabilityProbe:
    """Classify samples on two circles around (a0, b0); stable iff every sample keeps the center's label.

    A center on the spectrum band is refused: the probe reports the band label and is not stable.
    """
    center = classify(a0, b0, spec, band)
    if center.label is RegionLabel.on_spectrum_band:
        return StabilityProbe(center=(a0, b0), radius=radius, label=center.label, stable=False, samples=0)
    angles = np.linspace(0.0, 2.0 * np.pi, PROBE_ANGLES, endpoint=False)
    crossed: list[RegionLabel] = []
    stable = True
    samples = 0
    for r in (0.5 * radius, radius):
        for angle in angles:
            samples += 1
            try:
                label = classify(a0 + r * np.cos(angle), b0 + r * np.sin(angle), spec, band).label
            except ExtrapolationError:
                stable = False
                continue
            if label is not center.label:
                stable = False
                if label not in crossed:
                    crossed.append(label)
    if crossed:
        logging.info(f"stability probe at ({a0:g}, {b0:g}) crossed into {[label.value for label in crossed]}")
    return StabilityProbe(
        center=(a0, b0), radius=radius, label=center.label, stable=stable, crossed=crossed, samples=samples
    )
