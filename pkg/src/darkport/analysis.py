"""Campaign-level statistics and the non-commutativity bound.

The chain is: fitted visibilities per run -> Delta V and Gamma-ratio
distributions -> theta bound.  The Gamma ratio is the headline observable
because the Sagnac's own visibility cancels from it; a campaign mean
further than 5 standard errors from 1 raises the non-commutativity flag.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .fitting import FitInputError, InvalidFitError, fit_sinusoid, normalize
from .interferometer import (
    NonPhysicalVisibilityError,
    VisibilityValue,
    gamma_of_model,
    gamma_ratio,
    theta_bound,
)
from .photonsim import CampaignConfig, RunPair, simulate_campaign

__all__ = [
    "RunRecord",
    "DeltaVStats",
    "GammaRatioStats",
    "BoundReport",
    "SweepPoint",
    "SweepResult",
    "DETECTION_SIGMA",
    "records_from_runs",
    "delta_v_statistics",
    "gamma_ratio_distribution",
    "bound_from_campaign",
    "lc_systematic",
    "sensitivity_sweep",
]

DETECTION_SIGMA = 5.0


@dataclass(frozen=True)
class RunRecord:
    """Per-run fitted visibilities, one per detector and configuration.

    The slots are named for the headline campaign (NIM-only reference,
    BOTH toggled); LC-only campaigns reuse them as off/on.  A slot is None
    when its fit failed or did not converge, which marks the record
    partial; statistics use only detector pairs with both slots present.
    """

    run_index: int
    v_nim_d1: VisibilityValue | None = None
    v_nim_d2: VisibilityValue | None = None
    v_both_d1: VisibilityValue | None = None
    v_both_d2: VisibilityValue | None = None

    @property
    def is_partial(self) -> bool:
        return None in (self.v_nim_d1, self.v_nim_d2, self.v_both_d1, self.v_both_d2)

    def detector_pairs(self) -> list[tuple[VisibilityValue, VisibilityValue]]:
        """Usable (V_both, V_nim) pairs, detector 1 then detector 2."""
        pairs = []
        for v_both, v_nim in ((self.v_both_d1, self.v_nim_d1),
                              (self.v_both_d2, self.v_nim_d2)):
            if v_both is not None and v_nim is not None:
                pairs.append((v_both, v_nim))
        return pairs


@dataclass(frozen=True)
class DeltaVStats:
    """Pooled Delta V = V_both - V_nim statistics over detectors and runs."""

    values: np.ndarray
    mean: float
    std: float
    stderr: float

    @property
    def n_values(self) -> int:
        return int(self.values.shape[0])


@dataclass(frozen=True)
class GammaRatioStats:
    """Per-point Gamma ratios with campaign mean and two sigma estimates.

    stderr is the scatter-based standard error of the mean;
    mean_point_sigma is the average per-point propagated sigma, reported
    alongside because the two need not agree when the noise model is off.
    """

    values: np.ndarray
    point_sigmas: np.ndarray
    mean: float
    std: float
    stderr: float
    mean_point_sigma: float
    n_excluded: int

    @property
    def n_values(self) -> int:
        return int(self.values.shape[0])

    @property
    def noncommutative(self) -> bool:
        return abs(self.mean - 1.0) > DETECTION_SIGMA * self.stderr


@dataclass(frozen=True)
class BoundReport:
    """Everything the campaign says about phase commutativity."""

    n_values: int
    n_complete_runs: int
    delta_v_mean: float
    delta_v_std: float
    delta_v_stderr: float
    gamma_ratio_mean: float
    gamma_ratio_stderr: float
    gamma_ratio_point_sigma: float
    theta_central_deg: float
    theta_conservative_deg: float
    noncommutative: bool
    delta_v_hist: tuple[tuple[float, int], ...]
    gamma_ratio_hist: tuple[tuple[float, int], ...]


def _fit_visibility(ig, detector: int) -> VisibilityValue | None:
    try:
        result = fit_sinusoid(normalize(ig, detector=detector))
    except (FitInputError, InvalidFitError):
        return None
    return result.visibility if result.converged else None


def records_from_runs(runs: Iterable[RunPair]) -> list[RunRecord]:
    """Fit every interferogram of every run; failures leave None slots."""
    records = []
    for run in runs:
        records.append(RunRecord(
            run_index=run.run_index,
            v_nim_d1=_fit_visibility(run.nim, 1),
            v_nim_d2=_fit_visibility(run.nim, 2),
            v_both_d1=_fit_visibility(run.both, 1),
            v_both_d2=_fit_visibility(run.both, 2),
        ))
    return records


def _pooled_pairs(records: Iterable[RunRecord]) -> list[tuple[VisibilityValue, VisibilityValue]]:
    pairs = []
    for rec in records:
        pairs.extend(rec.detector_pairs())
    return pairs


def delta_v_statistics(records: Sequence[RunRecord]) -> DeltaVStats:
    """Delta V mean, sample std, and standard error, pooled over detectors."""
    pairs = _pooled_pairs(records)
    if len(pairs) < 2:
        raise ValueError(f"need at least 2 Delta V values, got {len(pairs)}")
    values = np.array([v_both.value - v_nim.value for v_both, v_nim in pairs])
    std = float(np.std(values, ddof=1))
    return DeltaVStats(values=values, mean=float(np.mean(values)), std=std,
                       stderr=std / math.sqrt(len(values)))


def gamma_ratio_distribution(records: Sequence[RunRecord]) -> GammaRatioStats:
    """Per-point Gamma ratios pooled over detectors and runs.

    Points with non-physical visibilities are excluded with a warning
    rather than failing the campaign.
    """
    values = []
    sigmas = []
    n_excluded = 0
    for v_both, v_nim in _pooled_pairs(records):
        try:
            ratio = gamma_ratio(v_both, v_nim)
        except NonPhysicalVisibilityError as err:
            warnings.warn(f"excluding non-physical point: {err}", stacklevel=2)
            n_excluded += 1
            continue
        values.append(ratio.value)
        sigmas.append(ratio.sigma)
    if not values:
        raise ValueError("no usable Gamma-ratio points")
    arr = np.array(values)
    point_sigmas = np.array(sigmas)
    std = float(np.std(arr, ddof=1)) if arr.size > 1 else 0.0
    return GammaRatioStats(values=arr, point_sigmas=point_sigmas,
                           mean=float(np.mean(arr)), std=std,
                           stderr=std / math.sqrt(arr.size),
                           mean_point_sigma=float(np.mean(point_sigmas)),
                           n_excluded=n_excluded)


def _histogram(values: np.ndarray, bins="fd") -> tuple[tuple[float, int], ...]:
    """Histogram as (bin_center, count) rows; Freedman-Diaconis by default.

    Degenerate samples (zero spread) collapse to a single bin instead of
    tripping the automatic bin-width estimate.
    """
    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        return ()
    if np.ptp(arr) == 0.0:
        return ((float(arr[0]), int(arr.size)),)
    counts, edges = np.histogram(arr, bins=bins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return tuple((float(c), int(n)) for c, n in zip(centers, counts))


def bound_from_campaign(records: Sequence[RunRecord], bins="fd") -> BoundReport:
    """Assemble the campaign's bound report.

    theta uses the Gamma-ratio campaign mean and its scatter stderr; both
    the central (acos of the mean) and conservative (acos of mean minus
    one stderr) conventions are reported.
    """
    dv = delta_v_statistics(records)
    gr = gamma_ratio_distribution(records)
    theta = theta_bound(gr.mean, gr.stderr)
    n_complete = sum(1 for rec in records if not rec.is_partial)
    return BoundReport(
        n_values=dv.n_values,
        n_complete_runs=n_complete,
        delta_v_mean=dv.mean,
        delta_v_std=dv.std,
        delta_v_stderr=dv.stderr,
        gamma_ratio_mean=gr.mean,
        gamma_ratio_stderr=gr.stderr,
        gamma_ratio_point_sigma=gr.mean_point_sigma,
        theta_central_deg=theta.central_deg,
        theta_conservative_deg=theta.conservative_deg,
        noncommutative=gr.noncommutative,
        delta_v_hist=_histogram(dv.values, bins),
        gamma_ratio_hist=_histogram(gr.values, bins),
    )


def lc_systematic(records: Sequence[RunRecord]) -> DeltaVStats:
    """Delta_LC = V_on - V_off for an LC-only toggle campaign.

    Same machinery as delta_v_statistics; the records' nim slots hold the
    LC-off fits and the both slots the LC-on fits.
    """
    return delta_v_statistics(records)


@dataclass(frozen=True)
class SweepPoint:
    """One injected epsilon: closed-form shift and empirical significance."""

    epsilon: float
    gamma_shift: float
    significance: float


@dataclass(frozen=True)
class SweepResult:
    points: tuple[SweepPoint, ...]
    min_detectable_epsilon: float | None
    threshold_sigma: float = DETECTION_SIGMA


def sensitivity_sweep(epsilon_grid: Iterable[float],
                      config: CampaignConfig) -> SweepResult:
    """Detection reach versus injected quaternionic LC phase (0, eps, 0).

    gamma_shift is the closed-form Gamma_nim - Gamma_both (up to 2 when
    the defect saturates).  The significance compares what the visibility
    chain can actually see, |Gamma_both|/Gamma_nim (visibilities only
    measure |Gamma|), against the empirical scatter of a simulated
    campaign at that epsilon; epsilon = 0 therefore gives exactly 0.
    """
    points = []
    min_eps = None
    for eps in epsilon_grid:
        cfg = config.with_epsilon(float(eps))
        model_nim, model_both = cfg.build_models()
        g_nim = gamma_of_model(model_nim)
        g_both = gamma_of_model(model_both)
        if g_nim <= 0.0:
            raise ValueError(f"reference configuration must have Gamma > 0, got {g_nim!r}")
        shift = g_nim - g_both
        visible_deviation = abs(1.0 - abs(g_both) / g_nim)
        runs = simulate_campaign(cfg.build_models(), cfg.scan, cfg.n_runs, cfg.master_seed)
        stats = gamma_ratio_distribution(records_from_runs(runs))
        if visible_deviation == 0.0:
            significance = 0.0
        elif stats.stderr > 0.0:
            significance = visible_deviation / stats.stderr
        else:
            significance = math.inf
        points.append(SweepPoint(epsilon=float(eps), gamma_shift=shift,
                                 significance=significance))
        if min_eps is None and significance >= DETECTION_SIGMA:
            min_eps = float(eps)
    return SweepResult(points=tuple(points), min_detectable_epsilon=min_eps)
