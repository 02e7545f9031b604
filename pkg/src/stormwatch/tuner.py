"""Random hyperparameter search scored against a seed storm list.

Each trial draws (interval width, changepoint prior scale, changepoint range),
runs detection on all four signals, and is scored by precision D/A and recall
D/S, where D is the number of distinct seed storms intersected by at least one
candidate window, A the candidate count, and S the seed count. Selection is
lexicographic — recall first, precision second — with deterministic
tie-breaking (fewer candidates, then lower trial index).
"""

from __future__ import annotations

import datetime as dt
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .dates import DateSpan
from .detector import CandidateWindow, DetectorConfig, detect_candidates
from .errors import MalformedInputError, SearchError
from .forecaster import FittedModel, HolidayCalendar, HyperParams, fit, flag_anomalies, predict_with_interval
from .signals import ALL_KINDS, SignalBundle, SignalKind

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SeedStorm:
    label: str
    start: dt.date
    end: dt.date

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"seed storm {self.label!r} has end before start")

    @property
    def span(self) -> DateSpan:
        return DateSpan(self.start, self.end)


@dataclass(frozen=True)
class SearchSpace:
    interval_width_range: tuple[float, float] = (0.80, 0.999)
    changepoint_prior_scale_range: tuple[float, float] = (0.001, 0.5)  # sampled log-uniform
    changepoint_range_range: tuple[float, float] = (0.5, 0.98)
    n_trials: int = 50
    rng_seed: int = 0

    def __post_init__(self):
        for lo, hi in (
            self.interval_width_range,
            self.changepoint_prior_scale_range,
            self.changepoint_range_range,
        ):
            if not lo < hi:
                raise ValueError(f"range ({lo}, {hi}) must have lo < hi")
        if not (0.0 < self.interval_width_range[0] and self.interval_width_range[1] < 1.0):
            raise ValueError("interval_width range must sit inside (0,1)")
        if self.changepoint_prior_scale_range[0] <= 0:
            raise ValueError("changepoint_prior_scale range must be positive")
        if not (0.0 < self.changepoint_range_range[0] and self.changepoint_range_range[1] <= 1.0):
            raise ValueError("changepoint_range range must sit inside (0,1]")
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")


@dataclass
class TrialResult:
    trial_index: int
    hyperparams: HyperParams
    candidates: list[CandidateWindow]
    matched_storms: int  # D: distinct seeds matched
    n_candidates: int  # A
    n_seeds: int  # S
    precision: float
    recall: float
    wall_time_s: float = 0.0
    failed: bool = False
    error: str | None = None

    def log_record(self) -> dict:
        return {
            "trial": self.trial_index,
            "interval_width": self.hyperparams.interval_width,
            "changepoint_prior_scale": self.hyperparams.changepoint_prior_scale,
            "changepoint_range": self.hyperparams.changepoint_range,
            "A": self.n_candidates,
            "D": self.matched_storms,
            "S": self.n_seeds,
            "precision": self.precision,
            "recall": self.recall,
            "failed": self.failed,
            "wall_time_s": self.wall_time_s,
        }


def match(candidate: CandidateWindow, storm: SeedStorm, min_overlap_days: int = 1) -> bool:
    """True when the two inclusive date ranges share at least ``min_overlap_days`` days."""
    return candidate.span.overlap_days(storm.span) >= min_overlap_days


def score(
    candidates: list[CandidateWindow],
    seeds: list[SeedStorm],
    min_overlap_days: int = 1,
) -> tuple[float, float, int]:
    """(precision, recall, D) of a candidate list against the seed list."""
    if not seeds:
        raise MalformedInputError("seed storm list is empty; recall is undefined")
    matched = sum(
        1 for storm in seeds if any(match(c, storm, min_overlap_days) for c in candidates)
    )
    a = len(candidates)
    precision = matched / a if a > 0 else 0.0
    recall = matched / len(seeds)
    return precision, recall, matched


def sample_hyperparams(space: SearchSpace, trial_index: int, defaults: HyperParams | None = None) -> HyperParams:
    """Deterministic draw for one trial: uniform interval width and changepoint
    range, log-uniform changepoint prior scale."""
    if trial_index >= space.n_trials:
        raise ValueError(f"trial_index {trial_index} >= n_trials {space.n_trials}")
    rng = np.random.default_rng([space.rng_seed, trial_index])
    iw = float(rng.uniform(*space.interval_width_range))
    lo, hi = space.changepoint_prior_scale_range
    cps = float(np.exp(rng.uniform(np.log(lo), np.log(hi))))
    cr = float(rng.uniform(*space.changepoint_range_range))
    base = defaults or HyperParams()
    return replace(base, interval_width=iw, changepoint_prior_scale=cps, changepoint_range=cr)


@dataclass
class TrialModels:
    """Fitted per-signal models and flags for one trial, kept for downstream reuse."""

    models: dict[SignalKind, FittedModel] = field(default_factory=dict)
    flags: dict[SignalKind, np.ndarray] = field(default_factory=dict)
    lower: dict[SignalKind, np.ndarray] = field(default_factory=dict)
    upper: dict[SignalKind, np.ndarray] = field(default_factory=dict)
    yhat: dict[SignalKind, np.ndarray] = field(default_factory=dict)


def run_trial(
    bundle: SignalBundle,
    hp: HyperParams,
    holidays: HolidayCalendar | None = None,
    detector: DetectorConfig = DetectorConfig(),
    direction: str = "low",
    campaign_id: str = "adhoc",
    iteration: int | None = None,
) -> tuple[list[CandidateWindow], TrialModels]:
    """Fit all four signals under one hyperparameter draw and cluster candidates."""
    artifacts = TrialModels()
    observed = {}
    for kind in ALL_KINDS:
        series = bundle.series[kind]
        model = fit(series, hp, holidays)
        forecast = predict_with_interval(model, series.span)
        artifacts.models[kind] = model
        artifacts.flags[kind] = flag_anomalies(series, forecast, direction)
        artifacts.lower[kind] = forecast.lower
        artifacts.upper[kind] = forecast.upper
        artifacts.yhat[kind] = forecast.yhat
        observed[kind] = series.values
    candidates = detect_candidates(
        artifacts.flags,
        detector,
        axis_start=bundle.start,
        campaign_id=campaign_id,
        iteration=iteration,
        observed_by_kind=observed,
        lower_by_kind=artifacts.lower,
    )
    return candidates, artifacts


def trial_sort_key(trial: TrialResult):
    """Lexicographic: recall, then precision, then fewer candidates, then lower index."""
    return (trial.recall, trial.precision, -trial.n_candidates, -trial.trial_index)


def select_best(trials: list[TrialResult]) -> TrialResult:
    usable = [t for t in trials if not t.failed]
    if not usable:
        raise SearchError("all trials failed")
    return max(usable, key=trial_sort_key)


def pareto_front(trials: list[TrialResult]) -> list[TrialResult]:
    """Trials not dominated in (recall, precision), sorted by recall descending."""
    usable = [t for t in trials if not t.failed]
    front = [
        t
        for t in usable
        if not any(
            (o.recall >= t.recall and o.precision >= t.precision)
            and (o.recall > t.recall or o.precision > t.precision)
            for o in usable
        )
    ]
    return sorted(front, key=lambda t: (-t.recall, -t.precision, t.trial_index))


def random_search(
    bundle: SignalBundle,
    seeds: list[SeedStorm],
    space: SearchSpace | None = None,
    holidays: HolidayCalendar | None = None,
    *,
    detector: DetectorConfig = DetectorConfig(),
    direction: str = "low",
    min_overlap_days: int = 1,
    defaults: HyperParams | None = None,
    campaign_id: str = "adhoc",
    iteration: int | None = None,
    max_workers: int = 1,
    progress=None,
    keep_artifacts: bool = False,
) -> tuple[TrialResult, list[TrialResult], dict[int, TrialModels]]:
    """Run the full search and pick the best trial.

    Returns (best, all_trials, artifacts); ``artifacts`` maps trial index to the
    fitted models when ``keep_artifacts`` is set (always kept for the winner).
    """
    space = space or SearchSpace()
    if not seeds:
        raise MalformedInputError("seed storm list is empty")
    for storm in seeds:
        if not bundle.span.intersects(storm.span):
            raise MalformedInputError(
                f"seed storm {storm.label!r} ({storm.span.isoformat()}) outside bundle span"
            )

    artifacts: dict[int, TrialModels] = {}

    def evaluate(trial_index: int) -> TrialResult:
        hp = sample_hyperparams(space, trial_index, defaults)
        started = time.perf_counter()
        try:
            candidates, trial_models = run_trial(
                bundle, hp, holidays, detector, direction, campaign_id, iteration
            )
            precision, recall, matched = score(candidates, seeds, min_overlap_days)
            result = TrialResult(
                trial_index=trial_index,
                hyperparams=hp,
                candidates=candidates,
                matched_storms=matched,
                n_candidates=len(candidates),
                n_seeds=len(seeds),
                precision=precision,
                recall=recall,
                wall_time_s=time.perf_counter() - started,
            )
            artifacts[trial_index] = trial_models
            return result
        except Exception as exc:  # noqa: BLE001 - a failed trial must not sink the search
            logger.warning("trial %d failed: %s", trial_index, exc)
            return TrialResult(
                trial_index=trial_index,
                hyperparams=hp,
                candidates=[],
                matched_storms=0,
                n_candidates=0,
                n_seeds=len(seeds),
                precision=0.0,
                recall=0.0,
                wall_time_s=time.perf_counter() - started,
                failed=True,
                error=str(exc),
            )

    results: list[TrialResult] = []
    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(evaluate, range(space.n_trials)))
    else:
        for i in range(space.n_trials):
            results.append(evaluate(i))
            if progress is not None:
                done = [t for t in results if not t.failed]
                progress(i + 1, max(done, key=trial_sort_key) if done else None)
    results.sort(key=lambda t: t.trial_index)
    best = select_best(results)
    if not keep_artifacts:
        artifacts = {best.trial_index: artifacts[best.trial_index]}
    return best, results, artifacts
