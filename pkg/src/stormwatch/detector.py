"""From per-signal anomaly flags to dated storm-candidate windows.

A candidate is a maximal stretch of days on which at least ``quorum`` of the
four signals flag an anomaly, lasting at least ``min_duration`` consecutive
days. Alternative readings of the clustering rule (window-level quorum,
per-signal duration filtering before the vote) are available behind
``DetectorConfig`` switches.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .dates import DateSpan
from .errors import MalformedInputError
from .signals import ALL_KINDS, SignalKind

DEFAULT_QUORUM = 3
DEFAULT_MIN_DURATION = 2


@dataclass(frozen=True)
class DetectorConfig:
    quorum: int = DEFAULT_QUORUM
    min_duration: int = DEFAULT_MIN_DURATION
    majority_mode: str = "day"  # "day" | "window"
    ordering: str = "majority_then_duration"  # | "duration_then_majority"

    def __post_init__(self):
        if self.quorum < 1 or self.quorum > len(ALL_KINDS):
            raise ValueError(f"quorum must be 1..{len(ALL_KINDS)}")
        if self.min_duration < 1:
            raise ValueError("min_duration must be >= 1")
        if self.majority_mode not in ("day", "window"):
            raise ValueError(f"unknown majority_mode {self.majority_mode!r}")
        if self.ordering not in ("majority_then_duration", "duration_then_majority"):
            raise ValueError(f"unknown ordering {self.ordering!r}")


@dataclass(frozen=True)
class AnomalyRun:
    """A maximal stretch of consecutively flagged days for one signal."""

    kind: SignalKind
    start: dt.date
    end: dt.date

    @property
    def length(self) -> int:
        return (self.end - self.start).days + 1

    @property
    def span(self) -> DateSpan:
        return DateSpan(self.start, self.end)


@dataclass
class CandidateWindow:
    """A dated storm candidate with its per-day signal votes."""

    id: str
    start: dt.date
    end: dt.date
    votes: dict[dt.date, frozenset[SignalKind]] = field(default_factory=dict)
    peak_deficit: float = float("nan")

    @property
    def span(self) -> DateSpan:
        return DateSpan(self.start, self.end)

    @property
    def duration_days(self) -> int:
        return self.span.n_days

    def vote_counts(self) -> dict[SignalKind, int]:
        """Number of window days each signal flagged."""
        counts = {k: 0 for k in ALL_KINDS}
        for kinds in self.votes.values():
            for k in kinds:
                counts[k] += 1
        return counts

    def clipped(self, span: DateSpan) -> "CandidateWindow | None":
        sub = self.span.intersection(span)
        if sub is None:
            return None
        return CandidateWindow(
            id=self.id,
            start=sub.start,
            end=sub.end,
            votes={d: v for d, v in self.votes.items() if d in sub},
            peak_deficit=self.peak_deficit,
        )


def candidate_id(start: dt.date, campaign_id: str = "adhoc", iteration: int | None = None) -> str:
    if iteration is None:
        return f"{campaign_id}:{start.isoformat()}"
    return f"{campaign_id}:i{iteration}:{start.isoformat()}"


def extract_runs(flags, kind: SignalKind, axis_start: dt.date) -> list[AnomalyRun]:
    """Maximal True-runs of a flag vector, in date order."""
    flags = np.asarray(flags, dtype=bool)
    runs: list[AnomalyRun] = []
    start_idx = None
    for i, f in enumerate(flags):
        if f and start_idx is None:
            start_idx = i
        elif not f and start_idx is not None:
            runs.append(
                AnomalyRun(
                    kind=kind,
                    start=axis_start + dt.timedelta(days=start_idx),
                    end=axis_start + dt.timedelta(days=i - 1),
                )
            )
            start_idx = None
    if start_idx is not None:
        runs.append(
            AnomalyRun(
                kind=kind,
                start=axis_start + dt.timedelta(days=start_idx),
                end=axis_start + dt.timedelta(days=flags.size - 1),
            )
        )
    return runs


def _validated_flags(flags_by_kind: dict[SignalKind, np.ndarray]) -> dict[SignalKind, np.ndarray]:
    missing = [k.value for k in ALL_KINDS if k not in flags_by_kind]
    if missing:
        raise MalformedInputError(f"missing flag vectors for: {', '.join(missing)}")
    arrays = {k: np.asarray(flags_by_kind[k], dtype=bool) for k in ALL_KINDS}
    sizes = {a.size for a in arrays.values()}
    if len(sizes) != 1:
        raise MalformedInputError("flag vectors must be aligned to one date axis")
    return arrays


def majority_days(flags_by_kind: dict[SignalKind, np.ndarray], quorum: int = DEFAULT_QUORUM) -> np.ndarray:
    """Days on which at least ``quorum`` signals flag an anomaly."""
    arrays = _validated_flags(flags_by_kind)
    counts = np.sum([arrays[k] for k in ALL_KINDS], axis=0)
    return counts >= quorum


def _runs_to_windows(
    majority: np.ndarray,
    arrays: dict[SignalKind, np.ndarray],
    min_duration: int,
    axis_start: dt.date,
    campaign_id: str,
    iteration: int | None,
    observed_by_kind,
    lower_by_kind,
) -> list["CandidateWindow"]:
    windows = []
    for run in extract_runs(majority, SignalKind.TOPICS, axis_start):
        if run.length < min_duration:
            continue
        i0 = (run.start - axis_start).days
        votes = {}
        for offset in range(run.length):
            day = run.start + dt.timedelta(days=offset)
            kinds = frozenset(k for k in ALL_KINDS if arrays[k][i0 + offset])
            votes[day] = kinds
        window = CandidateWindow(
            id=candidate_id(run.start, campaign_id, iteration),
            start=run.start,
            end=run.end,
            votes=votes,
        )
        window.peak_deficit = _peak_deficit(window, axis_start, observed_by_kind, lower_by_kind)
        windows.append(window)
    return windows


def _peak_deficit(window, axis_start, observed_by_kind, lower_by_kind) -> float:
    """Largest gap between the forecast lower bound and the observed value,
    measured on the window's most-supporting signal."""
    if observed_by_kind is None or lower_by_kind is None:
        return float("nan")
    counts = window.vote_counts()
    best_kind = max(ALL_KINDS, key=lambda k: (counts[k], -ALL_KINDS.index(k)))
    obs = np.asarray(observed_by_kind[best_kind], dtype=float)
    low = np.asarray(lower_by_kind[best_kind], dtype=float)
    i0 = (window.start - axis_start).days
    i1 = i0 + window.duration_days
    gap = low[i0:i1] - obs[i0:i1]
    gap = gap[~np.isnan(gap)]
    return float(gap.max()) if gap.size else float("nan")


def form_candidates(
    majority: np.ndarray,
    flags_by_kind: dict[SignalKind, np.ndarray],
    min_duration: int = DEFAULT_MIN_DURATION,
    *,
    axis_start: dt.date,
    campaign_id: str = "adhoc",
    iteration: int | None = None,
    observed_by_kind: dict[SignalKind, np.ndarray] | None = None,
    lower_by_kind: dict[SignalKind, np.ndarray] | None = None,
) -> list[CandidateWindow]:
    """Maximal majority runs of at least ``min_duration`` days, with vote sets."""
    arrays = _validated_flags(flags_by_kind)
    majority = np.asarray(majority, dtype=bool)
    if majority.size != next(iter(arrays.values())).size:
        raise MalformedInputError("majority vector must be aligned to the flag vectors")
    return _runs_to_windows(
        majority, arrays, min_duration, axis_start, campaign_id, iteration,
        observed_by_kind, lower_by_kind,
    )


def _duration_filtered(arrays: dict[SignalKind, np.ndarray], min_duration: int, axis_start: dt.date):
    """Zero out per-signal flags not belonging to a run of >= min_duration days."""
    out = {}
    for kind, flags in arrays.items():
        kept = np.zeros_like(flags)
        for run in extract_runs(flags, kind, axis_start):
            if run.length >= min_duration:
                i0 = (run.start - axis_start).days
                kept[i0 : i0 + run.length] = True
        out[kind] = kept
    return out


def detect_candidates(
    flags_by_kind: dict[SignalKind, np.ndarray],
    config: DetectorConfig = DetectorConfig(),
    *,
    axis_start: dt.date,
    campaign_id: str = "adhoc",
    iteration: int | None = None,
    observed_by_kind: dict[SignalKind, np.ndarray] | None = None,
    lower_by_kind: dict[SignalKind, np.ndarray] | None = None,
) -> list[CandidateWindow]:
    """Full clustering step under the configured rule variant."""
    arrays = _validated_flags(flags_by_kind)
    kw = dict(
        axis_start=axis_start,
        campaign_id=campaign_id,
        iteration=iteration,
        observed_by_kind=observed_by_kind,
        lower_by_kind=lower_by_kind,
    )
    if config.majority_mode == "window":
        return _window_mode_candidates(arrays, config, **kw)
    if config.ordering == "duration_then_majority":
        filtered = _duration_filtered(arrays, config.min_duration, axis_start)
        majority = majority_days(filtered, config.quorum)
        return form_candidates(majority, filtered, 1, **kw)
    majority = majority_days(arrays, config.quorum)
    return form_candidates(majority, arrays, config.min_duration, **kw)


def _window_mode_candidates(arrays, config: DetectorConfig, *, axis_start, campaign_id, iteration,
                            observed_by_kind, lower_by_kind) -> list[CandidateWindow]:
    """Window-level quorum: merge per-signal runs and keep merged windows
    overlapped by runs from at least ``quorum`` distinct signals."""
    all_runs: list[AnomalyRun] = []
    for kind, flags in arrays.items():
        all_runs.extend(r for r in extract_runs(flags, kind, axis_start) if r.length >= config.min_duration)
    if not all_runs:
        return []
    all_runs.sort(key=lambda r: (r.start, r.end))
    merged: list[list[AnomalyRun]] = [[all_runs[0]]]
    for run in all_runs[1:]:
        tail = merged[-1]
        tail_end = max(r.end for r in tail)
        if run.start <= tail_end:  # overlapping (shared day), not merely adjacent
            tail.append(run)
        else:
            merged.append([run])
    windows = []
    for group in merged:
        kinds = {r.kind for r in group}
        if len(kinds) < config.quorum:
            continue
        start = min(r.start for r in group)
        end = max(r.end for r in group)
        votes = {}
        for day in DateSpan(start, end).dates():
            i = (day - axis_start).days
            votes[day] = frozenset(k for k in ALL_KINDS if arrays[k][i])
        window = CandidateWindow(
            id=candidate_id(start, campaign_id, iteration),
            start=start,
            end=end,
            votes=votes,
        )
        window.peak_deficit = _peak_deficit(window, axis_start, observed_by_kind, lower_by_kind)
        windows.append(window)
    return windows
