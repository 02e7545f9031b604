"""Iterative storm campaigns: detection rounds, expert decisions, convergence.

A campaign's registry is event-sourced: every mutation (opening, queuing
candidates, decisions, closing an iteration) is an event dict, and replaying
the event stream from an empty state reproduces the registry exactly. The
``Campaign`` wrapper funnels all writes through one command path and hands
each event to an optional sink (the on-disk journal) before applying it.

Two experimental drivers sit on top: ``run_in_period`` loops detection and
validation over one labeled span until new discoveries fall below the
convergence threshold, and ``run_out_period`` transfers tuning from a labeled
span onto a disjoint target span, optionally rolling year by year.
"""

from __future__ import annotations

import datetime as dt
import logging
import math
import uuid
from contextlib import nullcontext
from dataclasses import dataclass, field, replace

import numpy as np
import scipy.stats

from .dates import DateSpan, ONE_DAY
from .detector import CandidateWindow, DetectorConfig
from .errors import (
    CampaignError,
    ConflictError,
    InsufficientDataError,
    MalformedInputError,
    NotFoundError,
    PendingDecisionsError,
    UndefinedStatisticError,
)
from .forecaster import HolidayCalendar
from .signals import SignalBundle
from .tuner import SearchSpace, SeedStorm, TrialModels, TrialResult, random_search

logger = logging.getLogger(__name__)

PENDING = "pending"
VALIDATED = "validated"
REJECTED = "rejected"

IN_PERIOD = "in_period"
OUT_PERIOD = "out_period"


def _utc_now_iso() -> str:
    return dt.datetime.now(dt.timezone.utc).isoformat()


@dataclass
class StormRecord:
    id: str
    label: str
    start: dt.date
    end: dt.date
    status: str = PENDING
    iteration: int = 0
    campaign_id: str = ""
    expert_note: str | None = None
    decided_at: str | None = None

    @property
    def span(self) -> DateSpan:
        return DateSpan(self.start, self.end)

    @property
    def duration_days(self) -> int:
        return self.span.n_days

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "label": self.label,
            "start": self.start.isoformat(),
            "end": self.end.isoformat(),
            "status": self.status,
            "iteration": self.iteration,
            "campaign_id": self.campaign_id,
            "expert_note": self.expert_note,
            "decided_at": self.decided_at,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "StormRecord":
        return cls(
            id=doc["id"],
            label=doc["label"],
            start=dt.date.fromisoformat(doc["start"]),
            end=dt.date.fromisoformat(doc["end"]),
            status=doc.get("status", PENDING),
            iteration=int(doc.get("iteration", 0)),
            campaign_id=doc.get("campaign_id", ""),
            expert_note=doc.get("expert_note"),
            decided_at=doc.get("decided_at"),
        )


@dataclass(frozen=True)
class Decision:
    candidate_id: str
    verdict: str  # validated | rejected
    label: str = ""
    note: str = ""
    expert: str = ""


@dataclass(frozen=True)
class IterationReport:
    iteration: int
    n_candidates: int
    n_validated: int
    n_rejected: int
    n_pending: int
    n_new: int

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "n_candidates": self.n_candidates,
            "n_validated": self.n_validated,
            "n_rejected": self.n_rejected,
            "n_pending": self.n_pending,
            "n_new": self.n_new,
        }


@dataclass(frozen=True)
class YearlySummary:
    year: int
    n_storms: int
    mean_duration_days: float
    std_duration_days: float


@dataclass
class CampaignConfig:
    search_space: SearchSpace = field(default_factory=SearchSpace)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    direction: str = "low"
    min_overlap_days: int = 1
    convergence_threshold: float = 0.01
    max_iterations: int = 10
    window_years: int = 9
    context_days: int = 14
    smoothing_window: int = 7
    holidays: HolidayCalendar = field(default_factory=HolidayCalendar.empty)

    def to_dict(self) -> dict:
        return {
            "search_space": {
                "interval_width_range": list(self.search_space.interval_width_range),
                "changepoint_prior_scale_range": list(self.search_space.changepoint_prior_scale_range),
                "changepoint_range_range": list(self.search_space.changepoint_range_range),
                "n_trials": self.search_space.n_trials,
                "rng_seed": self.search_space.rng_seed,
            },
            "detector": {
                "quorum": self.detector.quorum,
                "min_duration": self.detector.min_duration,
                "majority_mode": self.detector.majority_mode,
                "ordering": self.detector.ordering,
            },
            "direction": self.direction,
            "min_overlap_days": self.min_overlap_days,
            "convergence_threshold": self.convergence_threshold,
            "max_iterations": self.max_iterations,
            "window_years": self.window_years,
            "context_days": self.context_days,
            "smoothing_window": self.smoothing_window,
            "holidays": [[day.isoformat(), name] for day, name in self.holidays.entries],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignConfig":
        doc = dict(doc)
        space = doc.get("search_space", {})
        detector = doc.get("detector", {})
        return cls(
            search_space=SearchSpace(
                interval_width_range=tuple(space.get("interval_width_range", (0.80, 0.999))),
                changepoint_prior_scale_range=tuple(
                    space.get("changepoint_prior_scale_range", (0.001, 0.5))
                ),
                changepoint_range_range=tuple(space.get("changepoint_range_range", (0.5, 0.98))),
                n_trials=int(space.get("n_trials", 50)),
                rng_seed=int(space.get("rng_seed", 0)),
            ),
            detector=DetectorConfig(
                quorum=int(detector.get("quorum", 3)),
                min_duration=int(detector.get("min_duration", 2)),
                majority_mode=detector.get("majority_mode", "day"),
                ordering=detector.get("ordering", "majority_then_duration"),
            ),
            direction=doc.get("direction", "low"),
            min_overlap_days=int(doc.get("min_overlap_days", 1)),
            convergence_threshold=float(doc.get("convergence_threshold", 0.01)),
            max_iterations=int(doc.get("max_iterations", 10)),
            window_years=int(doc.get("window_years", 9)),
            context_days=int(doc.get("context_days", 14)),
            smoothing_window=int(doc.get("smoothing_window", 7)),
            holidays=HolidayCalendar(
                [(dt.date.fromisoformat(day), name) for day, name in doc.get("holidays", [])]
            ),
        )


@dataclass
class CampaignState:
    campaign_id: str
    mode: str
    corpus_span: DateSpan
    target_span: DateSpan
    seed_storms: list[SeedStorm]
    config: CampaignConfig
    records: dict[str, StormRecord] = field(default_factory=dict)
    finalized: list[StormRecord] = field(default_factory=list)
    reports: list[IterationReport] = field(default_factory=list)
    iteration: int = 0
    iteration_open: bool = False
    converged: bool = False

    def to_dict(self) -> dict:
        return {
            "campaign_id": self.campaign_id,
            "mode": self.mode,
            "corpus_span": [self.corpus_span.start.isoformat(), self.corpus_span.end.isoformat()],
            "target_span": [self.target_span.start.isoformat(), self.target_span.end.isoformat()],
            "seeds": [[s.label, s.start.isoformat(), s.end.isoformat()] for s in self.seed_storms],
            "config": self.config.to_dict(),
            "records": [r.to_dict() for r in self.records.values()],
            "finalized": [r.to_dict() for r in self.finalized],
            "reports": [r.to_dict() for r in self.reports],
            "iteration": self.iteration,
            "iteration_open": self.iteration_open,
            "converged": self.converged,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignState":
        state = cls(
            campaign_id=doc["campaign_id"],
            mode=doc["mode"],
            corpus_span=DateSpan(
                dt.date.fromisoformat(doc["corpus_span"][0]),
                dt.date.fromisoformat(doc["corpus_span"][1]),
            ),
            target_span=DateSpan(
                dt.date.fromisoformat(doc["target_span"][0]),
                dt.date.fromisoformat(doc["target_span"][1]),
            ),
            seed_storms=[
                SeedStorm(label, dt.date.fromisoformat(s), dt.date.fromisoformat(e))
                for label, s, e in doc["seeds"]
            ],
            config=CampaignConfig.from_dict(doc["config"]),
            iteration=int(doc.get("iteration", 0)),
            iteration_open=bool(doc.get("iteration_open", False)),
            converged=bool(doc.get("converged", False)),
        )
        for rec in doc.get("records", []):
            record = StormRecord.from_dict(rec)
            state.records[record.id] = record
        state.finalized = [StormRecord.from_dict(r) for r in doc.get("finalized", [])]
        state.reports = [
            IterationReport(
                iteration=r["iteration"],
                n_candidates=r["n_candidates"],
                n_validated=r["n_validated"],
                n_rejected=r["n_rejected"],
                n_pending=r["n_pending"],
                n_new=r["n_new"],
            )
            for r in doc.get("reports", [])
        ]
        return state

    def pending(self) -> list[StormRecord]:
        return [r for r in self.records.values() if r.status == PENDING]

    def decided(self) -> list[StormRecord]:
        return [r for r in self.records.values() if r.status != PENDING]

    def records_in_iteration(self, iteration: int) -> list[StormRecord]:
        return [r for r in self.records.values() if r.iteration == iteration and r.iteration > 0]

    def report_for(self, iteration: int) -> IterationReport:
        rows = self.records_in_iteration(iteration)
        validated = [r for r in rows if r.status == VALIDATED]
        n_new = sum(
            1 for r in validated if not any(r.span.intersects(f.span) for f in self.finalized)
        )
        return IterationReport(
            iteration=iteration,
            n_candidates=len(rows),
            n_validated=len(validated),
            n_rejected=sum(1 for r in rows if r.status == REJECTED),
            n_pending=sum(1 for r in rows if r.status == PENDING),
            n_new=n_new,
        )


def check_convergence(n_new: int, n_finalized: int, threshold: float = 0.01) -> bool:
    """New discoveries amount to no more than ``threshold`` of the finalized list."""
    if n_finalized < 1:
        raise CampaignError("convergence undefined with an empty finalized list")
    return n_new / n_finalized <= threshold


def consolidate(storms: list[StormRecord]) -> list[StormRecord]:
    """Merge overlapping validated records into single storms.

    Chains of records sharing at least one day collapse into one record
    spanning their union; the earliest record keeps its id and label, notes
    are concatenated. Output is sorted by start date and pairwise disjoint.
    """
    for r in storms:
        if r.status != VALIDATED:
            raise CampaignError(f"cannot consolidate non-validated record {r.id}")
    if not storms:
        return []
    ordered = sorted(storms, key=lambda r: (r.start, r.decided_at or "", r.id))
    merged: list[StormRecord] = [replace(ordered[0])]
    for rec in ordered[1:]:
        head = merged[-1]
        if rec.start <= head.end:  # >= 1 shared day
            notes = [n for n in (head.expert_note, rec.expert_note) if n]
            merged[-1] = replace(
                head,
                end=max(head.end, rec.end),
                expert_note="; ".join(notes) if notes else None,
            )
        else:
            merged.append(replace(rec))
    return merged


# --- event-sourced registry ----------------------------------------------------


class Campaign:
    """Single-writer command stream over a CampaignState.

    Every mutation is an event dict handed to ``sink`` (journal) before being
    applied; ``Campaign.replay`` rebuilds an identical state from the events.
    """

    def __init__(self, state: CampaignState | None = None, sink=None, clock=None):
        self.state = state
        self.sink = sink
        self.clock = clock or _utc_now_iso
        self.events: list[dict] = []

    # -- command side

    def _emit(self, event: dict) -> dict:
        if self.sink is not None:
            self.sink(event)
        self.events.append(event)
        self._apply(event)
        return event

    @classmethod
    def open(
        cls,
        campaign_id: str | None,
        mode: str,
        corpus_span: DateSpan,
        target_span: DateSpan,
        seeds: list[SeedStorm],
        config: CampaignConfig,
        sink=None,
        clock=None,
    ) -> "Campaign":
        if not seeds:
            raise CampaignError("a campaign needs at least one seed storm")
        if mode not in (IN_PERIOD, OUT_PERIOD):
            raise CampaignError(f"unknown campaign mode {mode!r}")
        for storm in seeds:
            if mode == IN_PERIOD and not target_span.contains_span(storm.span):
                raise CampaignError(
                    f"in-period seed {storm.label!r} lies outside the target span"
                )
            if mode == OUT_PERIOD and target_span.intersects(storm.span):
                raise CampaignError(
                    f"out-period seed {storm.label!r} overlaps the target span"
                )
        campaign = cls(sink=sink, clock=clock)
        campaign._emit(
            {
                "type": "open",
                "ts": campaign.clock(),
                "campaign_id": campaign_id or f"camp-{uuid.uuid4().hex[:8]}",
                "mode": mode,
                "corpus_span": [corpus_span.start.isoformat(), corpus_span.end.isoformat()],
                "target_span": [target_span.start.isoformat(), target_span.end.isoformat()],
                "seeds": [[s.label, s.start.isoformat(), s.end.isoformat()] for s in seeds],
                "config": config.to_dict(),
            }
        )
        return campaign

    def queue_candidates(self, windows: list[CandidateWindow], iteration: int) -> None:
        if self.state.iteration_open:
            raise PendingDecisionsError("previous iteration is still open")
        if iteration != self.state.iteration + 1:
            raise CampaignError(
                f"expected iteration {self.state.iteration + 1}, got {iteration}"
            )
        self._emit(
            {
                "type": "queue",
                "ts": self.clock(),
                "iteration": iteration,
                "candidates": [
                    {"id": w.id, "start": w.start.isoformat(), "end": w.end.isoformat()}
                    for w in windows
                ],
            }
        )

    def decide(self, decision: Decision) -> StormRecord:
        record = self.state.records.get(decision.candidate_id)
        if record is None:
            raise NotFoundError(f"unknown candidate {decision.candidate_id!r}")
        if record.status != PENDING:
            raise ConflictError(
                f"candidate {decision.candidate_id!r} already {record.status}"
            )
        if decision.verdict not in (VALIDATED, REJECTED):
            raise MalformedInputError(f"unknown verdict {decision.verdict!r}")
        if decision.verdict == VALIDATED and not decision.label.strip():
            raise MalformedInputError("a validated storm needs a non-empty label")
        self._emit(
            {
                "type": "decision",
                "ts": self.clock(),
                "candidate_id": decision.candidate_id,
                "verdict": decision.verdict,
                "label": decision.label,
                "note": decision.note,
                "expert": decision.expert,
            }
        )
        return self.state.records[decision.candidate_id]

    def close_iteration(self) -> IterationReport:
        if not self.state.iteration_open:
            raise CampaignError("no open iteration to close")
        still_pending = [
            r for r in self.state.records_in_iteration(self.state.iteration) if r.status == PENDING
        ]
        if still_pending:
            raise PendingDecisionsError(
                f"{len(still_pending)} candidate(s) still pending in iteration {self.state.iteration}"
            )
        self._emit({"type": "close", "ts": self.clock(), "iteration": self.state.iteration})
        return self.state.reports[-1]

    # -- event application (shared by live commands and replay)

    def _apply(self, event: dict) -> None:
        kind = event["type"]
        if kind == "open":
            config = CampaignConfig.from_dict(event["config"])
            seeds = [
                SeedStorm(label, dt.date.fromisoformat(s), dt.date.fromisoformat(e))
                for label, s, e in event["seeds"]
            ]
            state = CampaignState(
                campaign_id=event["campaign_id"],
                mode=event["mode"],
                corpus_span=DateSpan(
                    dt.date.fromisoformat(event["corpus_span"][0]),
                    dt.date.fromisoformat(event["corpus_span"][1]),
                ),
                target_span=DateSpan(
                    dt.date.fromisoformat(event["target_span"][0]),
                    dt.date.fromisoformat(event["target_span"][1]),
                ),
                seed_storms=seeds,
                config=config,
            )
            for i, storm in enumerate(seeds):
                rec = StormRecord(
                    id=f"{state.campaign_id}:seed:{i}",
                    label=storm.label or f"seed-{i}",
                    start=storm.start,
                    end=storm.end,
                    status=VALIDATED,
                    iteration=0,
                    campaign_id=state.campaign_id,
                    decided_at=event["ts"],
                )
                state.records[rec.id] = rec
            state.finalized = consolidate(
                [r for r in state.records.values() if r.iteration == 0]
            )
            self.state = state
        elif kind == "queue":
            state = self.state
            state.iteration = event["iteration"]
            state.iteration_open = True
            for doc in event["candidates"]:
                rec = StormRecord(
                    id=doc["id"],
                    label="",
                    start=dt.date.fromisoformat(doc["start"]),
                    end=dt.date.fromisoformat(doc["end"]),
                    status=PENDING,
                    iteration=event["iteration"],
                    campaign_id=state.campaign_id,
                )
                if rec.id in state.records:
                    raise ConflictError(f"duplicate candidate id {rec.id!r}")
                state.records[rec.id] = rec
        elif kind == "decision":
            record = self.state.records[event["candidate_id"]]
            record.status = event["verdict"]
            record.label = event["label"] if event["verdict"] == VALIDATED else record.label
            record.expert_note = event["note"] or record.expert_note
            record.decided_at = event["ts"]
        elif kind == "close":
            state = self.state
            report = state.report_for(event["iteration"])
            newly_validated = [
                r
                for r in state.records_in_iteration(event["iteration"])
                if r.status == VALIDATED
            ]
            state.finalized = consolidate(state.finalized + newly_validated)
            state.converged = check_convergence(
                report.n_new, len(state.finalized), state.config.convergence_threshold
            )
            state.reports.append(report)
            state.iteration_open = False
        else:
            raise MalformedInputError(f"unknown event type {kind!r}")

    @classmethod
    def replay(cls, events: list[dict], sink=None, clock=None) -> "Campaign":
        campaign = cls(sink=None, clock=clock)
        for event in events:
            campaign.events.append(event)
            campaign._apply(event)
        campaign.sink = sink
        return campaign


# --- detection round ------------------------------------------------------------


@dataclass
class IterationRun:
    iteration: int
    queued: list[CandidateWindow]
    known: list[CandidateWindow]
    best_trial: TrialResult
    trials: list[TrialResult]
    artifacts: TrialModels


def _current_seeds(state: CampaignState) -> list[SeedStorm]:
    return [SeedStorm(r.label or r.id, r.start, r.end) for r in state.finalized]


def run_iteration(
    campaign: Campaign,
    bundle: SignalBundle,
    *,
    seeds: list[SeedStorm] | None = None,
    search_bundle: SignalBundle | None = None,
    progress=None,
    lock=None,
) -> IterationRun:
    """One detection round: tune on the current seeds, queue new candidates.

    Candidate windows are clipped to the target span, and windows overlapping
    an already-decided record are reported as known instead of re-queued.
    The long-running search executes outside ``lock``; only the registry reads
    and the queue append hold it.
    """
    lock = lock if lock is not None else nullcontext()
    state = campaign.state
    with lock:
        if state.pending():
            raise PendingDecisionsError("decide the open queue before starting a new round")
        seeds = seeds if seeds is not None else _current_seeds(state)
        iteration = state.iteration + 1
    if not seeds:
        raise CampaignError("no seed storms available for this round")
    search_bundle = search_bundle or bundle
    if not search_bundle.span.contains_span(state.target_span):
        raise CampaignError("signal bundle does not cover the target span")
    config = state.config
    best, trials, artifacts = random_search(
        search_bundle,
        seeds,
        config.search_space,
        config.holidays,
        detector=config.detector,
        direction=config.direction,
        min_overlap_days=config.min_overlap_days,
        campaign_id=state.campaign_id,
        iteration=iteration,
        progress=progress,
    )
    with lock:
        decided = state.decided()
        queued: list[CandidateWindow] = []
        known: list[CandidateWindow] = []
        for window in best.candidates:
            clipped = window.clipped(state.target_span)
            if clipped is None:
                continue
            if any(clipped.span.intersects(r.span) for r in decided):
                known.append(clipped)
            else:
                queued.append(clipped)
        campaign.queue_candidates(queued, iteration)
    return IterationRun(
        iteration=iteration,
        queued=queued,
        known=known,
        best_trial=best,
        trials=trials,
        artifacts=artifacts[best.trial_index],
    )


def ingest_decisions(
    campaign: Campaign, decisions: list[Decision]
) -> tuple[IterationReport, list[tuple[str, str]]]:
    """Apply a batch of expert decisions; collect per-item errors without aborting."""
    errors: list[tuple[str, str]] = []
    for decision in decisions:
        try:
            campaign.decide(decision)
        except (NotFoundError, ConflictError, MalformedInputError) as exc:
            errors.append((decision.candidate_id, str(exc)))
    return campaign.state.report_for(campaign.state.iteration), errors


def run_in_period(
    bundle: SignalBundle,
    seeds: list[SeedStorm],
    config: CampaignConfig,
    expert,
    *,
    campaign_id: str | None = None,
    sink=None,
    clock=None,
    progress=None,
) -> Campaign:
    """Iterate detection + validation over one span until convergence.

    ``expert`` is called as ``expert(state, queued_windows)`` and must return a
    Decision for every queued candidate.
    """
    campaign = Campaign.open(
        campaign_id, IN_PERIOD, bundle.span, bundle.span, seeds, config, sink=sink, clock=clock
    )
    for _ in range(config.max_iterations):
        run = run_iteration(campaign, bundle, progress=progress)
        decisions = expert(campaign.state, run.queued)
        _, errors = ingest_decisions(campaign, decisions)
        if errors:
            raise CampaignError(f"expert decisions failed: {errors}")
        campaign.close_iteration()
        if campaign.state.converged:
            break
    else:
        logger.warning(
            "campaign %s hit max_iterations=%d without converging",
            campaign.state.campaign_id,
            config.max_iterations,
        )
    return campaign


def _calendar_years(span: DateSpan) -> list[DateSpan]:
    years = []
    for year in range(span.start.year, span.end.year + 1):
        chunk = DateSpan(dt.date(year, 1, 1), dt.date(year, 12, 31)).intersection(span)
        if chunk is not None:
            years.append(chunk)
    return years


def out_period_round(
    campaign: Campaign,
    full_bundle: SignalBundle,
    round_span: DateSpan,
    *,
    progress=None,
    lock=None,
) -> IterationRun:
    """One transfer round: tune on the trailing window, emit only inside ``round_span``."""
    state = campaign.state
    config = state.config
    window_start = dt.date(round_span.start.year - config.window_years, 1, 1)
    window_start = max(window_start, full_bundle.span.start)
    seed_window = DateSpan(window_start, round_span.start - ONE_DAY)
    seeds = [
        s
        for s in _current_seeds(state)
        if seed_window.contains_span(DateSpan(s.start, s.end))
    ]
    if not seeds:
        raise CampaignError(
            f"no labeled storms inside the rolling window {seed_window.isoformat()}"
        )
    slice_bundle = full_bundle.slice_span(DateSpan(window_start, round_span.end))
    original_target = state.target_span
    state.target_span = round_span
    try:
        run = run_iteration(
            campaign, full_bundle, seeds=seeds, search_bundle=slice_bundle,
            progress=progress, lock=lock,
        )
    finally:
        state.target_span = original_target
    return run


def next_out_period_round_span(state: CampaignState) -> DateSpan | None:
    """The next unprocessed rolling round (one calendar year), or None when done."""
    years = _calendar_years(state.target_span)
    if state.iteration >= len(years):
        return None
    return years[state.iteration]


def run_out_period(
    labeled: tuple[SignalBundle, list[SeedStorm]],
    target_bundle: SignalBundle,
    target_span: DateSpan,
    config: CampaignConfig,
    expert=None,
    *,
    rolling: bool = False,
    campaign_id: str | None = None,
    sink=None,
    clock=None,
    progress=None,
) -> Campaign:
    """Tune on a labeled span, queue candidates only inside a disjoint target span.

    With ``rolling`` the target is processed one calendar year at a time, each
    round seeded by the storms of the trailing ``config.window_years`` years
    (validated target years included); this requires ``expert`` so each year's
    queue is decided before the next advances. Without ``expert`` only the
    first round is queued and the campaign is returned awaiting decisions.
    """
    labeled_bundle, labeled_storms = labeled
    if not labeled_storms:
        raise CampaignError("out-period transfer needs labeled storms")
    for storm in labeled_storms:
        if storm.span.intersects(target_span):
            raise CampaignError(
                f"labeled storm {storm.label!r} overlaps the target span"
            )
    if labeled_bundle.span.intersects(target_span):
        raise CampaignError("labeled span overlaps the target span")
    full = labeled_bundle.concat(target_bundle)
    if not full.span.contains_span(target_span):
        raise CampaignError("target span not covered by the concatenated signals")

    campaign = Campaign.open(
        campaign_id, OUT_PERIOD, full.span, target_span, labeled_storms, config,
        sink=sink, clock=clock,
    )
    rounds = _calendar_years(target_span) if rolling else [target_span]
    for round_span in rounds:
        run = out_period_round(campaign, full, round_span, progress=progress)
        if expert is None:
            break
        decisions = expert(campaign.state, run.queued)
        _, errors = ingest_decisions(campaign, decisions)
        if errors:
            raise CampaignError(f"expert decisions failed: {errors}")
        campaign.close_iteration()
    return campaign


# --- descriptive statistics -------------------------------------------------------


def summarize(storms: list[StormRecord]) -> list[YearlySummary]:
    """Per-calendar-year storm counts and inclusive-duration statistics."""
    for r in storms:
        if r.status != VALIDATED:
            raise CampaignError(f"cannot summarize non-validated record {r.id}")
    by_year: dict[int, list[int]] = {}
    for r in storms:
        by_year.setdefault(r.start.year, []).append(r.duration_days)
    out = []
    for year in sorted(by_year):
        durations = np.asarray(by_year[year], dtype=float)
        std = float(np.std(durations, ddof=1)) if durations.size >= 2 else 0.0
        out.append(
            YearlySummary(
                year=year,
                n_storms=int(durations.size),
                mean_duration_days=float(durations.mean()),
                std_duration_days=std,
            )
        )
    return out


def compare_periods(a, b) -> tuple[float, float, float]:
    """Welch two-sample t-test: statistic, Welch-Satterthwaite df, two-sided p."""
    x = np.asarray(list(a), dtype=float)
    y = np.asarray(list(b), dtype=float)
    if x.size < 2 or y.size < 2:
        raise InsufficientDataError("both samples need at least 2 observations")
    vx = float(np.var(x, ddof=1))
    vy = float(np.var(y, ddof=1))
    se2 = vx / x.size + vy / y.size
    if se2 == 0.0:
        if float(x.mean()) == float(y.mean()):
            return 0.0, float(x.size + y.size - 2), 1.0
        raise UndefinedStatisticError("zero variance in both samples with unequal means")
    t = (float(x.mean()) - float(y.mean())) / math.sqrt(se2)
    df = se2**2 / ((vx / x.size) ** 2 / (x.size - 1) + (vy / y.size) ** 2 / (y.size - 1))
    p = 2.0 * float(scipy.stats.t.sf(abs(t), df))
    return t, df, p
