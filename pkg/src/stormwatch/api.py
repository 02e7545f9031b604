"""HTTP service for the expert review workflow.

Read endpoints serve consistent snapshots; every mutation goes through the
campaign's single-writer command path (journal append, fsync, then apply)
before the response is sent. One background detection run is allowed per
campaign; concurrent triggers are rejected with a conflict.

Endpoints
---------
GET  /campaigns
GET  /campaigns/{id}/candidates?status=
POST /campaigns/{id}/iterations
GET  /runs/{id}
GET  /candidates/{id}
GET  /candidates/{id}/articles?date=
POST /candidates/{id}/decision
GET  /storms?from=&to=
GET  /signals?kind=&from=&to=

All error responses carry exactly one body: {"code", "message", "detail"}.
"""

from __future__ import annotations

import datetime as dt
import threading
import uuid
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .campaign import (
    PENDING,
    VALIDATED,
    Campaign,
    Decision,
    IterationRun,
    StormRecord,
    ingest_decisions,
    run_iteration,
)
from .dates import DateSpan
from .detector import CandidateWindow
from .errors import (
    CampaignError,
    ConflictError,
    DataFormatError,
    MalformedInputError,
    NotFoundError,
    PendingDecisionsError,
    StormwatchError,
)
from .io import append_trial_log
from .signals import ALL_KINDS, SignalBundle, SignalKind
from .store import Store
from .tuner import TrialModels

API_VERSION = "1"


class DecisionBody(BaseModel):
    verdict: str
    label: str = ""
    note: str = ""
    expert: str = ""


@dataclass
class RunStatus:
    run_id: str
    campaign_id: str
    status: str = "running"  # running | done | failed
    trials_done: int = 0
    n_trials: int = 0
    best: dict | None = None
    iteration: int | None = None
    n_queued: int | None = None
    n_known: int | None = None
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "campaign_id": self.campaign_id,
            "status": self.status,
            "trials_done": self.trials_done,
            "n_trials": self.n_trials,
            "best": self.best,
            "iteration": self.iteration,
            "n_queued": self.n_queued,
            "n_known": self.n_known,
            "error": self.error,
        }


class AppState:
    """Campaign registry plus the single writer lock shared by all mutations."""

    def __init__(self, store: Store, run_async: bool = True):
        self.store = store
        self.run_async = run_async
        self.lock = threading.RLock()
        self.campaigns: dict[str, Campaign] = {}
        self.runs: dict[str, RunStatus] = {}
        self.running: set[str] = set()
        self._bundle: SignalBundle | None = None
        self.load()

    def load(self) -> None:
        for campaign_id in self.store.list_campaigns():
            campaign, _ = self.store.restore_campaign(campaign_id)
            self.campaigns[campaign_id] = campaign

    def bundle(self) -> SignalBundle:
        if self._bundle is None:
            self._bundle = self.store.load_bundle()
        return self._bundle

    def campaign(self, campaign_id: str) -> Campaign:
        campaign = self.campaigns.get(campaign_id)
        if campaign is None:
            raise NotFoundError(f"unknown campaign {campaign_id!r}")
        return campaign

    def find_record(self, candidate_id: str) -> tuple[Campaign, StormRecord]:
        for campaign in self.campaigns.values():
            record = campaign.state.records.get(candidate_id)
            if record is not None:
                return campaign, record
        raise NotFoundError(f"unknown candidate {candidate_id!r}")

    # -- detection rounds

    def trigger_iteration(self, campaign_id: str) -> RunStatus:
        with self.lock:
            campaign = self.campaign(campaign_id)
            if campaign_id in self.running:
                raise ConflictError(f"a run is already in progress for {campaign_id!r}")
            if campaign.state.pending():
                raise ConflictError("decide all pending candidates before the next round")
            if campaign.state.iteration_open:
                campaign.close_iteration()
                self.store.persist_campaign(campaign)
            self.running.add(campaign_id)
            run = RunStatus(
                run_id=f"run-{uuid.uuid4().hex[:10]}",
                campaign_id=campaign_id,
                n_trials=campaign.state.config.search_space.n_trials,
            )
            self.runs[run.run_id] = run

        if self.run_async:
            thread = threading.Thread(target=self._run_round, args=(campaign_id, run), daemon=True)
            thread.start()
        else:
            self._run_round(campaign_id, run)
        return run

    def _run_round(self, campaign_id: str, run: RunStatus) -> None:
        campaign = self.campaigns[campaign_id]
        try:
            bundle = self.bundle()
            window = campaign.state.config.smoothing_window
            prepared = bundle.smooth(window) if window > 1 else bundle

            def progress(done, best):
                run.trials_done = done
                if best is not None:
                    run.best = {"precision": best.precision, "recall": best.recall}

            outcome = run_iteration(campaign, prepared, progress=progress, lock=self.lock)
            for trial in outcome.trials:
                append_trial_log(self.store.trials_path(campaign_id), trial)
            self._save_details(campaign, prepared, outcome)
            with self.lock:
                self.store.persist_campaign(campaign)
            run.best = {
                "precision": outcome.best_trial.precision,
                "recall": outcome.best_trial.recall,
            }
            run.iteration = outcome.iteration
            run.n_queued = len(outcome.queued)
            run.n_known = len(outcome.known)
            run.trials_done = run.n_trials
            run.status = "done"
        except Exception as exc:  # noqa: BLE001 - surface through the run handle
            run.status = "failed"
            run.error = str(exc)
        finally:
            with self.lock:
                self.running.discard(campaign_id)

    def _save_details(self, campaign: Campaign, bundle: SignalBundle, outcome: IterationRun) -> None:
        context = campaign.state.config.context_days
        for window in outcome.queued:
            payload = candidate_detail_payload(window, bundle, outcome.artifacts, context)
            self.store.save_candidate_detail(campaign.state.campaign_id, window.id, payload)


def candidate_detail_payload(
    window: CandidateWindow,
    bundle: SignalBundle,
    artifacts: TrialModels,
    context_days: int,
) -> dict:
    """Series slices (observed, fit, band, flags) for ± context days around a window."""
    span = bundle.span
    lo = max(span.start, window.start - dt.timedelta(days=context_days))
    hi = min(span.end, window.end + dt.timedelta(days=context_days))
    slice_span = DateSpan(lo, hi)
    i0, i1 = span.index_of(lo), span.index_of(hi) + 1

    def listify(values):
        return [None if np.isnan(v) else float(v) for v in values[i0:i1]]

    series = {}
    for kind in ALL_KINDS:
        flags = artifacts.flags[kind][i0:i1]
        series[kind.value] = {
            "observed": listify(bundle.series[kind].values),
            "yhat": listify(artifacts.yhat[kind]),
            "lower": listify(artifacts.lower[kind]),
            "upper": listify(artifacts.upper[kind]),
            "flagged_days": [
                d.isoformat() for d, f in zip(slice_span.dates(), flags) if bool(f)
            ],
        }
    return {
        "candidate": candidate_row(window),
        "context": {"from": lo.isoformat(), "to": hi.isoformat()},
        "dates": [d.isoformat() for d in slice_span.dates()],
        "series": series,
    }


def candidate_row(window: CandidateWindow) -> dict:
    counts = window.vote_counts()
    return {
        "id": window.id,
        "start": window.start.isoformat(),
        "end": window.end.isoformat(),
        "duration_days": window.duration_days,
        "votes": {k.value: counts[k] for k in ALL_KINDS},
        "votes_by_day": {
            d.isoformat(): sorted(k.value for k in kinds) for d, kinds in window.votes.items()
        },
        "peak_deficit": None if np.isnan(window.peak_deficit) else window.peak_deficit,
    }


def record_row(record: StormRecord) -> dict:
    return record.to_dict()


def _parse_query_date(value: str | None, name: str) -> dt.date | None:
    if value is None or value == "":
        return None
    try:
        return dt.date.fromisoformat(value)
    except ValueError:
        raise MalformedInputError(f"bad {name} date {value!r}") from None


def create_app(store: Store, run_async: bool = True, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="stormwatch", version=API_VERSION)
    state = AppState(store, run_async=run_async)
    app.state.ctx = state

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/ui", StaticFiles(directory=static_dir, html=True), name="ui")

    def error_response(status: int, code: str, message: str, detail: Any = None):
        return JSONResponse(
            status_code=status,
            content={"code": code, "message": message, "detail": detail},
        )

    @app.exception_handler(NotFoundError)
    async def not_found(_req: Request, exc: NotFoundError):
        return error_response(404, "not_found", str(exc))

    @app.exception_handler(ConflictError)
    async def conflict(_req: Request, exc: ConflictError):
        return error_response(409, "conflict", str(exc))

    @app.exception_handler(PendingDecisionsError)
    async def pending_conflict(_req: Request, exc: PendingDecisionsError):
        return error_response(409, "conflict", str(exc))

    @app.exception_handler(MalformedInputError)
    async def malformed(_req: Request, exc: MalformedInputError):
        return error_response(422, "invalid", str(exc))

    @app.exception_handler(DataFormatError)
    async def bad_data(_req: Request, exc: DataFormatError):
        return error_response(422, "bad_data", str(exc))

    @app.exception_handler(CampaignError)
    async def campaign_error(_req: Request, exc: CampaignError):
        return error_response(422, "campaign_error", str(exc))

    @app.exception_handler(StormwatchError)
    async def fallback(_req: Request, exc: StormwatchError):
        return error_response(500, "internal", str(exc))

    @app.exception_handler(RequestValidationError)
    async def validation(_req: Request, exc: RequestValidationError):
        return error_response(422, "validation_error", "request validation failed", exc.errors())

    @app.get("/campaigns")
    def list_campaigns():
        with state.lock:
            out = []
            for campaign in state.campaigns.values():
                s = campaign.state
                out.append(
                    {
                        "campaign_id": s.campaign_id,
                        "mode": s.mode,
                        "corpus_span": [s.corpus_span.start.isoformat(), s.corpus_span.end.isoformat()],
                        "target_span": [s.target_span.start.isoformat(), s.target_span.end.isoformat()],
                        "iteration": s.iteration,
                        "iteration_open": s.iteration_open,
                        "converged": s.converged,
                        "n_pending": len(s.pending()),
                        "n_finalized": len(s.finalized),
                        "reports": [r.to_dict() for r in s.reports],
                    }
                )
            return out

    @app.get("/campaigns/{campaign_id}/candidates")
    def list_candidates(campaign_id: str, status: str = PENDING):
        with state.lock:
            campaign = state.campaign(campaign_id)
            rows = [
                r.to_dict()
                for r in campaign.state.records.values()
                if r.iteration > 0 and (status in ("", "all") or r.status == status)
            ]
            rows.sort(key=lambda r: (r["start"], r["id"]))
            return {"campaign_id": campaign_id, "status": status, "candidates": rows, "total": len(rows)}

    @app.post("/campaigns/{campaign_id}/iterations", status_code=202)
    def trigger_iteration(campaign_id: str):
        run = state.trigger_iteration(campaign_id)
        return run.to_dict()

    @app.get("/runs/{run_id}")
    def run_status(run_id: str):
        run = state.runs.get(run_id)
        if run is None:
            raise NotFoundError(f"unknown run {run_id!r}")
        return run.to_dict()

    @app.get("/candidates/{candidate_id}")
    def candidate_detail(candidate_id: str):
        with state.lock:
            campaign, record = state.find_record(candidate_id)
            detail = state.store.load_candidate_detail(campaign.state.campaign_id, candidate_id)
            detail["candidate"]["status"] = record.status
            detail["candidate"]["label"] = record.label
            detail["candidate"]["note"] = record.expert_note
            return detail

    @app.get("/candidates/{candidate_id}/articles")
    def candidate_articles(candidate_id: str, date: str | None = None):
        with state.lock:
            _, record = state.find_record(candidate_id)
        wanted = _parse_query_date(date, "date")
        rows = []
        for article in state.store.load_articles():
            if wanted is not None:
                if article["date"] == wanted:
                    rows.append(article)
            elif record.start <= article["date"] <= record.end:
                rows.append(article)
        for row in rows:
            row["date"] = row["date"].isoformat()
        rows.sort(key=lambda r: (r["date"], r["doc_id"]))
        return {"candidate_id": candidate_id, "articles": rows}

    @app.post("/candidates/{candidate_id}/decision")
    def decide(candidate_id: str, body: DecisionBody):
        with state.lock:
            campaign, _ = state.find_record(candidate_id)
            record = campaign.decide(
                Decision(candidate_id, body.verdict, body.label, body.note, body.expert)
            )
            state.store.persist_campaign(campaign)
            return record.to_dict()

    @app.get("/storms")
    def list_storms(
        from_: str | None = Query(None, alias="from"),
        to: str | None = None,
        campaign: str | None = None,
    ):
        lo = _parse_query_date(from_, "from")
        hi = _parse_query_date(to, "to")
        with state.lock:
            rows = []
            for cid, camp in state.campaigns.items():
                if campaign and cid != campaign:
                    continue
                # finalized storms plus validations of the still-open iteration
                # (they fold into the finalized list when the round closes)
                live = list(camp.state.finalized)
                if camp.state.iteration_open:
                    live += [
                        r
                        for r in camp.state.records_in_iteration(camp.state.iteration)
                        if r.status == VALIDATED
                    ]
                for record in live:
                    if lo is not None and record.end < lo:
                        continue
                    if hi is not None and record.start > hi:
                        continue
                    rows.append(record.to_dict())
            rows.sort(key=lambda r: (r["start"], r["id"]))
            return {"storms": rows, "total": len(rows)}

    @app.get("/signals")
    def signals(
        kind: str | None = None,
        from_: str | None = Query(None, alias="from"),
        to: str | None = None,
    ):
        bundle = state.bundle()
        lo = _parse_query_date(from_, "from") or bundle.start
        hi = _parse_query_date(to, "to") or bundle.end
        kinds = [SignalKind.parse(kind)] if kind else list(ALL_KINDS)
        sliced = bundle.slice_span(DateSpan(lo, hi))
        return {
            "from": lo.isoformat(),
            "to": hi.isoformat(),
            "dates": [d.isoformat() for d in sliced.dates()],
            "series": {
                k.value: [
                    None if np.isnan(v) else float(v) for v in sliced.series[k].values
                ]
                for k in kinds
            },
        }

    return app
