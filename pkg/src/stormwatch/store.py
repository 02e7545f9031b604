"""File-backed persistence: one data directory, CSV stores, journaled campaigns.

Layout under the data directory (``STORMWATCH_DATA_DIR`` or ``--data-dir``):

    signals.csv                    daily dispersion table (documented format)
    articles.csv                   headline/snippet index for candidate review
    holidays.csv                   optional holiday calendar
    campaigns/<id>/journal.jsonl   append-only event journal (source of truth)
    campaigns/<id>/snapshot.json   state snapshot + journal position
    campaigns/<id>/candidates/     per-candidate detail payloads (series slices)
    campaigns/<id>/trials.jsonl    per-trial search log

Every registry mutation is appended (flushed and fsynced) to the journal
before it is acknowledged; the snapshot is a recovery accelerator, never the
source of truth. A truncated or corrupt journal tail is reported and replay
halts at the last valid record.
"""

from __future__ import annotations

import datetime as dt
import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

from .campaign import Campaign, CampaignConfig, CampaignState
from .dates import DateSpan
from .errors import DataFormatError, NotFoundError
from .forecaster import HolidayCalendar
from .io import read_articles, read_signals, write_signals
from .signals import SignalBundle
from .tuner import SeedStorm

logger = logging.getLogger(__name__)

ENV_DATA_DIR = "STORMWATCH_DATA_DIR"
DEFAULT_DATA_DIR = "stormwatch-data"


def resolve_data_dir(explicit: str | None = None) -> Path:
    if explicit:
        return Path(explicit)
    env = os.environ.get(ENV_DATA_DIR)
    if env:
        return Path(env)
    return Path(DEFAULT_DATA_DIR)


def _safe_name(identifier: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in identifier)


@dataclass
class RestoreInfo:
    events_replayed: int = 0
    from_snapshot: bool = False
    corrupt_tail_offset: int | None = None


class Store:
    def __init__(self, root: Path | str):
        self.root = Path(root)

    # -- layout

    @property
    def signals_path(self) -> Path:
        return self.root / "signals.csv"

    @property
    def articles_path(self) -> Path:
        return self.root / "articles.csv"

    @property
    def holidays_path(self) -> Path:
        return self.root / "holidays.csv"

    def campaign_dir(self, campaign_id: str) -> Path:
        return self.root / "campaigns" / _safe_name(campaign_id)

    def journal_path(self, campaign_id: str) -> Path:
        return self.campaign_dir(campaign_id) / "journal.jsonl"

    def snapshot_path(self, campaign_id: str) -> Path:
        return self.campaign_dir(campaign_id) / "snapshot.json"

    def trials_path(self, campaign_id: str) -> Path:
        return self.campaign_dir(campaign_id) / "trials.jsonl"

    def ensure_layout(self) -> None:
        (self.root / "campaigns").mkdir(parents=True, exist_ok=True)

    # -- signals / articles

    def save_bundle(self, bundle: SignalBundle) -> None:
        self.ensure_layout()
        write_signals(self.signals_path, bundle)

    def load_bundle(self) -> SignalBundle:
        if not self.signals_path.exists():
            raise NotFoundError(f"no signal store at {self.signals_path}")
        return read_signals(self.signals_path)

    def has_bundle(self) -> bool:
        return self.signals_path.exists()

    def save_articles(self, source_path) -> int:
        """Validate and copy an article index into the store; returns row count."""
        rows = read_articles(source_path)
        self.ensure_layout()
        import csv

        with self.articles_path.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["doc_id", "date", "outlet", "headline", "snippet"])
            for r in rows:
                writer.writerow([r["doc_id"], r["date"].isoformat(), r["outlet"], r["headline"], r["snippet"]])
        return len(rows)

    def load_articles(self) -> list[dict]:
        if not self.articles_path.exists():
            return []
        return read_articles(self.articles_path)

    # -- journal

    def append_event(self, campaign_id: str, event: dict) -> None:
        path = self.journal_path(campaign_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("a") as fh:
            fh.write(json.dumps(event, sort_keys=True) + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    def journal_sink(self, campaign_id: str):
        return lambda event: self.append_event(campaign_id, event)

    def read_journal(self, campaign_id: str) -> tuple[list[dict], int | None]:
        """All valid events plus the byte offset of the first corrupt line, if any."""
        path = self.journal_path(campaign_id)
        if not path.exists():
            return [], None
        events: list[dict] = []
        offset = 0
        with path.open("rb") as fh:
            for raw in fh:
                text = raw.decode("utf-8", errors="replace").strip()
                if raw and not raw.endswith(b"\n"):
                    logger.warning("journal %s: truncated tail at offset %d", path, offset)
                    return events, offset
                if text:
                    try:
                        events.append(json.loads(text))
                    except json.JSONDecodeError:
                        logger.warning("journal %s: corrupt record at offset %d", path, offset)
                        return events, offset
                offset += len(raw)
        return events, None

    # -- snapshots / restore

    def persist_campaign(self, campaign: Campaign) -> None:
        """Refresh the snapshot to the current journal position (atomic replace)."""
        campaign_id = campaign.state.campaign_id
        events, _ = self.read_journal(campaign_id)
        doc = {
            "schema": "stormwatch.campaign-snapshot/1",
            "n_events": len(events),
            "state": campaign.state.to_dict(),
        }
        path = self.snapshot_path(campaign_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        tmp = path.with_suffix(".json.tmp")
        tmp.write_text(json.dumps(doc, indent=2))
        tmp.replace(path)

    def restore_campaign(self, campaign_id: str) -> tuple[Campaign, RestoreInfo]:
        """Snapshot plus journal replay; decisions after the snapshot are never lost."""
        events, corrupt_offset = self.read_journal(campaign_id)
        snapshot = self.snapshot_path(campaign_id)
        info = RestoreInfo(corrupt_tail_offset=corrupt_offset)
        if snapshot.exists():
            doc = json.loads(snapshot.read_text())
            n_snap = int(doc.get("n_events", 0))
            if n_snap <= len(events):
                campaign = Campaign(state=CampaignState.from_dict(doc["state"]))
                for event in events[n_snap:]:
                    campaign.events.append(event)
                    campaign._apply(event)
                campaign.sink = self.journal_sink(campaign_id)
                info.from_snapshot = True
                info.events_replayed = len(events) - n_snap
                return campaign, info
            logger.warning(
                "snapshot for %s is ahead of the journal (%d > %d); replaying from scratch",
                campaign_id, n_snap, len(events),
            )
        if not events:
            raise NotFoundError(f"no campaign {campaign_id!r} in {self.root}")
        campaign = Campaign.replay(events, sink=self.journal_sink(campaign_id))
        info.events_replayed = len(events)
        return campaign, info

    def open_campaign_writer(self, campaign_id: str | None) -> str:
        """Reserve a campaign id (directory) for a new campaign."""
        self.ensure_layout()
        return campaign_id or ""

    def list_campaigns(self) -> list[str]:
        base = self.root / "campaigns"
        if not base.exists():
            return []
        return sorted(p.name for p in base.iterdir() if (p / "journal.jsonl").exists())

    # -- candidate detail payloads

    def candidate_detail_path(self, campaign_id: str, candidate_id: str) -> Path:
        return self.campaign_dir(campaign_id) / "candidates" / f"{_safe_name(candidate_id)}.json"

    def save_candidate_detail(self, campaign_id: str, candidate_id: str, payload: dict) -> None:
        path = self.candidate_detail_path(campaign_id, candidate_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(json.dumps(payload))

    def load_candidate_detail(self, campaign_id: str, candidate_id: str) -> dict:
        path = self.candidate_detail_path(campaign_id, candidate_id)
        if not path.exists():
            raise NotFoundError(f"no detail for candidate {candidate_id!r}")
        return json.loads(path.read_text())


# --- campaign config files -----------------------------------------------------------


@dataclass
class CampaignFile:
    """Parsed campaign configuration document (JSON)."""

    mode: str = "in_period"
    campaign_id: str | None = None
    corpus_span: DateSpan | None = None
    target_span: DateSpan | None = None
    seeds_path: str | None = None
    holidays_path: str | None = None
    config: CampaignConfig = field(default_factory=CampaignConfig)
    rolling: bool = False


def load_campaign_file(path) -> CampaignFile:
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"bad JSON: {exc}", path=str(path)) from None

    def span_of(key):
        if key not in doc:
            return None
        lo, hi = doc[key]
        return DateSpan(dt.date.fromisoformat(lo), dt.date.fromisoformat(hi))

    config = CampaignConfig.from_dict(doc.get("config", {}))
    holidays_path = doc.get("holidays_file")
    if holidays_path:
        from .io import read_holidays

        resolved = Path(holidays_path)
        if not resolved.is_absolute():
            resolved = path.parent / resolved
        config.holidays = read_holidays(resolved)
    return CampaignFile(
        mode=doc.get("mode", "in_period"),
        campaign_id=doc.get("campaign_id"),
        corpus_span=span_of("corpus_span"),
        target_span=span_of("target_span"),
        seeds_path=doc.get("seeds_file"),
        holidays_path=holidays_path,
        config=config,
        rolling=bool(doc.get("rolling", False)),
    )


def load_seeds_for(campaign_file: CampaignFile, base_path) -> list[SeedStorm]:
    from .io import read_seed_storms

    if not campaign_file.seeds_path:
        return []
    resolved = Path(campaign_file.seeds_path)
    if not resolved.is_absolute():
        resolved = Path(base_path).parent / resolved
    return read_seed_storms(resolved)
