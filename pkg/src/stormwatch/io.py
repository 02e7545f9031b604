"""Documented file formats: CSV schemas, trial logs, model documents.

Formats
-------
embeddings        doc_id,date,outlet,v0,v1,...   (one file per signal kind)
signals           date,topics,llm,entities,plot  (empty cell = missing day)
storm list        label,start,end[,status,iteration]
candidates        candidate_id,start,end,duration_days,votes_topics,votes_entities,votes_plot,votes_llm
holidays          date,name
articles          doc_id,date,outlet,headline,snippet
trial log         one JSON record per line, appended per trial

All dates are ISO-8601. CSV readers raise DataFormatError with the offending
row number; writers quote as needed so exports round-trip exactly.
"""

from __future__ import annotations

import csv
import datetime as dt
import io as _io
import json
from pathlib import Path

import numpy as np

from .campaign import StormRecord
from .dates import DateSpan
from .detector import CandidateWindow
from .errors import DataFormatError
from .forecaster import HolidayCalendar
from .signals import ALL_KINDS, DispersionSeries, DocEmbedding, SignalBundle, SignalKind
from .tuner import SeedStorm, TrialResult

SIGNAL_COLUMNS = ["date", "topics", "llm", "entities", "plot"]
_SIGNAL_ORDER = [SignalKind.TOPICS, SignalKind.LLM, SignalKind.ENTITIES, SignalKind.PLOT]
VOTE_ORDER = [SignalKind.TOPICS, SignalKind.ENTITIES, SignalKind.PLOT, SignalKind.LLM]


def _parse_date(text: str, row: int, path) -> dt.date:
    try:
        return dt.date.fromisoformat(text.strip())
    except ValueError:
        raise DataFormatError(f"bad date {text!r}", row=row, path=str(path)) from None


def _parse_float(text: str, row: int, path) -> float:
    try:
        return float(text)
    except ValueError:
        raise DataFormatError(f"bad number {text!r}", row=row, path=str(path)) from None


# --- embeddings ----------------------------------------------------------------


def read_embeddings(path, kind: SignalKind) -> list[DocEmbedding]:
    path = Path(path)
    records = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip() for c in header[:3]] != ["doc_id", "date", "outlet"]:
            raise DataFormatError(
                "expected header doc_id,date,outlet,v0,...", row=1, path=str(path)
            )
        dim = len(header) - 3
        if dim < 1:
            raise DataFormatError("no vector columns", row=1, path=str(path))
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 3 + dim:
                raise DataFormatError(
                    f"expected {3 + dim} fields, got {len(row)}", row=i, path=str(path)
                )
            records.append(
                DocEmbedding(
                    doc_id=row[0],
                    date=_parse_date(row[1], i, path),
                    outlet=row[2],
                    kind=kind,
                    vector=np.array([_parse_float(v, i, path) for v in row[3:]]),
                )
            )
    return records


def write_embeddings(path, records: list[DocEmbedding]) -> None:
    path = Path(path)
    if not records:
        raise DataFormatError("nothing to write", path=str(path))
    dim = records[0].vector.size
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["doc_id", "date", "outlet"] + [f"v{i}" for i in range(dim)])
        for r in records:
            writer.writerow([r.doc_id, r.date.isoformat(), r.outlet] + [repr(float(v)) for v in r.vector])


# --- signal bundle ---------------------------------------------------------------


def write_signals(path, bundle: SignalBundle) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SIGNAL_COLUMNS)
        for i, day in enumerate(bundle.dates()):
            row = [day.isoformat()]
            for kind in _SIGNAL_ORDER:
                v = bundle.series[kind].values[i]
                row.append("" if np.isnan(v) else repr(float(v)))
            writer.writerow(row)


def read_signals(path) -> SignalBundle:
    """Read the per-day signal table; gaps in the date grid become missing days."""
    path = Path(path)
    rows: list[tuple[dt.date, list[float]]] = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header] != SIGNAL_COLUMNS:
            raise DataFormatError(
                f"expected header {','.join(SIGNAL_COLUMNS)}", row=1, path=str(path)
            )
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise DataFormatError(f"expected 5 fields, got {len(row)}", row=i, path=str(path))
            day = _parse_date(row[0], i, path)
            vals = [
                float("nan") if cell.strip() == "" else _parse_float(cell, i, path)
                for cell in row[1:]
            ]
            rows.append((day, vals))
    if not rows:
        raise DataFormatError("no data rows", path=str(path))
    days = [r[0] for r in rows]
    if len(set(days)) != len(days):
        raise DataFormatError("duplicate dates", path=str(path))
    span = DateSpan(min(days), max(days))
    grids = {kind: np.full(span.n_days, np.nan) for kind in _SIGNAL_ORDER}
    for day, vals in rows:
        idx = span.index_of(day)
        for kind, v in zip(_SIGNAL_ORDER, vals):
            grids[kind][idx] = v
    return SignalBundle(
        {
            kind: DispersionSeries(kind=kind, start=span.start, values=grids[kind])
            for kind in _SIGNAL_ORDER
        }
    )


# --- storm lists -----------------------------------------------------------------


def write_storms(path_or_buf, records: list[StormRecord], include_status: bool = True) -> None:
    close = False
    if isinstance(path_or_buf, (str, Path)):
        fh = Path(path_or_buf).open("w", newline="")
        close = True
    else:
        fh = path_or_buf
    try:
        writer = csv.writer(fh)
        if include_status:
            writer.writerow(["label", "start", "end", "status", "iteration"])
            for r in records:
                writer.writerow([r.label, r.start.isoformat(), r.end.isoformat(), r.status, r.iteration])
        else:
            writer.writerow(["label", "start", "end"])
            for r in records:
                writer.writerow([r.label, r.start.isoformat(), r.end.isoformat()])
    finally:
        if close:
            fh.close()


def read_storm_rows(path) -> list[dict]:
    path = Path(path)
    out = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataFormatError("empty file", path=str(path))
        cols = [c.strip().lower() for c in header]
        if cols[:3] != ["label", "start", "end"]:
            raise DataFormatError("expected header label,start,end[,status,iteration]", row=1, path=str(path))
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) < 3:
                raise DataFormatError("expected at least 3 fields", row=i, path=str(path))
            doc = {
                "label": row[0],
                "start": _parse_date(row[1], i, path),
                "end": _parse_date(row[2], i, path),
            }
            if "status" in cols and len(row) > cols.index("status"):
                doc["status"] = row[cols.index("status")].strip() or "validated"
            if "iteration" in cols and len(row) > cols.index("iteration"):
                raw = row[cols.index("iteration")].strip()
                try:
                    doc["iteration"] = int(raw) if raw else 0
                except ValueError:
                    raise DataFormatError(f"bad iteration {raw!r}", row=i, path=str(path)) from None
            if doc["end"] < doc["start"]:
                raise DataFormatError("end before start", row=i, path=str(path))
            out.append(doc)
    return out


def read_seed_storms(path) -> list[SeedStorm]:
    return [
        SeedStorm(doc["label"], doc["start"], doc["end"]) for doc in read_storm_rows(path)
    ]


def read_storm_records(path, campaign_id: str = "import") -> list[StormRecord]:
    records = []
    for i, doc in enumerate(read_storm_rows(path)):
        records.append(
            StormRecord(
                id=f"{campaign_id}:{i}",
                label=doc["label"],
                start=doc["start"],
                end=doc["end"],
                status=doc.get("status", "validated"),
                iteration=doc.get("iteration", 0),
                campaign_id=campaign_id,
            )
        )
    return records


def storms_to_csv_text(records: list[StormRecord], include_status: bool = True) -> str:
    buf = _io.StringIO()
    write_storms(buf, records, include_status)
    return buf.getvalue()


# --- candidates --------------------------------------------------------------------


def write_candidates(path, windows: list[CandidateWindow]) -> None:
    path = Path(path)
    with path.open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["candidate_id", "start", "end", "duration_days"]
            + [f"votes_{k.value}" for k in VOTE_ORDER]
        )
        for w in windows:
            counts = w.vote_counts()
            writer.writerow(
                [w.id, w.start.isoformat(), w.end.isoformat(), w.duration_days]
                + [counts[k] for k in VOTE_ORDER]
            )


# --- holidays / articles --------------------------------------------------------------


def read_holidays(path) -> HolidayCalendar:
    path = Path(path)
    entries = []
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["date", "name"]:
            raise DataFormatError("expected header date,name", row=1, path=str(path))
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            entries.append((_parse_date(row[0], i, path), row[1]))
    return HolidayCalendar(entries)


def read_articles(path) -> list[dict]:
    path = Path(path)
    out = []
    seen = set()
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        expected = ["doc_id", "date", "outlet", "headline", "snippet"]
        if header is None or [c.strip().lower() for c in header] != expected:
            raise DataFormatError(f"expected header {','.join(expected)}", row=1, path=str(path))
        for i, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 5:
                raise DataFormatError(f"expected 5 fields, got {len(row)}", row=i, path=str(path))
            if row[0] in seen:
                raise DataFormatError(f"duplicate doc_id {row[0]!r}", row=i, path=str(path))
            seen.add(row[0])
            out.append(
                {
                    "doc_id": row[0],
                    "date": _parse_date(row[1], i, path),
                    "outlet": row[2],
                    "headline": row[3],
                    "snippet": row[4],
                }
            )
    return out


# --- trial log --------------------------------------------------------------------------


def append_trial_log(path, trial: TrialResult) -> None:
    path = Path(path)
    with path.open("a") as fh:
        fh.write(json.dumps(trial.log_record(), sort_keys=True) + "\n")


def read_trial_log(path) -> list[dict]:
    path = Path(path)
    out = []
    with path.open() as fh:
        for line in fh:
            line = line.strip()
            if line:
                out.append(json.loads(line))
    return out
