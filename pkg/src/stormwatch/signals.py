"""Daily dispersion signals from per-document embeddings.

A day's dispersion is the trace of the sample covariance matrix of that day's
document vectors, divided by the number of documents published that day. Days
with too few documents carry no value (NaN). Four signal kinds — topics,
entities, plot elements, and sentence embeddings — are tracked on one shared
daily grid and compared via correlation diagnostics.
"""

from __future__ import annotations

import datetime as dt
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .dates import DateSpan
from .errors import InsufficientDataError, MalformedInputError, UndefinedCorrelationError

logger = logging.getLogger(__name__)

MISSING = float("nan")

DEFAULT_MIN_ARTICLES = 2


class SignalKind(str, Enum):
    TOPICS = "topics"
    ENTITIES = "entities"
    PLOT = "plot"
    LLM = "llm"

    @classmethod
    def parse(cls, text: str) -> "SignalKind":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise MalformedInputError(
                f"unknown signal kind {text!r}; expected one of "
                + ", ".join(k.value for k in cls)
            ) from None


ALL_KINDS: tuple[SignalKind, ...] = (
    SignalKind.TOPICS,
    SignalKind.ENTITIES,
    SignalKind.PLOT,
    SignalKind.LLM,
)


def is_missing(value: float) -> bool:
    return bool(np.isnan(value))


@dataclass
class DocEmbedding:
    """One document's vector representation under one signal kind."""

    doc_id: str
    date: dt.date
    outlet: str
    kind: SignalKind
    vector: np.ndarray

    def __post_init__(self):
        self.vector = np.asarray(self.vector, dtype=float)
        if self.vector.ndim != 1 or self.vector.size < 1:
            raise MalformedInputError(
                f"document {self.doc_id}: vector must be 1-d and non-empty"
            )


@dataclass(frozen=True)
class DailyDispersion:
    date: dt.date
    kind: SignalKind
    value: float  # NaN when below the article threshold
    n_articles: int


@dataclass
class DispersionSeries:
    """One signal kind's daily dispersion values on a contiguous grid.

    ``values[i]`` belongs to ``start + i days``; NaN marks days with no value.
    """

    kind: SignalKind
    start: dt.date
    values: np.ndarray
    n_articles: np.ndarray | None = None
    smoothed: bool = False
    smoothing_window: int | None = None

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1 or self.values.size == 0:
            raise MalformedInputError("series values must be a non-empty 1-d array")
        if self.n_articles is not None:
            self.n_articles = np.asarray(self.n_articles, dtype=int)
            if self.n_articles.shape != self.values.shape:
                raise MalformedInputError("n_articles must align with values")
        if self.smoothed and (self.smoothing_window is None or self.smoothing_window < 1):
            raise MalformedInputError("smoothed series must carry smoothing_window >= 1")
        present = self.values[~np.isnan(self.values)]
        if present.size and present.min() < -1e-12:
            raise MalformedInputError("dispersion values must be non-negative")

    @property
    def n_days(self) -> int:
        return int(self.values.size)

    @property
    def end(self) -> dt.date:
        return self.start + dt.timedelta(days=self.n_days - 1)

    @property
    def span(self) -> DateSpan:
        return DateSpan(self.start, self.end)

    def dates(self) -> list[dt.date]:
        return self.span.dates()

    def present_mask(self) -> np.ndarray:
        return ~np.isnan(self.values)

    def value_on(self, day: dt.date) -> float:
        return float(self.values[self.span.index_of(day)])

    def slice_span(self, span: DateSpan) -> "DispersionSeries":
        sub = self.span.intersection(span)
        if sub is None:
            raise MalformedInputError(f"span {span.isoformat()} outside series {self.span.isoformat()}")
        i, j = self.span.index_of(sub.start), self.span.index_of(sub.end) + 1
        counts = self.n_articles[i:j] if self.n_articles is not None else None
        return DispersionSeries(
            kind=self.kind,
            start=sub.start,
            values=self.values[i:j].copy(),
            n_articles=None if counts is None else counts.copy(),
            smoothed=self.smoothed,
            smoothing_window=self.smoothing_window,
        )

    def daily(self) -> list[DailyDispersion]:
        counts = self.n_articles if self.n_articles is not None else np.zeros(self.n_days, int)
        return [
            DailyDispersion(date=d, kind=self.kind, value=float(v), n_articles=int(c))
            for d, v, c in zip(self.dates(), self.values, counts)
        ]


@dataclass
class SignalBundle:
    """All four dispersion signals on one shared date axis."""

    series: dict[SignalKind, DispersionSeries] = field(default_factory=dict)

    def __post_init__(self):
        missing = [k.value for k in ALL_KINDS if k not in self.series]
        if missing:
            raise MalformedInputError(f"bundle is missing signal kinds: {', '.join(missing)}")
        spans = {s.span for s in self.series.values()}
        if len(spans) != 1:
            raise MalformedInputError("bundle series must share one date axis")

    @property
    def span(self) -> DateSpan:
        return next(iter(self.series.values())).span

    @property
    def start(self) -> dt.date:
        return self.span.start

    @property
    def end(self) -> dt.date:
        return self.span.end

    @property
    def n_days(self) -> int:
        return self.span.n_days

    def dates(self) -> list[dt.date]:
        return self.span.dates()

    def smooth(self, window: int) -> "SignalBundle":
        return SignalBundle({k: rolling_mean(s, window) for k, s in self.series.items()})

    def slice_span(self, span: DateSpan) -> "SignalBundle":
        return SignalBundle({k: s.slice_span(span) for k, s in self.series.items()})

    def concat(self, other: "SignalBundle") -> "SignalBundle":
        """Join two bundles whose grids are adjacent (other starts the day after self ends)."""
        if other.start != self.end + dt.timedelta(days=1):
            raise MalformedInputError(
                f"bundles are not adjacent: {self.span.isoformat()} then {other.span.isoformat()}"
            )
        joined = {}
        for kind in ALL_KINDS:
            a, b = self.series[kind], other.series[kind]
            counts = None
            if a.n_articles is not None and b.n_articles is not None:
                counts = np.concatenate([a.n_articles, b.n_articles])
            joined[kind] = DispersionSeries(
                kind=kind,
                start=a.start,
                values=np.concatenate([a.values, b.values]),
                n_articles=counts,
            )
        return SignalBundle(joined)


def compute_daily_trace(vectors, min_articles: int = DEFAULT_MIN_ARTICLES) -> float:
    """Normalized dispersion of one day's document vectors.

    Returns trace(sample covariance) / n, i.e. the sum of per-dimension
    sample variances (n-1 denominator) divided by the article count, or NaN
    when fewer than ``min_articles`` vectors are given.
    """
    if min_articles < 2:
        raise ValueError("min_articles must be >= 2 (sample covariance needs n >= 2)")
    rows = [np.asarray(v, dtype=float) for v in vectors]
    n = len(rows)
    if n == 0:
        return MISSING
    dim = rows[0].size
    for i, r in enumerate(rows):
        if r.ndim != 1 or r.size != dim:
            raise MalformedInputError(
                f"vector {i} has dimension {r.size}, expected {dim}"
            )
    if dim < 1:
        raise MalformedInputError("vectors must have dimension >= 1")
    if n < min_articles:
        return MISSING
    x = np.vstack(rows)
    trace = float(np.var(x, axis=0, ddof=1).sum())
    return trace / n


def build_series(
    records: list[DocEmbedding],
    kind: SignalKind,
    span: DateSpan,
    min_articles: int = DEFAULT_MIN_ARTICLES,
) -> tuple[DispersionSeries, int]:
    """Aggregate per-document embeddings into one daily dispersion series.

    Records dated outside ``span`` are dropped; the count of dropped records
    is returned alongside the series. Days with fewer than ``min_articles``
    records are NaN.
    """
    for r in records:
        if r.kind != kind:
            raise MalformedInputError(
                f"record {r.doc_id} has kind {r.kind.value}, expected {kind.value}"
            )
    by_day: dict[dt.date, list[np.ndarray]] = defaultdict(list)
    n_excluded = 0
    for r in records:
        if r.date in span:
            by_day[r.date].append(r.vector)
        else:
            n_excluded += 1
    if n_excluded:
        logger.warning("%d %s record(s) outside %s excluded", n_excluded, kind.value, span.isoformat())
    if not by_day:
        logger.warning("no %s records in %s; series is all-missing", kind.value, span.isoformat())

    dim = None
    for vecs in by_day.values():
        for v in vecs:
            if dim is None:
                dim = v.size
            elif v.size != dim:
                raise MalformedInputError(
                    f"{kind.value} vectors disagree on dimension: {v.size} vs {dim}"
                )

    values = np.full(span.n_days, np.nan)
    counts = np.zeros(span.n_days, dtype=int)
    for day, vecs in by_day.items():
        i = span.index_of(day)
        counts[i] = len(vecs)
        values[i] = compute_daily_trace(vecs, min_articles)
    return DispersionSeries(kind=kind, start=span.start, values=values, n_articles=counts), n_excluded


def rolling_mean(series: DispersionSeries, window: int) -> DispersionSeries:
    """Trailing rolling mean over present values.

    Each day's output is the mean of the non-missing values in the window of
    ``window`` days ending at that day (truncated at the series start); a day
    is missing in the output only when every day of its window is missing.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    v = series.values
    out = np.full_like(v, np.nan)
    for i in range(v.size):
        chunk = v[max(0, i - window + 1) : i + 1]
        present = chunk[~np.isnan(chunk)]
        if present.size:
            out[i] = present.mean()
    return DispersionSeries(
        kind=series.kind,
        start=series.start,
        values=out,
        n_articles=None if series.n_articles is None else series.n_articles.copy(),
        smoothed=True,
        smoothing_window=window,
    )


def pearson(a: DispersionSeries, b: DispersionSeries) -> float:
    """Sample Pearson correlation of two series on one axis, pairwise-excluding missing days."""
    if a.span != b.span:
        raise MalformedInputError(
            f"series axes differ: {a.span.isoformat()} vs {b.span.isoformat()}"
        )
    mask = a.present_mask() & b.present_mask()
    x, y = a.values[mask], b.values[mask]
    if x.size < 3:
        raise InsufficientDataError(f"only {x.size} paired day(s); need >= 3")
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise UndefinedCorrelationError("one series has zero variance on paired days")
    return float(np.corrcoef(x, y)[0, 1])


def anomaly_agreement(flags_a, flags_b) -> float:
    """Phi coefficient (Pearson correlation of two 0/1 day vectors)."""
    a = np.asarray(flags_a, dtype=bool)
    b = np.asarray(flags_b, dtype=bool)
    if a.shape != b.shape or a.ndim != 1:
        raise MalformedInputError("flag vectors must be 1-d and equal length")
    if a.size < 3:
        raise InsufficientDataError(f"only {a.size} day(s); need >= 3")
    if a.all() or (~a).all() or b.all() or (~b).all():
        raise UndefinedCorrelationError("constant flag vector has no defined correlation")
    return float(np.corrcoef(a.astype(float), b.astype(float))[0, 1])


def signal_correlations(bundle: SignalBundle) -> dict[tuple[SignalKind, SignalKind], float]:
    """Pairwise Pearson correlations between the four signals."""
    out = {}
    for i, ka in enumerate(ALL_KINDS):
        for kb in ALL_KINDS[i + 1 :]:
            out[(ka, kb)] = pearson(bundle.series[ka], bundle.series[kb])
    return out


def anomaly_correlations(
    flags_by_kind: dict[SignalKind, np.ndarray],
) -> dict[tuple[SignalKind, SignalKind], float]:
    """Pairwise phi coefficients between per-kind anomaly flag vectors."""
    out = {}
    for i, ka in enumerate(ALL_KINDS):
        for kb in ALL_KINDS[i + 1 :]:
            out[(ka, kb)] = anomaly_agreement(flags_by_kind[ka], flags_by_kind[kb])
    return out
