"""Inclusive calendar-day spans and date-grid helpers.

Every series, candidate window and storm record in the package is anchored to
a contiguous daily grid; this module owns the span arithmetic so off-by-one
(inclusive end) bugs live in exactly one place.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass

ONE_DAY = dt.timedelta(days=1)


def parse_date(text: str) -> dt.date:
    return dt.date.fromisoformat(text.strip())


def daterange(start: dt.date, end: dt.date) -> list[dt.date]:
    """All days from start to end, both inclusive."""
    n = (end - start).days + 1
    if n <= 0:
        raise ValueError(f"empty date range {start}..{end}")
    return [start + dt.timedelta(days=i) for i in range(n)]


@dataclass(frozen=True, order=True)
class DateSpan:
    """An inclusive [start, end] range of calendar days."""

    start: dt.date
    end: dt.date

    def __post_init__(self):
        if self.end < self.start:
            raise ValueError(f"span end {self.end} before start {self.start}")

    @property
    def n_days(self) -> int:
        return (self.end - self.start).days + 1

    def __contains__(self, day: dt.date) -> bool:
        return self.start <= day <= self.end

    def dates(self) -> list[dt.date]:
        return daterange(self.start, self.end)

    def index_of(self, day: dt.date) -> int:
        if day not in self:
            raise ValueError(f"{day} outside span {self.start}..{self.end}")
        return (day - self.start).days

    def day_at(self, index: int) -> dt.date:
        return self.start + dt.timedelta(days=index)

    def overlap_days(self, other: "DateSpan") -> int:
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        return max(0, (hi - lo).days + 1)

    def intersects(self, other: "DateSpan") -> bool:
        return self.overlap_days(other) > 0

    def intersection(self, other: "DateSpan") -> "DateSpan | None":
        lo = max(self.start, other.start)
        hi = min(self.end, other.end)
        if hi < lo:
            return None
        return DateSpan(lo, hi)

    def hull(self, other: "DateSpan") -> "DateSpan":
        """Smallest span containing both."""
        return DateSpan(min(self.start, other.start), max(self.end, other.end))

    def contains_span(self, other: "DateSpan") -> bool:
        return other.start >= self.start and other.end <= self.end

    def isoformat(self) -> str:
        return f"{self.start.isoformat()}..{self.end.isoformat()}"

    @classmethod
    def from_dates(cls, days: list[dt.date]) -> "DateSpan":
        return cls(min(days), max(days))
