"""Synthetic signal bundles with planted coverage-convergence storms.

Used by the demos and by every end-to-end test that needs a known ground
truth: each signal shares a seasonal baseline, carries independent Gaussian
noise, and selected windows are pushed downward (coverage converging, so
dispersion drops) on a chosen subset of the four signals. A simulated expert
adapter validates exactly the candidates that overlap planted windows.
"""

from __future__ import annotations

import datetime as dt
from dataclasses import dataclass, field

import numpy as np

from .campaign import Decision
from .dates import DateSpan
from .detector import CandidateWindow
from .signals import ALL_KINDS, DispersionSeries, SignalBundle, SignalKind


@dataclass(frozen=True)
class PlantedStorm:
    label: str
    start_day: int  # offset from bundle start
    duration: int
    kinds: tuple[SignalKind, ...]
    depth_sigma: float = 6.0

    def span(self, start: dt.date) -> DateSpan:
        lo = start + dt.timedelta(days=self.start_day)
        return DateSpan(lo, lo + dt.timedelta(days=self.duration - 1))


@dataclass
class SyntheticBundle:
    bundle: SignalBundle
    storms: list[PlantedStorm]
    decoys: list[PlantedStorm]
    noise_sigma: float

    def storm_spans(self) -> list[DateSpan]:
        return [p.span(self.bundle.start) for p in self.storms]

    def decoy_spans(self) -> list[DateSpan]:
        return [p.span(self.bundle.start) for p in self.decoys]


def plant_windows(
    n_days: int,
    rng: np.random.Generator,
    count: int,
    duration_range: tuple[int, int] = (3, 7),
    margin: int = 40,
    min_gap: int = 25,
    taken: list[tuple[int, int]] | None = None,
) -> list[tuple[int, int]]:
    """Random (start_day, duration) pairs that keep ``min_gap`` days apart."""
    taken = list(taken or [])
    out: list[tuple[int, int]] = []
    attempts = 0
    while len(out) < count:
        attempts += 1
        if attempts > 10_000:
            raise RuntimeError("could not place storm windows; relax spacing")
        duration = int(rng.integers(duration_range[0], duration_range[1] + 1))
        lead = min(margin, max(1, (n_days - duration - 1) // 3))
        start = int(rng.integers(lead, n_days - lead - duration))
        conflict = any(
            start - min_gap < s + d and s - min_gap < start + duration for s, d in taken + out
        )
        if not conflict:
            out.append((start, duration))
    return out


def make_bundle(
    n_days: int = 2000,
    start: dt.date = dt.date(2000, 1, 1),
    rng_seed: int = 0,
    n_storms: int = 10,
    n_decoys: int = 0,
    noise_sigma: float = 1.0,
    baseline: float = 50.0,
    weekly_amplitude: float = 2.0,
    yearly_amplitude: float = 3.0,
    trend_per_year: float = 0.5,
    depth_sigma_range: tuple[float, float] = (5.0, 8.0),
    duration_range: tuple[int, int] = (3, 7),
    storm_kind_count: int = 3,
    decoy_kind_count: int = 2,
) -> SyntheticBundle:
    """Four-signal bundle with shared seasonality, independent noise, planted dips.

    Real storms dip at least ``storm_kind_count`` signals; decoys dip at most
    ``decoy_kind_count`` and must never be reported as candidates under the
    default quorum of 3.
    """
    rng = np.random.default_rng(rng_seed)
    idx = np.arange(n_days, dtype=float)
    seasonal = (
        weekly_amplitude * np.sin(2 * np.pi * idx / 7.0)
        + yearly_amplitude * np.sin(2 * np.pi * idx / 365.25)
        + trend_per_year * idx / 365.25
    )

    storm_windows = plant_windows(n_days, rng, n_storms, duration_range)
    decoy_windows = plant_windows(n_days, rng, n_decoys, duration_range, taken=storm_windows)

    def pick_kinds(count: int) -> tuple[SignalKind, ...]:
        chosen = rng.choice(len(ALL_KINDS), size=count, replace=False)
        return tuple(ALL_KINDS[int(j)] for j in chosen)

    storms = []
    for i, (s, d) in enumerate(storm_windows):
        n_kinds = int(rng.integers(storm_kind_count, len(ALL_KINDS) + 1))
        depth = float(rng.uniform(*depth_sigma_range))
        storms.append(PlantedStorm(f"planted-{i:02d}", s, d, pick_kinds(n_kinds), depth))
    decoys = []
    for i, (s, d) in enumerate(decoy_windows):
        n_kinds = int(rng.integers(1, decoy_kind_count + 1))
        depth = float(rng.uniform(*depth_sigma_range))
        decoys.append(PlantedStorm(f"decoy-{i:02d}", s, d, pick_kinds(n_kinds), depth))

    series = {}
    for kind in ALL_KINDS:
        values = baseline + seasonal + rng.normal(0.0, noise_sigma, n_days)
        for planted in storms + decoys:
            if kind in planted.kinds:
                lo = planted.start_day
                values[lo : lo + planted.duration] -= planted.depth_sigma * noise_sigma
        values = np.maximum(values, 0.0)
        series[kind] = DispersionSeries(kind=kind, start=start, values=values)

    return SyntheticBundle(
        bundle=SignalBundle(series),
        storms=storms,
        decoys=decoys,
        noise_sigma=noise_sigma,
    )


@dataclass
class SimulatedExpert:
    """Validates exactly the candidates overlapping a planted ground truth."""

    truth: list[tuple[str, DateSpan]]
    min_overlap_days: int = 1
    name: str = "simulated"
    decisions_made: int = field(default=0)

    def __call__(self, state, windows: list[CandidateWindow]) -> list[Decision]:
        decisions = []
        for window in windows:
            hit = next(
                (
                    label
                    for label, span in self.truth
                    if window.span.overlap_days(span) >= self.min_overlap_days
                ),
                None,
            )
            if hit is not None:
                decisions.append(
                    Decision(window.id, "validated", label=hit, expert=self.name)
                )
            else:
                decisions.append(
                    Decision(window.id, "rejected", note="no matching event", expert=self.name)
                )
        self.decisions_made += len(decisions)
        return decisions


def expert_for(synthetic: SyntheticBundle, min_overlap_days: int = 1) -> SimulatedExpert:
    truth = [(p.label, p.span(synthetic.bundle.start)) for p in synthetic.storms]
    return SimulatedExpert(truth=truth, min_overlap_days=min_overlap_days)
