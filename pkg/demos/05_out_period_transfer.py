#!/usr/bin/env python3
"""Rolling transfer from a labeled period onto unlabeled target years.

Six years of signals: the first three are treated as already labeled, the
last three are scanned one calendar year at a time, each round tuned on the
trailing window of known storms (validated target years join the seed pool
as the window rolls forward).

Run:  python demos/05_out_period_transfer.py
"""

import datetime as dt
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from stormwatch import CampaignConfig, DateSpan, SearchSpace, SeedStorm, run_out_period, summarize
from stormwatch.simulate import expert_for, make_bundle

start = dt.date(2000, 1, 1)
n_days = (dt.date(2005, 12, 31) - start).days + 1
syn = make_bundle(n_days=n_days, start=start, rng_seed=59, n_storms=17, n_decoys=0)

labeled_span = DateSpan(start, dt.date(2002, 12, 31))
target_span = DateSpan(dt.date(2003, 1, 1), syn.bundle.end)
labeled = [
    SeedStorm(f"known-{i}", s.start, s.end)
    for i, s in enumerate(syn.storm_spans())
    if labeled_span.contains_span(s)
]
print(f"labeled period {labeled_span.isoformat()}: {len(labeled)} known storms")
print(f"target period  {target_span.isoformat()}: scanned year by year\n")

config = CampaignConfig(
    search_space=SearchSpace(n_trials=8, rng_seed=67),
    window_years=3,
)
campaign = run_out_period(
    (syn.bundle.slice_span(labeled_span), labeled),
    syn.bundle.slice_span(target_span),
    target_span,
    config,
    expert_for(syn),
    rolling=True,
    campaign_id="demo-transfer",
)
state = campaign.state

print(f"{'year':>6} {'candidates':>11} {'validated':>10} {'rejected':>9}")
for report in state.reports:
    year = target_span.start.year + report.iteration - 1
    print(f"{year:>6} {report.n_candidates:>11} {report.n_validated:>10} {report.n_rejected:>9}")

target_storms = [r for r in state.finalized if r.start >= target_span.start]
print(f"\nstorms found in the target years ({len(target_storms)}):")
for row in summarize(target_storms):
    print(
        f"  {row.year}: {row.n_storms} storm(s), avg duration {row.mean_duration_days:.1f} days "
        f"(std {row.std_duration_days:.1f})"
    )

planted_target = [s for s in syn.storm_spans() if s.start >= target_span.start]
hit = sum(1 for span in planted_target if any(r.span.intersects(span) for r in target_storms))
print(f"\nplanted target-year storms recovered: {hit}/{len(planted_target)}")
