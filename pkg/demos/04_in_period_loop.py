#!/usr/bin/env python3
"""The iterate-until-convergence labeled-period campaign.

Plants ten storms, seeds the loop with four, and lets a simulated expert
(validating exactly the candidates that overlap planted windows) drive the
iteration: detect -> review -> consolidate -> re-seed, until new discoveries
fall to 1% of the finalized list. Prints a per-iteration report table.

Run:  python demos/04_in_period_loop.py
"""

import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from stormwatch import CampaignConfig, SearchSpace, SeedStorm, run_in_period
from stormwatch.simulate import expert_for, make_bundle

syn = make_bundle(n_days=1500, rng_seed=23, n_storms=10, n_decoys=2)
seeds = [SeedStorm(f"seed-{i}", s.start, s.end) for i, s in enumerate(syn.storm_spans()[:4])]
expert = expert_for(syn)

config = CampaignConfig(
    search_space=SearchSpace(n_trials=10, rng_seed=41),
    max_iterations=8,
)
campaign = run_in_period(syn.bundle, seeds, config, expert, campaign_id="demo-loop")
state = campaign.state

print(f"campaign {state.campaign_id}: converged={state.converged} "
      f"after {len(state.reports)} iteration(s)\n")
print(f"{'iteration':>10} {'candidates':>11} {'validated':>10} {'rejected':>9} {'new':>5}")
for report in state.reports:
    print(
        f"{report.iteration:>10} {report.n_candidates:>11} {report.n_validated:>10} "
        f"{report.n_rejected:>9} {report.n_new:>5}"
    )

print(f"\nfinalized storms ({len(state.finalized)}):")
for record in state.finalized:
    print(f"  {record.span.isoformat()}  {record.label}")

planted = syn.storm_spans()
covered = sum(1 for span in planted if any(r.span.intersects(span) for r in state.finalized))
print(f"\nplanted storm coverage: {covered}/{len(planted)}")
print(f"expert decisions made: {expert.decisions_made}")
