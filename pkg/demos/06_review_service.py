#!/usr/bin/env python3
"""The persistence layer and review API, exercised in-process.

Seeds a data directory, opens a campaign, runs one detection round through
the HTTP surface (no network; the app is driven by a test client), posts a
couple of expert decisions, then kills the in-memory state and proves the
journal restores everything — including a torn final write.

Run:  python demos/06_review_service.py
"""

import json
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from fastapi.testclient import TestClient

from stormwatch import Campaign, CampaignConfig, SearchSpace, SeedStorm, Store
from stormwatch.api import create_app
from stormwatch.simulate import make_bundle

root = Path(tempfile.mkdtemp(prefix="stormwatch-demo-"))
print(f"data directory: {root}\n")

syn = make_bundle(n_days=600, rng_seed=91, n_storms=5, n_decoys=0)
store = Store(root)
store.save_bundle(syn.bundle)

seeds = [SeedStorm(f"seed-{i}", s.start, s.end) for i, s in enumerate(syn.storm_spans()[:2])]
campaign = Campaign.open(
    "demo-api", "in_period", syn.bundle.span, syn.bundle.span, seeds,
    CampaignConfig(search_space=SearchSpace(n_trials=4, rng_seed=2), smoothing_window=1),
    sink=store.journal_sink("demo-api"),
)
store.persist_campaign(campaign)

client = TestClient(create_app(store, run_async=False))

run = client.post("/campaigns/demo-api/iterations").json()
print(f"triggered round: {run['run_id']} -> {client.get('/runs/' + run['run_id']).json()['status']}")

queue = client.get("/campaigns/demo-api/candidates").json()
print(f"pending candidates: {queue['total']}")
for row in queue["candidates"]:
    print(f"  {row['id']}  {row['start']}..{row['end']}")

first = queue["candidates"][0]["id"]
detail = client.get(f"/candidates/{first}").json()
print(f"\ncandidate detail for {first}:")
print(f"  context {detail['context']['from']} .. {detail['context']['to']} "
      f"({len(detail['dates'])} days)")
flagged = detail["series"]["topics"]["flagged_days"]
print(f"  topics flagged days: {flagged}")

print("\nposting decisions:")
resp = client.post(
    f"/candidates/{first}/decision",
    json={"verdict": "validated", "label": "Demo hurricane", "expert": "demo"},
)
print(f"  validate -> {resp.status_code}")
resp = client.post(f"/candidates/{first}/decision", json={"verdict": "rejected"})
print(f"  decide again -> {resp.status_code} ({resp.json()['code']})")

storms = client.get("/storms").json()
print(f"\nstorm list now has {storms['total']} record(s); newest labels: "
      f"{[s['label'] for s in storms['storms']][-3:]}")

# --- crash and restore -------------------------------------------------------

journal = store.journal_path("demo-api")
n_events = sum(1 for _ in journal.open())
with journal.open("a") as fh:
    fh.write('{"type": "decision", "candidate_id": "demo-api:i1:')  # torn write

restored, info = store.restore_campaign("demo-api")
print(f"\nrestore after torn write: {n_events} good events kept, "
      f"corrupt tail at byte {info.corrupt_tail_offset}")
record = restored.state.records[first]
print(f"decision survived the crash: {record.id} -> {record.status} ({record.label!r})")

replayed = Campaign.replay(store.read_journal("demo-api")[0])
print(f"journal replay equals live state: {replayed.state.to_dict() == restored.state.to_dict()}")
