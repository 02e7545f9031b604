import datetime as dt
import json

import numpy as np
import pytest

from stormwatch.cli import main
from stormwatch.io import read_signals, read_storm_records, read_trial_log, write_signals, write_storms
from stormwatch.campaign import StormRecord
from stormwatch.simulate import make_bundle
from stormwatch.store import Store

D = dt.date

PERIOD_ONE_COUNTS = [9, 9, 14, 9, 11, 4, 10, 10, 11, 9, 5]


def run_cli(data_dir, *argv):
    return main(["--data-dir", str(data_dir), *argv])


@pytest.fixture()
def data_dir(tmp_path):
    return tmp_path / "data"


@pytest.fixture()
def seeded_store(tmp_path, data_dir):
    syn = make_bundle(n_days=420, rng_seed=303, n_storms=4, n_decoys=0)
    store = Store(data_dir)
    store.save_bundle(syn.bundle)
    seeds_path = tmp_path / "seeds.csv"
    with seeds_path.open("w") as fh:
        fh.write("label,start,end\n")
        for i, span in enumerate(syn.storm_spans()[:2]):
            fh.write(f"seed-{i},{span.start},{span.end}\n")
    return {"syn": syn, "store": store, "seeds": seeds_path, "tmp": tmp_path}


def storm_list_csv(tmp_path, counts, start_year, name):
    records = []
    for offset, count in enumerate(counts):
        year = start_year + offset
        for i in range(count):
            start = D(year, 1, 5) + dt.timedelta(days=20 * i)
            records.append(
                StormRecord(
                    id=f"{year}-{i}", label=f"storm {year}-{i}", start=start,
                    end=start + dt.timedelta(days=4), status="validated", iteration=1,
                )
            )
    path = tmp_path / name
    write_storms(path, records)
    return path


def test_unknown_subcommand_is_usage_error(data_dir, capsys):
    assert run_cli(data_dir, "frobnicate") == 1
    assert "error" in capsys.readouterr().err


def test_missing_required_flag_is_usage_error(data_dir):
    assert run_cli(data_dir, "tune") == 1


def test_ingest_malformed_date_exits_2_with_row(data_dir, tmp_path, capsys):
    bad = tmp_path / "sig.csv"
    bad.write_text("date,topics,llm,entities,plot\n2001-01-01,1,2,3,4\nnot-a-date,1,2,3,4\n")
    assert run_cli(data_dir, "ingest", "signals", str(bad)) == 2
    assert "row 3" in capsys.readouterr().err


def test_ingest_and_signals_round_trip(data_dir, tmp_path, capsys):
    syn = make_bundle(n_days=60, rng_seed=1, n_storms=1, n_decoys=0)
    src = tmp_path / "signals.csv"
    write_signals(src, syn.bundle)
    assert run_cli(data_dir, "ingest", "signals", str(src)) == 0
    out = tmp_path / "exported.csv"
    assert run_cli(data_dir, "signals", "--out", str(out)) == 0
    assert out.read_text() == src.read_text()
    assert run_cli(data_dir, "signals", "--smooth", "7", "--summary") == 0
    assert "topics" in capsys.readouterr().out


def test_ingest_embeddings_builds_bundle(data_dir, tmp_path):
    rng = np.random.default_rng(5)
    start = D(2001, 1, 1)
    paths = {}
    for kind in ("topics", "entities", "plot", "llm"):
        path = tmp_path / f"{kind}.csv"
        with path.open("w") as fh:
            dim = 4
            fh.write("doc_id,date,outlet," + ",".join(f"v{i}" for i in range(dim)) + "\n")
            for day in range(10):
                for j in range(3):
                    vec = ",".join(repr(float(v)) for v in rng.normal(size=dim))
                    fh.write(f"{kind}-{day}-{j},{start + dt.timedelta(days=day)},nyt,{vec}\n")
        paths[kind] = path
    code = run_cli(
        data_dir, "ingest", "embeddings",
        "--topics", str(paths["topics"]), "--entities", str(paths["entities"]),
        "--plot", str(paths["plot"]), "--llm", str(paths["llm"]),
    )
    assert code == 0
    bundle = Store(data_dir).load_bundle()
    assert bundle.n_days == 10
    assert not np.isnan(bundle.series[list(bundle.series)[0]].values).any()


def test_storm_list_export_ingest_byte_identical(data_dir, tmp_path):
    src = storm_list_csv(tmp_path, [2, 3], 2001, "storms.csv")
    assert run_cli(data_dir, "ingest", "storms", str(src)) == 0
    out = tmp_path / "roundtrip.csv"
    assert run_cli(data_dir, "export", "storms", "--out", str(out)) == 0
    a = read_storm_records(src)
    b = read_storm_records(out)
    assert [(r.label, r.start, r.end, r.status, r.iteration) for r in a] == [
        (r.label, r.start, r.end, r.status, r.iteration) for r in b
    ]
    # re-export of re-ingested records is byte-identical
    assert run_cli(data_dir, "ingest", "storms", str(out)) == 0
    out2 = tmp_path / "roundtrip2.csv"
    assert run_cli(data_dir, "export", "storms", "--out", str(out2)) == 0
    assert out2.read_bytes() == out.read_bytes()


def test_stats_storms_reproduces_annual_average(data_dir, tmp_path, capsys):
    path = storm_list_csv(tmp_path, PERIOD_ONE_COUNTS, 1996, "in.csv")
    assert run_cli(data_dir, "stats", "storms", str(path)) == 0
    out = capsys.readouterr().out
    assert "total storms 101" in out
    assert "annual average 9.18" in out


def test_stats_compare_two_periods(data_dir, tmp_path, capsys):
    a = storm_list_csv(tmp_path, PERIOD_ONE_COUNTS, 1996, "a.csv")
    b = storm_list_csv(tmp_path, [7, 9, 12, 11, 12, 14, 14, 16, 13, 12], 2007, "b.csv")
    assert run_cli(data_dir, "stats", "compare", str(a), str(b)) == 0
    out = capsys.readouterr().out
    assert "t(18.9" in out and "p = 0.026" in out


def test_stats_correlations(seeded_store, capsys):
    assert run_cli(seeded_store["store"].root, "stats", "correlations", "--smooth", "7") == 0
    out = capsys.readouterr().out
    assert "topics" in out and "llm" in out


def test_tune_writes_trial_log_and_candidates(seeded_store, tmp_path, capsys):
    log = tmp_path / "trials.jsonl"
    cands = tmp_path / "cands.csv"
    code = run_cli(
        seeded_store["store"].root, "tune",
        "--seeds", str(seeded_store["seeds"]),
        "--trials", "3", "--rng-seed", "11", "--smooth", "0",
        "--trial-log", str(log), "--out-candidates", str(cands),
    )
    assert code == 0
    rows = read_trial_log(log)
    assert len(rows) == 3
    assert {"A", "D", "S", "precision", "recall", "wall_time_s"} <= set(rows[0])
    header = cands.read_text().splitlines()[0]
    assert header.startswith("candidate_id,start,end,duration_days,votes_")
    assert "best trial" in capsys.readouterr().out


def test_iterate_and_decisions_flow(seeded_store, tmp_path, capsys):
    data_root = seeded_store["store"].root
    config = {
        "campaign_id": "cli-camp",
        "mode": "in_period",
        "seeds_file": str(seeded_store["seeds"]),
        "config": {
            "search_space": {"n_trials": 3, "rng_seed": 5},
            "smoothing_window": 1,
        },
    }
    config_path = tmp_path / "campaign.json"
    config_path.write_text(json.dumps(config))

    assert run_cli(data_root, "iterate", "--config", str(config_path)) == 0
    out = capsys.readouterr().out
    assert "iteration 1: queued" in out

    campaign, _ = Store(data_root).restore_campaign("cli-camp")
    pending = campaign.state.pending()
    assert pending

    decisions_path = tmp_path / "decisions.csv"
    with decisions_path.open("w") as fh:
        fh.write("candidate_id,verdict,label,note\n")
        for i, rec in enumerate(pending):
            if i == 0:
                fh.write(f'{rec.id},validated,"cli storm {i}",note\n')
            else:
                fh.write(f"{rec.id},rejected,,\n")
    assert run_cli(data_root, "iterate", "--config", str(config_path), "--decisions", str(decisions_path)) == 0
    out = capsys.readouterr().out
    assert "closed" in out

    campaign, _ = Store(data_root).restore_campaign("cli-camp")
    assert not campaign.state.pending()
    assert campaign.state.reports[0].n_validated == 1


def test_export_candidates(seeded_store, tmp_path, capsys):
    data_root = seeded_store["store"].root
    config_path = tmp_path / "campaign.json"
    config_path.write_text(
        json.dumps(
            {
                "campaign_id": "cli-camp2",
                "seeds_file": str(seeded_store["seeds"]),
                "config": {"search_space": {"n_trials": 2, "rng_seed": 8}, "smoothing_window": 1},
            }
        )
    )
    assert run_cli(data_root, "iterate", "--config", str(config_path)) == 0
    out_path = tmp_path / "cands.csv"
    assert run_cli(data_root, "export", "candidates", "--campaign", "cli-camp2", "--out", str(out_path)) == 0
    lines = out_path.read_text().splitlines()
    assert lines[0] == "candidate_id,start,end,duration_days,votes_topics,votes_entities,votes_plot,votes_llm"
    assert len(lines) >= 2
    capsys.readouterr()


def test_transfer_rolling_round(tmp_path, capsys):
    data_root = tmp_path / "data"
    syn = make_bundle(n_days=365 * 3 + 1, rng_seed=404, n_storms=9, n_decoys=0)
    store = Store(data_root)
    store.save_bundle(syn.bundle)
    # storms wholly inside the first two calendar years are "labeled"
    year3 = D(syn.bundle.start.year + 2, 1, 1)
    labeled = [s for s in syn.storm_spans() if s.end < year3]
    assert labeled
    seeds_path = tmp_path / "labeled.csv"
    with seeds_path.open("w") as fh:
        fh.write("label,start,end\n")
        for i, span in enumerate(labeled):
            fh.write(f"known-{i},{span.start},{span.end}\n")
    config_path = tmp_path / "transfer.json"
    config_path.write_text(
        json.dumps(
            {
                "campaign_id": "cli-transfer",
                "mode": "out_period",
                "target_span": [year3.isoformat(), syn.bundle.end.isoformat()],
                "seeds_file": str(seeds_path),
                "rolling": True,
                "config": {
                    "search_space": {"n_trials": 2, "rng_seed": 3},
                    "smoothing_window": 1,
                    "window_years": 5,
                },
            }
        )
    )
    assert run_cli(data_root, "transfer", "--config", str(config_path)) == 0
    out = capsys.readouterr().out
    assert "round 1" in out
    campaign, _ = Store(data_root).restore_campaign("cli-transfer")
    for rec in campaign.state.pending():
        assert rec.start >= year3
