import datetime as dt
import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stormwatch.campaign import Campaign, Decision, StormRecord
from stormwatch.dates import DateSpan
from stormwatch.errors import DataFormatError, NotFoundError
from stormwatch.io import (
    append_trial_log,
    read_articles,
    read_embeddings,
    read_holidays,
    read_seed_storms,
    read_signals,
    read_storm_records,
    read_trial_log,
    storms_to_csv_text,
    write_candidates,
    write_embeddings,
    write_signals,
    write_storms,
)
from stormwatch.signals import ALL_KINDS, DispersionSeries, SignalBundle, SignalKind
from stormwatch.simulate import make_bundle
from stormwatch.store import Store
from stormwatch.detector import CandidateWindow
from stormwatch.forecaster import HyperParams
from stormwatch.tuner import TrialResult

D = dt.date
D0 = D(2001, 1, 1)


def tiny_bundle(n=6, start=D0):
    rng = np.random.default_rng(0)
    series = {}
    for kind in ALL_KINDS:
        vals = rng.uniform(1, 5, n)
        vals[2] = np.nan
        series[kind] = DispersionSeries(kind=kind, start=start, values=vals)
    return SignalBundle(series)


# --- signals table ------------------------------------------------------------


def test_signals_round_trip_exact(tmp_path):
    bundle = tiny_bundle()
    path = tmp_path / "signals.csv"
    write_signals(path, bundle)
    back = read_signals(path)
    for kind in ALL_KINDS:
        assert np.array_equal(
            back.series[kind].values, bundle.series[kind].values, equal_nan=True
        )
    assert back.span == bundle.span


def test_signals_missing_rows_become_gaps(tmp_path):
    path = tmp_path / "signals.csv"
    path.write_text(
        "date,topics,llm,entities,plot\n"
        "2001-01-01,1.0,2.0,3.0,4.0\n"
        "2001-01-03,1.5,2.5,3.5,4.5\n"
    )
    bundle = read_signals(path)
    assert bundle.n_days == 3
    assert np.isnan(bundle.series[SignalKind.TOPICS].values[1])


def test_signals_bad_header(tmp_path):
    path = tmp_path / "signals.csv"
    path.write_text("date,a,b,c,d\n")
    with pytest.raises(DataFormatError):
        read_signals(path)


# --- embeddings -----------------------------------------------------------------


def test_embeddings_round_trip(tmp_path):
    from stormwatch.signals import DocEmbedding

    records = [
        DocEmbedding("d1", D0, "nyt", SignalKind.TOPICS, np.array([0.25, -1.5])),
        DocEmbedding("d2", D0 + dt.timedelta(days=1), "lat", SignalKind.TOPICS, np.array([2.0, 0.125])),
    ]
    path = tmp_path / "emb.csv"
    write_embeddings(path, records)
    back = read_embeddings(path, SignalKind.TOPICS)
    assert [r.doc_id for r in back] == ["d1", "d2"]
    assert np.array_equal(back[0].vector, records[0].vector)


def test_embeddings_malformed_date_reports_row(tmp_path):
    path = tmp_path / "emb.csv"
    path.write_text("doc_id,date,outlet,v0\nok,2001-01-01,nyt,1.0\nbad,01/02/2001,nyt,2.0\n")
    with pytest.raises(DataFormatError) as err:
        read_embeddings(path, SignalKind.LLM)
    assert err.value.row == 3


# --- storm lists ------------------------------------------------------------------


def record(label, start, end, status="validated", iteration=1):
    return StormRecord(
        id=f"x:{start}", label=label, start=start, end=end, status=status, iteration=iteration
    )


def test_storms_round_trip_with_quoted_commas(tmp_path):
    records = [
        record('Shooting, school "tragedy"', D(2001, 2, 1), D(2001, 2, 7)),
        record("plain label", D(2001, 3, 1), D(2001, 3, 2)),
    ]
    path = tmp_path / "storms.csv"
    write_storms(path, records)
    back = read_storm_records(path)
    assert [r.label for r in back] == [r.label for r in records]
    assert [(r.start, r.end, r.status, r.iteration) for r in back] == [
        (r.start, r.end, r.status, r.iteration) for r in records
    ]


def test_storm_csv_text_is_stable_under_reimport(tmp_path):
    records = [record("a,b", D(2001, 1, 1), D(2001, 1, 3)), record("c", D(2001, 5, 1), D(2001, 5, 9))]
    text = storms_to_csv_text(records)
    path = tmp_path / "s.csv"
    path.write_text(text)
    again = storms_to_csv_text(read_storm_records(path))
    assert again == text


@given(
    st.lists(
        st.tuples(
            st.text(
                alphabet=st.characters(min_codepoint=32, max_codepoint=126),
                min_size=1,
                max_size=30,
            ),
            st.integers(0, 3000),
            st.integers(0, 14),
        ),
        min_size=1,
        max_size=8,
    )
)
@settings(max_examples=60, deadline=None)
def test_storm_csv_inverse_property(tmp_path_factory, rows):
    tmp = tmp_path_factory.mktemp("csv")
    records = [
        record(label, D0 + dt.timedelta(days=s), D0 + dt.timedelta(days=s + d))
        for label, s, d in rows
    ]
    path = tmp / "s.csv"
    write_storms(path, records)
    back = read_storm_records(path)
    assert [(r.label, r.start, r.end) for r in back] == [
        (r.label, r.start, r.end) for r in records
    ]


def test_seed_storm_reader(tmp_path):
    path = tmp_path / "seeds.csv"
    path.write_text('label,start,end\n"Election, 2000",2000-11-01,2000-11-20\n')
    seeds = read_seed_storms(path)
    assert seeds[0].label == "Election, 2000"
    assert seeds[0].span == DateSpan(D(2000, 11, 1), D(2000, 11, 20))


# --- candidates / holidays / articles ------------------------------------------------


def test_candidate_export_schema(tmp_path):
    w = CandidateWindow(
        id="c:i1:2001-01-05",
        start=D(2001, 1, 5),
        end=D(2001, 1, 7),
        votes={
            D(2001, 1, 5): frozenset({SignalKind.TOPICS, SignalKind.LLM, SignalKind.PLOT}),
            D(2001, 1, 6): frozenset({SignalKind.TOPICS, SignalKind.ENTITIES, SignalKind.LLM}),
            D(2001, 1, 7): frozenset({SignalKind.TOPICS, SignalKind.LLM, SignalKind.PLOT}),
        },
    )
    path = tmp_path / "cands.csv"
    write_candidates(path, [w])
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "candidate_id,start,end,duration_days,votes_topics,votes_entities,votes_plot,votes_llm"
    assert lines[1] == "c:i1:2001-01-05,2001-01-05,2001-01-07,3,3,1,2,3"


def test_holidays_reader(tmp_path):
    path = tmp_path / "holidays.csv"
    path.write_text("date,name\n2001-12-25,christmas\n2002-12-25,christmas\n")
    cal = read_holidays(path)
    assert cal.names() == ["christmas"]
    assert len(cal.entries) == 2


def test_articles_duplicate_doc_id_rejected(tmp_path):
    path = tmp_path / "articles.csv"
    path.write_text(
        "doc_id,date,outlet,headline,snippet\n"
        "a1,2001-01-01,nyt,Headline,Body text\n"
        "a1,2001-01-02,lat,Other,More\n"
    )
    with pytest.raises(DataFormatError):
        read_articles(path)


def test_trial_log_append_and_read(tmp_path):
    path = tmp_path / "trials.jsonl"
    t = TrialResult(
        trial_index=0, hyperparams=HyperParams(), candidates=[], matched_storms=2,
        n_candidates=3, n_seeds=4, precision=2 / 3, recall=0.5, wall_time_s=0.1,
    )
    append_trial_log(path, t)
    append_trial_log(path, t)
    rows = read_trial_log(path)
    assert len(rows) == 2
    assert rows[0]["A"] == 3 and rows[0]["D"] == 2 and rows[0]["S"] == 4


# --- store ---------------------------------------------------------------------------


def test_store_bundle_round_trip(tmp_path):
    store = Store(tmp_path / "data")
    bundle = tiny_bundle()
    store.save_bundle(bundle)
    back = store.load_bundle()
    for kind in ALL_KINDS:
        assert np.array_equal(back.series[kind].values, bundle.series[kind].values, equal_nan=True)


def test_store_empty_restore_raises(tmp_path):
    store = Store(tmp_path / "data")
    with pytest.raises(NotFoundError):
        store.restore_campaign("ghost")


def make_campaign(store, cid="camp-a"):
    from stormwatch.campaign import CampaignConfig
    from stormwatch.tuner import SearchSpace, SeedStorm

    span = DateSpan(D(2001, 1, 1), D(2001, 12, 31))
    return Campaign.open(
        cid, "in_period", span, span,
        [SeedStorm("seed", D(2001, 3, 1), D(2001, 3, 4))],
        CampaignConfig(search_space=SearchSpace(n_trials=2, rng_seed=1)),
        sink=store.journal_sink(cid),
    )


class FakeWindow:
    def __init__(self, wid, start, end):
        self.id, self.start, self.end = wid, start, end


def test_store_journal_restore_round_trip(tmp_path):
    store = Store(tmp_path / "data")
    campaign = make_campaign(store)
    campaign.queue_candidates([FakeWindow("camp-a:i1:2001-06-01", D(2001, 6, 1), D(2001, 6, 3))], 1)
    campaign.decide(Decision("camp-a:i1:2001-06-01", "validated", label="june storm"))
    campaign.close_iteration()

    restored, info = store.restore_campaign("camp-a")
    assert not info.from_snapshot
    assert restored.state.to_dict() == campaign.state.to_dict()

    # snapshot + tail decisions survive
    store.persist_campaign(campaign)
    campaign.queue_candidates([FakeWindow("camp-a:i2:2001-08-01", D(2001, 8, 1), D(2001, 8, 2))], 2)
    campaign.decide(Decision("camp-a:i2:2001-08-01", "rejected", note="noise"))
    restored2, info2 = store.restore_campaign("camp-a")
    assert info2.from_snapshot and info2.events_replayed == 2
    assert restored2.state.to_dict() == campaign.state.to_dict()


def test_store_corrupt_journal_tail_halts_cleanly(tmp_path):
    store = Store(tmp_path / "data")
    campaign = make_campaign(store, "camp-b")
    campaign.queue_candidates([FakeWindow("camp-b:i1:2001-06-01", D(2001, 6, 1), D(2001, 6, 3))], 1)
    good_state = json.dumps(campaign.state.to_dict())

    path = store.journal_path("camp-b")
    with path.open("a") as fh:
        fh.write('{"type": "decision", "candidate_id": "camp-b:i1:2001-06-01", "verd')  # torn write

    restored, info = store.restore_campaign("camp-b")
    assert info.corrupt_tail_offset is not None
    assert json.dumps(restored.state.to_dict()) == good_state


def test_store_candidate_details(tmp_path):
    store = Store(tmp_path / "data")
    store.save_candidate_detail("camp-a", "camp-a:i1:2001-06-01", {"x": 1})
    assert store.load_candidate_detail("camp-a", "camp-a:i1:2001-06-01") == {"x": 1}
    with pytest.raises(NotFoundError):
        store.load_candidate_detail("camp-a", "missing")


def test_store_lists_campaigns(tmp_path):
    store = Store(tmp_path / "data")
    make_campaign(store, "camp-z")
    make_campaign(store, "camp-a2")
    assert store.list_campaigns() == ["camp-a2", "camp-z"]
