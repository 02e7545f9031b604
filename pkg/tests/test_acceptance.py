"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run under pytest (each criterion is a test) or standalone:

    python tests/test_acceptance.py

which executes every criterion in order and prints PASS/FAIL per line.
"""

import datetime as dt
import itertools
import json
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))
sys.path.insert(0, str(Path(__file__).resolve().parent))

import numpy as np
import pytest

from stormwatch.campaign import (
    Campaign,
    CampaignConfig,
    check_convergence,
    compare_periods,
    run_in_period,
    run_out_period,
)
from stormwatch.dates import DateSpan
from stormwatch.detector import DetectorConfig
from stormwatch.forecaster import HyperParams, fit, predict_with_interval
from stormwatch.signals import DispersionSeries, SignalKind, compute_daily_trace
from stormwatch.simulate import SimulatedExpert, expert_for, make_bundle
from stormwatch.store import Store
from stormwatch.tuner import SearchSpace, SeedStorm, TrialResult, random_search, score, select_best
from stormwatch.detector import CandidateWindow

from oracles import score_oracle, trace_oracle

D = dt.date

PERIOD_ONE_COUNTS = [9, 9, 14, 9, 11, 4, 10, 10, 11, 9, 5]
PERIOD_TWO_COUNTS = [7, 9, 12, 11, 12, 14, 14, 16, 13, 12]


def verdict(n, name, ok, detail=""):
    line = f"{'PASS' if ok else 'FAIL'}  criterion {n}: {name}"
    if detail:
        line += f"  [{detail}]"
    print(line)
    assert ok, line


# --- 1. trace oracle ---------------------------------------------------------------


def test_criterion_01_trace_oracle():
    rng = np.random.default_rng(1234)
    started = time.perf_counter()
    worst = 0.0
    for _ in range(1000):
        n = int(rng.integers(2, 51))
        d = int(rng.integers(1, 65))
        x = rng.normal(scale=rng.uniform(0.2, 4.0), size=(n, d))
        got = compute_daily_trace(list(x))
        expect = trace_oracle(x)
        worst = max(worst, abs(got - expect))
    elapsed = time.perf_counter() - started
    verdict(
        1, "trace equals brute-force covariance trace / n",
        worst < 1e-9 and elapsed < 5.0,
        f"max |diff| {worst:.2e}, {elapsed:.2f}s",
    )


# --- 2. model recovery -------------------------------------------------------------


def test_criterion_02_model_recovery():
    rng = np.random.default_rng(42)
    days = 1460
    idx = np.arange(days, dtype=float)
    slope = np.where(idx < 400, 0.004, np.where(idx < 900, -0.006, 0.003))
    trend = 20 + np.concatenate([[0], np.cumsum(slope[1:])])
    truth = (
        trend
        + 1.2 * np.sin(2 * np.pi * idx / 7)
        + 0.8 * np.cos(2 * np.pi * idx / 7)
        + 1.5 * np.sin(2 * np.pi * idx / 365.25)
        + 0.9 * np.cos(2 * np.pi * idx * 2 / 365.25)
    )
    y = truth + rng.normal(0, 0.1, days)
    series = DispersionSeries(kind=SignalKind.TOPICS, start=D(2000, 1, 1), values=y)

    started = time.perf_counter()
    model = fit(series, HyperParams(interval_width=0.95))
    fit_seconds = time.perf_counter() - started
    forecast = predict_with_interval(model, series.span)
    r2 = 1 - np.sum((forecast.yhat - truth) ** 2) / np.sum((truth - truth.mean()) ** 2)
    coverage = ((y >= forecast.lower) & (y <= forecast.upper)).mean()
    verdict(
        2, "synthetic trend+seasonality recovery",
        r2 >= 0.95 and 0.92 <= coverage <= 0.98 and fit_seconds < 10.0,
        f"R2 {r2:.4f}, coverage {coverage:.4f}, fit {fit_seconds:.2f}s",
    )


# --- 3. planted-storm recall --------------------------------------------------------


def test_criterion_03_planted_storm_recall():
    started = time.perf_counter()
    syn = make_bundle(n_days=2000, rng_seed=202, n_storms=10, n_decoys=5)
    seeds = [SeedStorm(f"seed-{i}", s.start, s.end) for i, s in enumerate(syn.storm_spans()[:5])]
    best, trials, _ = random_search(syn.bundle, seeds, SearchSpace(n_trials=30, rng_seed=7))
    elapsed = time.perf_counter() - started
    recovered = sum(
        1 for span in syn.storm_spans() if any(w.span.intersects(span) for w in best.candidates)
    )
    decoy_hits = sum(
        1 for w in best.candidates for span in syn.decoy_spans() if w.span.intersects(span)
    )
    verdict(
        3, "full detection pipeline on planted storms",
        recovered >= 9 and decoy_hits == 0 and elapsed < 300.0,
        f"{recovered}/10 planted, {decoy_hits} decoy overlaps, {elapsed:.1f}s",
    )


# --- 4. precision/recall arithmetic ---------------------------------------------------


def _window(start, end, wid):
    return CandidateWindow(id=wid, start=start, end=end)


def test_criterion_04_score_arithmetic():
    seeds = [
        SeedStorm(f"s{i}", D(2001, 1 + i, 1), D(2001, 1 + i, 3)) for i in range(5)
    ]
    candidates = [
        _window(D(2001, 1, 2), D(2001, 1, 5), "a"),
        _window(D(2001, 2, 3), D(2001, 2, 4), "b"),
        _window(D(2001, 3, 3), D(2001, 3, 6), "c"),
        _window(D(2001, 9, 1), D(2001, 9, 2), "d"),
    ]
    exact = score(candidates, seeds) == (0.75, 0.6, 3)
    empty = score([], seeds) == (0.0, 0.0, 0)

    rng = np.random.default_rng(99)
    base = D(2001, 1, 1)
    layouts_ok = True
    for _ in range(1000):
        n_seeds = int(rng.integers(1, 8))
        n_cands = int(rng.integers(0, 10))
        seeds_r = [
            SeedStorm(
                f"s{i}",
                base + dt.timedelta(days=int(rng.integers(0, 350))),
                base + dt.timedelta(days=int(rng.integers(350, 380))),
            )
            for i in range(n_seeds)
        ]
        seeds_r = [
            SeedStorm(s.label, s.start, min(s.end, s.start + dt.timedelta(days=int(rng.integers(0, 12)))))
            for s in seeds_r
        ]
        cands_r = []
        for i in range(n_cands):
            s = base + dt.timedelta(days=int(rng.integers(0, 360)))
            cands_r.append(_window(s, s + dt.timedelta(days=int(rng.integers(0, 12))), f"c{i}"))
        got = score(cands_r, seeds_r)
        expect = score_oracle(
            [(c.start, c.end) for c in cands_r], [(s.start, s.end) for s in seeds_r]
        )
        if got != expect:
            layouts_ok = False
            break
    verdict(
        4, "precision/recall arithmetic vs all-pairs oracle",
        exact and empty and layouts_ok,
        "exact + A=0 + 1000 random layouts",
    )


# --- 5. selection rule -----------------------------------------------------------------


def _trial(idx, recall, precision, a=10):
    return TrialResult(
        trial_index=idx, hyperparams=HyperParams(), candidates=[], matched_storms=0,
        n_candidates=a, n_seeds=5, precision=precision, recall=recall,
    )


def test_criterion_05_selection_rule():
    footnote = select_best([_trial(0, 0.9, 0.5), _trial(1, 0.8, 0.9)]).trial_index == 0
    tie_precision = select_best([_trial(0, 0.9, 0.5), _trial(1, 0.9, 0.7)]).trial_index == 1
    tie_a = select_best([_trial(0, 0.9, 0.7, a=12), _trial(1, 0.9, 0.7, a=9)]).trial_index == 1
    tie_index = select_best([_trial(0, 0.9, 0.7), _trial(1, 0.9, 0.7)]).trial_index == 0
    deterministic = all(
        select_best([_trial(0, 0.9, 0.5), _trial(1, 0.8, 0.9)]).trial_index == 0
        for _ in range(5)
    )
    verdict(
        5, "lexicographic (recall, precision) selection with deterministic ties",
        footnote and tie_precision and tie_a and tie_index and deterministic,
    )


# --- 6. in-period loop with simulated expert ----------------------------------------------


def test_criterion_06_in_period_loop():
    syn = make_bundle(n_days=1000, rng_seed=77, n_storms=8, n_decoys=0, duration_range=(3, 6))
    spans = syn.storm_spans()
    seeds = [SeedStorm(f"seed-{i}", s.start, s.end) for i, s in enumerate(spans[:4])]
    expert = expert_for(syn)
    config = CampaignConfig(
        search_space=SearchSpace(n_trials=8, rng_seed=13),
        detector=DetectorConfig(),
        max_iterations=6,
    )
    campaign = run_in_period(syn.bundle, seeds, config, expert)
    state = campaign.state

    converged = state.converged and len(state.reports) <= 6
    last = state.reports[-1]
    rule_ok = check_convergence(last.n_new, len(state.finalized), 0.01)
    one_percent_edge = check_convergence(1, 100, 0.01)

    detectable = [
        span
        for span in spans
        if any(span.intersects(s.span) for s in seeds)
        or any(r.span.intersects(span) for r in state.records.values() if r.iteration > 0)
    ]
    exactly_once = all(
        sum(1 for r in state.finalized if r.span.intersects(span)) == 1 for span in detectable
    )
    verdict(
        6, "in-period loop converges; planted storms finalized exactly once",
        converged and rule_ok and one_percent_edge and exactly_once,
        f"{len(state.reports)} iteration(s), {len(state.finalized)} finalized, "
        f"{len(detectable)}/{len(spans)} detectable",
    )


# --- 7. reference yearly-count consistency ---------------------------------------------------------


def test_criterion_07_table_consistency():
    total_in = sum(PERIOD_ONE_COUNTS)
    mean_in = np.mean(PERIOD_ONE_COUNTS)
    total_out = sum(PERIOD_TWO_COUNTS)
    mean_out = np.mean(PERIOD_TWO_COUNTS)
    t, df, p = compare_periods(PERIOD_ONE_COUNTS, PERIOD_TWO_COUNTS)
    ok = (
        total_in == 101
        and abs(mean_in - 9.18) <= 0.01
        and total_out == 120
        and mean_out == 12.0
        and abs(t - (-2.42)) <= 0.02
        and 18 <= df <= 19
        and 0.02 <= p <= 0.03
    )
    verdict(
        7, "reference yearly counts and period t-test",
        ok,
        f"totals {total_in}/{total_out}, means {mean_in:.2f}/{mean_out:.1f}, "
        f"t({df:.2f})={t:.3f}, p={p:.3f}",
    )


# --- 8. determinism & persistence --------------------------------------------------------------


def _masked_log(trials):
    lines = []
    for t in trials:
        record = t.log_record()
        record.pop("wall_time_s")
        lines.append(json.dumps(record, sort_keys=True))
    return "\n".join(lines)


def _candidate_projection(windows):
    return [
        (
            w.id,
            w.start,
            w.end,
            tuple(sorted((d, tuple(sorted(k.value for k in ks))) for d, ks in w.votes.items())),
            repr(w.peak_deficit),
        )
        for w in windows
    ]


def test_criterion_08_determinism_and_persistence(tmp_path):
    syn = make_bundle(n_days=700, rng_seed=31, n_storms=5, n_decoys=0)
    seeds = [SeedStorm(f"seed-{i}", s.start, s.end) for i, s in enumerate(syn.storm_spans()[:3])]
    space = SearchSpace(n_trials=6, rng_seed=99)
    best_a, trials_a, _ = random_search(syn.bundle, seeds, space)
    best_b, trials_b, _ = random_search(syn.bundle, seeds, space)
    logs_identical = _masked_log(trials_a) == _masked_log(trials_b)
    best_identical = (
        best_a.trial_index == best_b.trial_index
        and best_a.hyperparams == best_b.hyperparams
        and (best_a.precision, best_a.recall, best_a.n_candidates)
        == (best_b.precision, best_b.recall, best_b.n_candidates)
        and _candidate_projection(best_a.candidates) == _candidate_projection(best_b.candidates)
    )

    # persist / restore / replay
    store = Store(tmp_path / "data")
    expert = expert_for(syn)
    config = CampaignConfig(search_space=space, max_iterations=4)
    counter = itertools.count()
    clock = lambda: f"2026-02-01T00:00:{next(counter) % 60:02d}+00:00"
    campaign = run_in_period(
        syn.bundle, seeds, config, expert,
        campaign_id="acc8", sink=store.journal_sink("acc8"), clock=clock,
    )
    store.persist_campaign(campaign)
    restored, _ = store.restore_campaign("acc8")
    restore_equal = restored.state.to_dict() == campaign.state.to_dict()

    events, corrupt = store.read_journal("acc8")
    replayed = Campaign.replay(events)
    replay_equal = corrupt is None and replayed.state.to_dict() == campaign.state.to_dict()

    verdict(
        8, "determinism, persistence round-trip, journal replay",
        logs_identical and best_identical and restore_equal and replay_equal,
        f"{len(trials_a)} trials, {len(events)} events",
    )


# --- 9. out-period restriction ------------------------------------------------------------------


def test_criterion_09_out_period_rolling():
    start = D(2000, 1, 1)
    n_days = (D(2009, 12, 31) - start).days + 1  # ten calendar years
    syn = make_bundle(
        n_days=n_days, start=start, rng_seed=606, n_storms=26, n_decoys=0,
        duration_range=(3, 7),
    )
    spans = syn.storm_spans()
    target_span = DateSpan(D(2003, 1, 1), syn.bundle.end)
    labeled_span = DateSpan(start, D(2002, 12, 31))
    labeled = [
        SeedStorm(f"known-{i}", s.start, s.end)
        for i, s in enumerate(spans)
        if labeled_span.contains_span(s)
    ]
    target_storms = [s for s in spans if s.start >= target_span.start]
    assert labeled and target_storms

    expert = expert_for(syn)
    config = CampaignConfig(
        search_space=SearchSpace(n_trials=8, rng_seed=17),
        window_years=3,
        max_iterations=20,
    )
    started = time.perf_counter()
    campaign = run_out_period(
        (syn.bundle.slice_span(labeled_span), labeled),
        syn.bundle.slice_span(target_span),
        target_span,
        config,
        expert,
        rolling=True,
    )
    elapsed = time.perf_counter() - started
    state = campaign.state

    # candidates of round k lie inside target year k
    year_ok = True
    for record in state.records.values():
        if record.iteration == 0:
            continue
        year = 2003 + record.iteration - 1
        if record.start.year != year or record.end.year != year:
            year_ok = False
    inside_target = all(
        record.start >= target_span.start
        for record in state.records.values()
        if record.iteration > 0
    )

    recovered = sum(
        1
        for span in target_storms
        if any(r.span.intersects(span) for r in state.records.values() if r.iteration > 0)
    )
    recall_ok = recovered >= int(np.ceil(0.9 * len(target_storms)))
    verdict(
        9, "rolling out-period transfer restricted to target years",
        year_ok and inside_target and recall_ok and len(state.reports) == 7,
        f"{recovered}/{len(target_storms)} target storms, "
        f"{len(state.reports)} yearly rounds, {elapsed:.1f}s",
    )


def main():
    import inspect
    import tempfile

    failures = 0
    module = sys.modules[__name__]
    for name, func in sorted(
        ((n, f) for n, f in vars(module).items() if n.startswith("test_criterion")),
        key=lambda kv: kv[0],
    ):
        kwargs = {}
        if "tmp_path" in inspect.signature(func).parameters:
            kwargs["tmp_path"] = Path(tempfile.mkdtemp())
        try:
            func(**kwargs)
        except AssertionError:
            failures += 1
        except Exception as exc:  # noqa: BLE001
            failures += 1
            print(f"FAIL  {name}: crashed: {exc}")
    print(f"{9 - failures}/9 criteria passed")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
