import datetime as dt

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from stormwatch.dates import DateSpan
from stormwatch.detector import CandidateWindow
from stormwatch.errors import MalformedInputError
from stormwatch.forecaster import HyperParams
from stormwatch.tuner import (
    SearchSpace,
    SeedStorm,
    TrialResult,
    match,
    pareto_front,
    sample_hyperparams,
    score,
    select_best,
)

from oracles import score_oracle

D = dt.date


def window(start, end, wid="w"):
    return CandidateWindow(id=wid, start=start, end=end)


# --- match -------------------------------------------------------------------


def test_match_two_day_overlap():
    storm = SeedStorm("jan storm", D(2001, 1, 5), D(2001, 1, 10))
    cand = window(D(2001, 1, 9), D(2001, 1, 12))
    assert match(cand, storm, 1)
    assert match(cand, storm, 2)
    assert not match(cand, storm, 3)


def test_match_empty_intersection():
    storm = SeedStorm("jan storm", D(2001, 1, 5), D(2001, 1, 10))
    assert not match(window(D(2001, 1, 11), D(2001, 1, 12)), storm)


def test_match_identical_ranges():
    storm = SeedStorm("x", D(2001, 3, 1), D(2001, 3, 4))
    assert match(window(D(2001, 3, 1), D(2001, 3, 4)), storm)


# --- score -------------------------------------------------------------------


def seeds_at(*spans):
    return [SeedStorm(f"s{i}", a, b) for i, (a, b) in enumerate(spans)]


def test_score_no_candidates():
    seeds = seeds_at(*[(D(2001, 1, 1 + 3 * i), D(2001, 1, 2 + 3 * i)) for i in range(5)])
    assert score([], seeds) == (0.0, 0.0, 0)


def test_score_worked_arithmetic():
    # D=3, A=4, S=5 -> precision 0.75, recall 0.6
    seeds = seeds_at(
        (D(2001, 1, 1), D(2001, 1, 3)),
        (D(2001, 2, 1), D(2001, 2, 3)),
        (D(2001, 3, 1), D(2001, 3, 3)),
        (D(2001, 4, 1), D(2001, 4, 3)),
        (D(2001, 5, 1), D(2001, 5, 3)),
    )
    candidates = [
        window(D(2001, 1, 2), D(2001, 1, 5), "a"),
        window(D(2001, 2, 3), D(2001, 2, 4), "b"),
        window(D(2001, 3, 3), D(2001, 3, 6), "c"),
        window(D(2001, 7, 1), D(2001, 7, 2), "d"),  # matches nothing
    ]
    precision, recall, matched = score(candidates, seeds)
    assert (precision, recall, matched) == (0.75, 0.6, 3)


def test_score_empty_seed_list_rejected():
    with pytest.raises(MalformedInputError):
        score([], [])


def test_score_counts_distinct_seeds_once():
    seeds = seeds_at((D(2001, 1, 1), D(2001, 1, 10)))
    candidates = [
        window(D(2001, 1, 1), D(2001, 1, 2), "a"),
        window(D(2001, 1, 5), D(2001, 1, 6), "b"),
    ]
    precision, recall, matched = score(candidates, seeds)
    assert matched == 1 and recall == 1.0 and precision == 0.5


def test_score_matches_allpairs_oracle_random_layouts():
    rng = np.random.default_rng(13)
    base = D(2001, 1, 1)
    for _ in range(200):
        n_seeds = int(rng.integers(1, 8))
        n_cands = int(rng.integers(0, 10))
        seeds = []
        for i in range(n_seeds):
            s = int(rng.integers(0, 300))
            seeds.append(SeedStorm(f"s{i}", base + dt.timedelta(days=s), base + dt.timedelta(days=s + int(rng.integers(0, 10)))))
        cands = []
        for i in range(n_cands):
            s = int(rng.integers(0, 300))
            cands.append(window(base + dt.timedelta(days=s), base + dt.timedelta(days=s + int(rng.integers(0, 10))), f"c{i}"))
        got = score(cands, seeds)
        expect = score_oracle(
            [(c.start, c.end) for c in cands], [(s.start, s.end) for s in seeds]
        )
        assert got == pytest.approx(expect)


@given(st.integers(0, 2**31 - 1))
@settings(max_examples=30, deadline=None)
def test_score_permutation_invariant(seed):
    rng = np.random.default_rng(seed)
    base = D(2001, 1, 1)
    seeds = [
        SeedStorm(f"s{i}", base + dt.timedelta(days=int(rng.integers(0, 100))), base + dt.timedelta(days=int(rng.integers(100, 140))))
        for i in range(4)
    ]
    cands = [
        window(base + dt.timedelta(days=int(rng.integers(0, 120))), base + dt.timedelta(days=int(rng.integers(120, 150))), f"c{i}")
        for i in range(5)
    ]
    forward = score(cands, seeds)
    shuffled = score(list(reversed(cands)), list(reversed(seeds)))
    assert forward == shuffled


# --- sampling -----------------------------------------------------------------


def test_sampling_is_deterministic():
    space = SearchSpace(n_trials=10, rng_seed=99)
    assert sample_hyperparams(space, 3) == sample_hyperparams(space, 3)
    assert sample_hyperparams(space, 3) != sample_hyperparams(space, 4)


def test_samples_stay_in_ranges():
    space = SearchSpace(n_trials=10_000, rng_seed=5)
    for i in range(0, 10_000, 97):
        hp = sample_hyperparams(space, i)
        assert space.interval_width_range[0] <= hp.interval_width <= space.interval_width_range[1]
        lo, hi = space.changepoint_prior_scale_range
        assert lo <= hp.changepoint_prior_scale <= hi
        lo, hi = space.changepoint_range_range
        assert lo <= hp.changepoint_range <= hi


def test_changepoint_prior_scale_is_loguniform():
    space = SearchSpace(n_trials=10_000, rng_seed=7)
    logs = np.array(
        [np.log(sample_hyperparams(space, i).changepoint_prior_scale) for i in range(10_000)]
    )
    lo, hi = np.log(space.changepoint_prior_scale_range[0]), np.log(space.changepoint_prior_scale_range[1])
    stat, pvalue = scipy.stats.kstest(logs, "uniform", args=(lo, hi - lo))
    # critical value at alpha=0.01 for n=10000 is ~1.63/sqrt(n)
    assert stat < 1.63 / np.sqrt(10_000)
    assert pvalue > 0.01


def test_sampled_defaults_untouched():
    hp = sample_hyperparams(SearchSpace(n_trials=2, rng_seed=1), 0)
    assert hp.n_changepoints == HyperParams().n_changepoints
    assert hp.weekly_order == HyperParams().weekly_order


# --- selection -----------------------------------------------------------------


def trial(idx, recall, precision, a=10):
    return TrialResult(
        trial_index=idx,
        hyperparams=HyperParams(),
        candidates=[],
        matched_storms=0,
        n_candidates=a,
        n_seeds=5,
        precision=precision,
        recall=recall,
    )


def test_single_trial_selected():
    t = trial(0, 0.5, 0.5)
    assert select_best([t]) is t


def test_recall_beats_precision():
    best = select_best([trial(0, 0.9, 0.5), trial(1, 0.8, 0.9)])
    assert best.trial_index == 0


def test_precision_breaks_recall_ties():
    best = select_best([trial(0, 0.9, 0.5), trial(1, 0.9, 0.7)])
    assert best.trial_index == 1


def test_fewer_candidates_breaks_full_ties():
    best = select_best([trial(0, 0.9, 0.7, a=12), trial(1, 0.9, 0.7, a=9)])
    assert best.trial_index == 1


def test_lower_index_breaks_remaining_ties():
    best = select_best([trial(0, 0.9, 0.7), trial(1, 0.9, 0.7)])
    assert best.trial_index == 0


def test_failed_trials_excluded():
    bad = trial(0, 1.0, 1.0)
    bad.failed = True
    best = select_best([bad, trial(1, 0.5, 0.5)])
    assert best.trial_index == 1


def test_pareto_front():
    trials = [trial(0, 0.9, 0.5), trial(1, 0.8, 0.9), trial(2, 0.7, 0.4), trial(3, 0.9, 0.5)]
    front = pareto_front(trials)
    assert {t.trial_index for t in front} == {0, 1, 3}
