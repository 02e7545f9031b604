"""Command-line interface.

    stormwatch ingest signals|embeddings|articles|storms ...
    stormwatch signals [--smooth N] [--out FILE] [--summary]
    stormwatch tune --seeds FILE [--trials N] [--rng-seed S] ...
    stormwatch iterate --config FILE [--decisions FILE]
    stormwatch transfer --config FILE [--decisions FILE]
    stormwatch serve [--listen HOST:PORT]
    stormwatch stats storms|compare|correlations ...
    stormwatch export storms|candidates ...

Exit codes: 0 success, 1 usage error, 2 data error. The data directory is
``--data-dir``, else $STORMWATCH_DATA_DIR, else ./stormwatch-data.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import io as formats
from .campaign import (
    Campaign,
    CampaignConfig,
    Decision,
    compare_periods,
    ingest_decisions,
    next_out_period_round_span,
    out_period_round,
    run_iteration,
    summarize,
)
from .dates import DateSpan, parse_date
from .errors import DataFormatError, NotFoundError, StormwatchError
from .forecaster import HyperParams, fit, flag_anomalies, predict_with_interval
from .signals import ALL_KINDS, SignalBundle, SignalKind, anomaly_correlations, build_series, signal_correlations
from .store import Store, load_campaign_file, load_seeds_for, resolve_data_dir
from .tuner import SearchSpace, pareto_front, random_search

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> _Parser:
    parser = _Parser(prog="stormwatch", description="Media-storm detection pipeline")
    parser.add_argument("--data-dir", default=None, help="data directory (or $STORMWATCH_DATA_DIR)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    ingest = sub.add_parser("ingest", help="load data into the store")
    ingest_sub = ingest.add_subparsers(dest="what", required=True, parser_class=_Parser)
    p = ingest_sub.add_parser("signals", help="precomputed per-day signal table")
    p.add_argument("file")
    p = ingest_sub.add_parser("embeddings", help="per-document embedding CSVs, one per kind")
    for kind in ALL_KINDS:
        p.add_argument(f"--{kind.value}", required=True, help=f"{kind.value} embeddings CSV")
    p.add_argument("--span", default=None, help="START:END (defaults to the data extent)")
    p.add_argument("--min-articles", type=int, default=2)
    p = ingest_sub.add_parser("articles", help="headline/snippet article index")
    p.add_argument("file")
    p = ingest_sub.add_parser("storms", help="storm list (label,start,end[,status,iteration])")
    p.add_argument("file")
    p.add_argument("--out", default=None, help="normalized output path (default: <data>/storms.csv)")

    p = sub.add_parser("signals", help="export or summarize the stored dispersion signals")
    p.add_argument("--smooth", type=int, default=0, help="trailing rolling-mean window")
    p.add_argument("--out", default=None, help="write the (smoothed) table to this CSV")
    p.add_argument("--summary", action="store_true", help="print per-signal coverage stats")

    p = sub.add_parser("tune", help="random search scored against a seed storm list")
    p.add_argument("--seeds", required=True)
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--rng-seed", type=int, default=0)
    p.add_argument("--smooth", type=int, default=7)
    p.add_argument("--quorum", type=int, default=3)
    p.add_argument("--min-duration", type=int, default=2)
    p.add_argument("--direction", choices=["low", "high", "both"], default="low")
    p.add_argument("--trial-log", default=None, help="append per-trial JSON records here")
    p.add_argument("--out-candidates", default=None, help="write the best trial's windows here")

    for name, help_text in (
        ("iterate", "run one labeled-period detection round / apply decisions"),
        ("transfer", "run one out-period transfer round / apply decisions"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="campaign config JSON")
        p.add_argument("--decisions", default=None, help="CSV candidate_id,verdict,label,note")

    p = sub.add_parser("serve", help="HTTP API for the review UI")
    p.add_argument("--listen", default="127.0.0.1:8700", help="host:port")
    p.add_argument("--config", default=None, help="campaign config JSON (optional)")
    p.add_argument("--ui", default=None, help="serve built UI assets from this directory at /ui")

    stats = sub.add_parser("stats", help="summary tables and tests")
    stats_sub = stats.add_subparsers(dest="what", required=True, parser_class=_Parser)
    p = stats_sub.add_parser("storms", help="yearly counts and durations for a storm list")
    p.add_argument("file")
    p = stats_sub.add_parser("compare", help="Welch t-test between two storm lists' yearly counts")
    p.add_argument("file_a")
    p.add_argument("file_b")
    p = stats_sub.add_parser("correlations", help="pairwise signal correlations")
    p.add_argument("--smooth", type=int, default=0)
    p.add_argument("--anomalies", action="store_true", help="correlate anomaly flags instead of values")
    p.add_argument("--interval-width", type=float, default=0.95)

    export = sub.add_parser("export", help="write registry contents to CSV")
    export_sub = export.add_subparsers(dest="what", required=True, parser_class=_Parser)
    p = export_sub.add_parser("storms")
    p.add_argument("--campaign", default=None, help="campaign id (default: stored storm list)")
    p.add_argument("--out", required=True)
    p = export_sub.add_parser("candidates")
    p.add_argument("--campaign", required=True)
    p.add_argument("--status", default="pending")
    p.add_argument("--out", required=True)

    return parser


# --- command implementations ----------------------------------------------------


def cmd_ingest(store: Store, args) -> int:
    if args.what == "signals":
        bundle = formats.read_signals(args.file)
        store.save_bundle(bundle)
        print(f"ingested signals {bundle.span.isoformat()} ({bundle.n_days} days)")
    elif args.what == "embeddings":
        series = {}
        excluded_total = 0
        span = None
        if args.span:
            lo, hi = args.span.split(":")
            span = DateSpan(parse_date(lo), parse_date(hi))
        records_by_kind = {}
        for kind in ALL_KINDS:
            records = formats.read_embeddings(getattr(args, kind.value), kind)
            if not records:
                raise DataFormatError(f"no rows in {getattr(args, kind.value)}")
            records_by_kind[kind] = records
        if span is None:
            all_dates = [r.date for records in records_by_kind.values() for r in records]
            span = DateSpan(min(all_dates), max(all_dates))
        for kind, records in records_by_kind.items():
            built, excluded = build_series(records, kind, span, args.min_articles)
            series[kind] = built
            excluded_total += excluded
        store.save_bundle(SignalBundle(series))
        note = f", {excluded_total} record(s) outside span excluded" if excluded_total else ""
        print(f"ingested embeddings over {span.isoformat()}{note}")
    elif args.what == "articles":
        count = store.save_articles(args.file)
        print(f"ingested {count} article(s)")
    elif args.what == "storms":
        records = formats.read_storm_records(args.file)
        out = Path(args.out) if args.out else store.root / "storms.csv"
        store.ensure_layout()
        formats.write_storms(out, records)
        print(f"ingested {len(records)} storm record(s) -> {out}")
    return EXIT_OK


def cmd_signals(store: Store, args) -> int:
    bundle = store.load_bundle()
    if args.smooth > 1:
        bundle = bundle.smooth(args.smooth)
    if args.out:
        formats.write_signals(args.out, bundle)
        print(f"wrote {bundle.n_days} day(s) to {args.out}")
    if args.summary or not args.out:
        print(f"span {bundle.span.isoformat()}  days {bundle.n_days}")
        for kind in ALL_KINDS:
            values = bundle.series[kind].values
            present = int((~np.isnan(values)).sum())
            mean = float(np.nanmean(values)) if present else float("nan")
            print(f"  {kind.value:<8s} present {present:>6d}  missing {bundle.n_days - present:>5d}  mean {mean:.4f}")
    return EXIT_OK


def cmd_tune(store: Store, args) -> int:
    bundle = store.load_bundle()
    if args.smooth > 1:
        bundle = bundle.smooth(args.smooth)
    seeds = formats.read_seed_storms(args.seeds)
    from .detector import DetectorConfig

    space = SearchSpace(n_trials=args.trials, rng_seed=args.rng_seed)
    detector = DetectorConfig(quorum=args.quorum, min_duration=args.min_duration)
    best, trials, _ = random_search(
        bundle, seeds, space, detector=detector, direction=args.direction
    )
    if args.trial_log:
        for trial in trials:
            formats.append_trial_log(args.trial_log, trial)
    if args.out_candidates:
        formats.write_candidates(args.out_candidates, best.candidates)
    print(
        f"best trial {best.trial_index}: recall {best.recall:.3f} precision {best.precision:.3f} "
        f"(D={best.matched_storms} A={best.n_candidates} S={best.n_seeds})"
    )
    print(
        f"  interval_width={best.hyperparams.interval_width:.4f} "
        f"changepoint_prior_scale={best.hyperparams.changepoint_prior_scale:.5f} "
        f"changepoint_range={best.hyperparams.changepoint_range:.3f}"
    )
    front = pareto_front(trials)
    print(f"  pareto front: {[(round(t.recall, 3), round(t.precision, 3)) for t in front]}")
    return EXIT_OK


def _load_decisions_csv(path) -> list[Decision]:
    import csv

    decisions = []
    with Path(path).open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [c.strip().lower() for c in header[:2]] != ["candidate_id", "verdict"]:
            raise DataFormatError("expected header candidate_id,verdict[,label,note]", row=1, path=str(path))
        for row in reader:
            if not row:
                continue
            decisions.append(
                Decision(
                    candidate_id=row[0],
                    verdict=row[1].strip(),
                    label=row[2] if len(row) > 2 else "",
                    note=row[3] if len(row) > 3 else "",
                    expert="cli",
                )
            )
    return decisions


def _prepared_bundle(store: Store, config: CampaignConfig) -> SignalBundle:
    bundle = store.load_bundle()
    if config.smoothing_window > 1:
        bundle = bundle.smooth(config.smoothing_window)
    return bundle


def cmd_iterate(store: Store, args) -> int:
    cfile = load_campaign_file(args.config)
    existing = None
    campaign_id = cfile.campaign_id or "in-period-default"
    try:
        existing, info = store.restore_campaign(campaign_id)
        if info.corrupt_tail_offset is not None:
            print(f"warning: journal tail ignored from byte {info.corrupt_tail_offset}", file=sys.stderr)
    except NotFoundError:
        pass

    if args.decisions:
        if existing is None:
            raise NotFoundError(f"no campaign {campaign_id!r} to apply decisions to")
        campaign = existing
        decisions = _load_decisions_csv(args.decisions)
        report, errors = ingest_decisions(campaign, decisions)
        for cid, message in errors:
            print(f"decision rejected for {cid}: {message}", file=sys.stderr)
        if report.n_pending == 0 and campaign.state.iteration_open:
            report = campaign.close_iteration()
            print(
                f"iteration {report.iteration} closed: {report.n_candidates} candidates, "
                f"{report.n_validated} validated, {report.n_rejected} rejected, {report.n_new} new"
            )
            print(f"finalized storms: {len(campaign.state.finalized)}  converged: {campaign.state.converged}")
        else:
            print(f"{report.n_pending} candidate(s) still pending")
        store.persist_campaign(campaign)
        return EXIT_OK

    bundle = _prepared_bundle(store, cfile.config)
    if existing is None:
        seeds = load_seeds_for(cfile, args.config)
        if not seeds:
            raise DataFormatError("campaign config must name a seeds_file for the first round")
        corpus = cfile.corpus_span or bundle.span
        target = cfile.target_span or corpus
        campaign = Campaign.open(
            campaign_id, "in_period", corpus, target, seeds, cfile.config,
            sink=store.journal_sink(campaign_id),
        )
    else:
        campaign = existing
        if campaign.state.iteration_open and not campaign.state.pending():
            report = campaign.close_iteration()
            print(f"closed iteration {report.iteration} ({report.n_new} new storms)")
    run = run_iteration(campaign, bundle)
    _write_round_outputs(store, campaign, bundle, run)
    print(
        f"iteration {run.iteration}: queued {len(run.queued)} candidate(s), "
        f"{len(run.known)} already-known window(s) skipped"
    )
    print(
        f"best trial recall {run.best_trial.recall:.3f} precision {run.best_trial.precision:.3f}"
    )
    store.persist_campaign(campaign)
    return EXIT_OK


def _write_round_outputs(store: Store, campaign: Campaign, bundle: SignalBundle, run) -> None:
    from .api import candidate_detail_payload

    for trial in run.trials:
        formats.append_trial_log(store.trials_path(campaign.state.campaign_id), trial)
    context = campaign.state.config.context_days
    for window in run.queued:
        payload = candidate_detail_payload(window, bundle, run.artifacts, context)
        store.save_candidate_detail(campaign.state.campaign_id, window.id, payload)


def cmd_transfer(store: Store, args) -> int:
    cfile = load_campaign_file(args.config)
    campaign_id = cfile.campaign_id or "out-period-default"
    existing = None
    try:
        existing, _ = store.restore_campaign(campaign_id)
    except NotFoundError:
        pass

    if args.decisions:
        if existing is None:
            raise NotFoundError(f"no campaign {campaign_id!r} to apply decisions to")
        decisions = _load_decisions_csv(args.decisions)
        report, errors = ingest_decisions(existing, decisions)
        for cid, message in errors:
            print(f"decision rejected for {cid}: {message}", file=sys.stderr)
        if report.n_pending == 0 and existing.state.iteration_open:
            report = existing.close_iteration()
            print(f"round {report.iteration} closed: {report.n_validated} validated, {report.n_rejected} rejected")
        store.persist_campaign(existing)
        return EXIT_OK

    bundle = _prepared_bundle(store, cfile.config)
    if existing is None:
        if cfile.target_span is None:
            raise DataFormatError("out-period config needs a target_span")
        seeds = load_seeds_for(cfile, args.config)
        if not seeds:
            raise DataFormatError("out-period config needs a seeds_file of labeled storms")
        campaign = Campaign.open(
            campaign_id, "out_period", bundle.span, cfile.target_span, seeds, cfile.config,
            sink=store.journal_sink(campaign_id),
        )
    else:
        campaign = existing
        if campaign.state.iteration_open and not campaign.state.pending():
            campaign.close_iteration()
    round_span = (
        next_out_period_round_span(campaign.state) if cfile.rolling else campaign.state.target_span
    )
    if round_span is None:
        print("all rolling rounds are complete")
        store.persist_campaign(campaign)
        return EXIT_OK
    run = out_period_round(campaign, bundle, round_span)
    _write_round_outputs(store, campaign, bundle, run)
    print(
        f"round {run.iteration} ({round_span.isoformat()}): queued {len(run.queued)} candidate(s)"
    )
    store.persist_campaign(campaign)
    return EXIT_OK


def cmd_serve(store: Store, args) -> int:
    import uvicorn

    from .api import create_app

    host, _, port = args.listen.rpartition(":")
    app = create_app(store, static_dir=args.ui)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
    return EXIT_OK


def cmd_stats(store: Store, args) -> int:
    if args.what == "storms":
        records = formats.read_storm_records(args.file)
        validated = [r for r in records if r.status == "validated"]
        rows = summarize(validated)
        print(f"{'year':>6} {'storms':>7} {'avg dur':>8} {'dur std':>8}")
        for row in rows:
            print(
                f"{row.year:>6} {row.n_storms:>7} {row.mean_duration_days:>8.2f} {row.std_duration_days:>8.2f}"
            )
        counts = [row.n_storms for row in rows]
        print(f"total storms {sum(counts)}  annual average {np.mean(counts):.2f}")
    elif args.what == "compare":
        counts = []
        for path in (args.file_a, args.file_b):
            rows = summarize([r for r in formats.read_storm_records(path) if r.status == "validated"])
            counts.append([row.n_storms for row in rows])
        t, df, p = compare_periods(counts[0], counts[1])
        print(f"t({df:.2f}) = {t:.3f}, p = {p:.3f}")
    elif args.what == "correlations":
        bundle = store.load_bundle()
        if args.smooth > 1:
            bundle = bundle.smooth(args.smooth)
        if args.anomalies:
            flags = {}
            hp = HyperParams(interval_width=args.interval_width)
            for kind in ALL_KINDS:
                series = bundle.series[kind]
                model = fit(series, hp)
                flags[kind] = flag_anomalies(series, predict_with_interval(model, series.span))
            matrix = anomaly_correlations(flags)
        else:
            matrix = signal_correlations(bundle)
        names = [k.value for k in ALL_KINDS]
        print(f"{'':>10}" + "".join(f"{n:>10}" for n in names))
        for ka in ALL_KINDS:
            cells = []
            for kb in ALL_KINDS:
                if ka == kb:
                    cells.append(f"{'1.00':>10}")
                else:
                    key = (ka, kb) if (ka, kb) in matrix else (kb, ka)
                    cells.append(f"{matrix[key]:>10.2f}")
            print(f"{ka.value:>10}" + "".join(cells))
    return EXIT_OK


def cmd_export(store: Store, args) -> int:
    if args.what == "storms":
        if args.campaign:
            campaign, _ = store.restore_campaign(args.campaign)
            records = campaign.state.finalized
        else:
            stored = store.root / "storms.csv"
            if not stored.exists():
                raise NotFoundError(f"no stored storm list at {stored}")
            records = formats.read_storm_records(stored)
        formats.write_storms(args.out, records)
        print(f"wrote {len(records)} storm(s) to {args.out}")
    elif args.what == "candidates":
        campaign, _ = store.restore_campaign(args.campaign)
        from .detector import CandidateWindow

        windows = []
        for record in campaign.state.records.values():
            if record.iteration == 0:
                continue
            if args.status not in ("", "all") and record.status != args.status:
                continue
            try:
                detail = store.load_candidate_detail(args.campaign, record.id)
                votes_by_day = detail["candidate"].get("votes_by_day", {})
                votes = {
                    parse_date(day): frozenset(SignalKind(k) for k in kinds)
                    for day, kinds in votes_by_day.items()
                }
            except NotFoundError:
                votes = {}
            windows.append(
                CandidateWindow(id=record.id, start=record.start, end=record.end, votes=votes)
            )
        formats.write_candidates(args.out, windows)
        print(f"wrote {len(windows)} candidate(s) to {args.out}")
    return EXIT_OK


COMMANDS = {
    "ingest": cmd_ingest,
    "signals": cmd_signals,
    "tune": cmd_tune,
    "iterate": cmd_iterate,
    "transfer": cmd_transfer,
    "serve": cmd_serve,
    "stats": cmd_stats,
    "export": cmd_export,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    store = Store(resolve_data_dir(args.data_dir))
    try:
        return COMMANDS[args.command](store, args)
    except (StormwatchError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
