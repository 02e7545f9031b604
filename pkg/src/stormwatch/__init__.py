"""Media-storm detection from daily news dispersion signals.

The pipeline: per-document embeddings are reduced to four daily dispersion
signals (normalized covariance trace); an additive trend/seasonality model
flags days whose dispersion drops below the forecast band; consecutive
majority-flagged days become storm candidates; a random hyperparameter
search picks the detection settings that best recover a seed storm list;
and an expert validation loop turns candidates into a finalized storm
registry, re-seeding detection until convergence.
"""

from .campaign import (
    Campaign,
    CampaignConfig,
    CampaignState,
    Decision,
    IterationReport,
    StormRecord,
    YearlySummary,
    check_convergence,
    compare_periods,
    consolidate,
    ingest_decisions,
    run_in_period,
    run_iteration,
    run_out_period,
    summarize,
)
from .dates import DateSpan, daterange, parse_date
from .detector import (
    AnomalyRun,
    CandidateWindow,
    DetectorConfig,
    detect_candidates,
    extract_runs,
    form_candidates,
    majority_days,
)
from .forecaster import (
    Forecast,
    FittedModel,
    HolidayCalendar,
    HyperParams,
    build_design,
    export_model,
    fit,
    flag_anomalies,
    import_model,
    predict_components,
    predict_with_interval,
)
from .signals import (
    ALL_KINDS,
    DailyDispersion,
    DispersionSeries,
    DocEmbedding,
    MISSING,
    SignalBundle,
    SignalKind,
    anomaly_agreement,
    anomaly_correlations,
    build_series,
    compute_daily_trace,
    is_missing,
    pearson,
    rolling_mean,
    signal_correlations,
)
from .store import Store, resolve_data_dir
from .tuner import (
    SearchSpace,
    SeedStorm,
    TrialResult,
    match,
    pareto_front,
    random_search,
    sample_hyperparams,
    score,
    select_best,
)

__version__ = "0.1.0"
