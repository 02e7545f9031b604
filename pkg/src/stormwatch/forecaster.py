"""Additive daily time-series model: trend + seasonality + holidays + noise.

The trend is piecewise linear with hinge terms at evenly spaced candidate
changepoints, seasonality is a weekly/yearly Fourier expansion, and holidays
enter as per-name indicator columns. Fitting is penalized least squares —
an L1 penalty on changepoint slope adjustments and ridge penalties on the
seasonal and holiday coefficients — solved by a monotone accelerated
proximal-gradient loop, so the objective trace is non-increasing and the fit
is fully deterministic. Uncertainty bands are Gaussian residual quantiles.
"""

from __future__ import annotations

import datetime as dt
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import norm

from .dates import DateSpan
from .errors import InsufficientDataError, MalformedInputError
from .signals import DispersionSeries, SignalKind

MODEL_SCHEMA = "stormwatch.fitted-model/1"

WEEKLY_PERIOD_DAYS = 7.0
YEARLY_PERIOD_DAYS = 365.25


@dataclass(frozen=True)
class HyperParams:
    """Model knobs. The first three are the ones the random search explores."""

    interval_width: float = 0.80
    changepoint_prior_scale: float = 0.05
    changepoint_range: float = 0.80
    n_changepoints: int = 25
    weekly_order: int = 3
    yearly_order: int = 10
    seasonality_prior_scale: float = 10.0
    holiday_prior_scale: float = 10.0

    def __post_init__(self):
        if not 0.0 < self.interval_width < 1.0:
            raise ValueError(f"interval_width must be in (0,1), got {self.interval_width}")
        if not 0.0 < self.changepoint_range <= 1.0:
            raise ValueError(f"changepoint_range must be in (0,1], got {self.changepoint_range}")
        if self.changepoint_prior_scale <= 0:
            raise ValueError("changepoint_prior_scale must be positive")
        if self.seasonality_prior_scale <= 0 or self.holiday_prior_scale <= 0:
            raise ValueError("prior scales must be positive")
        if self.n_changepoints < 0 or self.weekly_order < 0 or self.yearly_order < 0:
            raise ValueError("counts/orders must be non-negative")


@dataclass
class HolidayCalendar:
    entries: list[tuple[dt.date, str]] = field(default_factory=list)

    def __post_init__(self):
        seen = set()
        for day, name in self.entries:
            key = (day, name)
            if key in seen:
                raise MalformedInputError(f"duplicate holiday entry {name!r} on {day}")
            seen.add(key)

    def names(self) -> list[str]:
        return sorted({name for _, name in self.entries})

    def dates_for(self, name: str) -> set[dt.date]:
        return {day for day, n in self.entries if n == name}

    @classmethod
    def empty(cls) -> "HolidayCalendar":
        return cls([])


@dataclass
class Design:
    """Per-day regressor rows plus the column bookkeeping needed to read them back."""

    matrix: np.ndarray
    t: np.ndarray  # time scaled to [0,1] over the anchor span
    changepoints: np.ndarray  # scaled positions, len K
    trend_cols: slice
    delta_cols: slice
    beta_cols: slice
    kappa_cols: slice
    holiday_names: list[str]

    @property
    def n_cols(self) -> int:
        return self.matrix.shape[1]


def changepoint_positions(n_changepoints: int, changepoint_range: float) -> np.ndarray:
    """Evenly spaced candidate changepoints inside [0, changepoint_range], endpoints excluded."""
    if n_changepoints == 0:
        return np.empty(0)
    grid = np.linspace(0.0, changepoint_range, n_changepoints + 2)
    return grid[1:-1]


def build_design(
    span: DateSpan,
    hp: HyperParams,
    holidays: HolidayCalendar | None = None,
    anchor: DateSpan | None = None,
) -> Design:
    """Regressor rows for every day of ``span``.

    ``anchor`` fixes the time scaling (and changepoint placement); it defaults
    to ``span`` itself and is set to the training span when building rows for
    prediction on a different grid.
    """
    holidays = holidays or HolidayCalendar.empty()
    anchor = anchor or span
    denom = max(anchor.n_days - 1, 1)
    offsets = np.array([(d - anchor.start).days for d in span.dates()], dtype=float)
    t = offsets / denom

    cps = changepoint_positions(hp.n_changepoints, hp.changepoint_range)

    cols = [t, np.ones_like(t)]
    for s_j in cps:
        cols.append(np.maximum(0.0, t - s_j))

    n_fourier = 0
    for period, order in ((WEEKLY_PERIOD_DAYS, hp.weekly_order), (YEARLY_PERIOD_DAYS, hp.yearly_order)):
        for n in range(1, order + 1):
            arg = 2.0 * np.pi * n * offsets / period
            cols.append(np.sin(arg))
            cols.append(np.cos(arg))
            n_fourier += 2

    names = holidays.names()
    for name in names:
        days = holidays.dates_for(name)
        ind = np.array([1.0 if d in days else 0.0 for d in span.dates()])
        cols.append(ind)

    k = cps.size
    matrix = np.column_stack(cols)
    return Design(
        matrix=matrix,
        t=t,
        changepoints=cps,
        trend_cols=slice(0, 2),
        delta_cols=slice(2, 2 + k),
        beta_cols=slice(2 + k, 2 + k + n_fourier),
        kappa_cols=slice(2 + k + n_fourier, 2 + k + n_fourier + len(names)),
        holiday_names=names,
    )


@dataclass
class FittedModel:
    k: float
    m: float
    changepoints: np.ndarray
    delta: np.ndarray
    beta: np.ndarray
    kappa: np.ndarray
    sigma_resid: float
    train_span: DateSpan
    hyperparams: HyperParams
    holidays: HolidayCalendar
    y_scale: float
    converged: bool
    n_iter: int
    objective_path: np.ndarray
    kind: SignalKind | None = None

    @property
    def holiday_names(self) -> list[str]:
        return self.holidays.names()

    def coefficients(self) -> np.ndarray:
        return np.concatenate([[self.k, self.m], self.delta, self.beta, self.kappa])


@dataclass
class Forecast:
    start: dt.date
    yhat: np.ndarray
    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        if not (np.all(self.lower <= self.yhat + 1e-12) and np.all(self.yhat <= self.upper + 1e-12)):
            raise ValueError("forecast must satisfy lower <= yhat <= upper")

    @property
    def n_days(self) -> int:
        return int(self.yhat.size)

    @property
    def span(self) -> DateSpan:
        return DateSpan(self.start, self.start + dt.timedelta(days=self.n_days - 1))

    def records(self):
        for i, day in enumerate(self.span.dates()):
            yield day, float(self.yhat[i]), float(self.lower[i]), float(self.upper[i])


def _soft_threshold(x: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    return np.sign(x) * np.maximum(np.abs(x) - thresholds, 0.0)


def _monotone_fista(gram, lin, const, lam_ridge, lam_l1, theta0, tol, max_iter):
    """Minimize 1/2|X theta - y|^2 + 1/2 theta' diag(lam_ridge) theta + |lam_l1 * theta|_1.

    Accelerated proximal gradient with a monotone safeguard: a step that would
    raise the objective keeps the incumbent and restarts the momentum, so the
    recorded objective trace never increases.
    """
    hessian = gram + np.diag(lam_ridge)
    lipschitz = float(np.linalg.eigvalsh(hessian)[-1])
    if lipschitz <= 0:
        lipschitz = 1.0
    step = 1.0 / lipschitz
    thresholds = lam_l1 * step

    def objective(theta):
        quad = 0.5 * float(theta @ (gram @ theta)) - float(lin @ theta) + const
        ridge = 0.5 * float((lam_ridge * theta) @ theta)
        l1 = float(np.abs(lam_l1 * theta).sum())
        return quad + ridge + l1

    x_prev = theta0.copy()
    x_cur = theta0.copy()
    momentum = theta0.copy()
    t_cur = 1.0
    history = [objective(x_cur)]
    converged = False
    n_iter = 0
    for n_iter in range(1, max_iter + 1):
        z = momentum - step * (hessian @ momentum - lin)
        z = _soft_threshold(z, thresholds)
        obj_z = objective(z)
        obj_prev = history[-1]
        if obj_z <= obj_prev:
            x_prev, x_cur = x_cur, z
            improving = obj_prev - obj_z
        else:
            # keep the incumbent, restart the momentum sequence
            x_prev, x_cur = x_cur, x_cur
            t_cur = 1.0
            improving = None
        history.append(min(obj_prev, obj_z))
        t_next = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * t_cur * t_cur))
        momentum = x_cur + ((t_cur - 1.0) / t_next) * (x_cur - x_prev)
        t_cur = t_next
        if improving is not None and improving < tol:
            converged = True
            break
    return x_cur, history, converged, n_iter


def fit(
    series: DispersionSeries,
    hp: HyperParams | None = None,
    holidays: HolidayCalendar | None = None,
    *,
    tol: float = 1e-8,
    max_iter: int = 20_000,
    max_sigma_rounds: int = 25,
) -> FittedModel:
    """Fit the additive model to all present days of a series.

    Minimizes  1/(2 sigma^2) sum (y - yhat)^2   (on the normalized series)
             + (1/changepoint_prior_scale) * |delta|_1
             + 1/(2 seasonality_prior_scale^2) * |beta|^2
             + 1/(2 holiday_prior_scale^2)    * |kappa|^2
    with missing days excluded from the loss and sigma — the noise scale —
    estimated jointly by alternating convex solves (for fixed sigma the
    problem is penalized least squares with the penalties scaled by sigma^2).
    Deterministic: initialization is plain least squares on the trend columns,
    everything else starts at zero.
    """
    hp = hp or HyperParams()
    holidays = holidays or HolidayCalendar.empty()
    span = series.span
    design = build_design(span, hp, holidays)

    present = series.present_mask()
    n_present = int(present.sum())
    min_needed = 2 * (hp.weekly_order + hp.yearly_order) + hp.n_changepoints + 2
    if n_present < min_needed:
        raise InsufficientDataError(
            f"{n_present} present day(s); need >= {min_needed} for this configuration"
        )

    y = series.values[present]
    y_scale = float(np.max(np.abs(y)))
    if y_scale == 0.0:
        y_scale = 1.0
    ys = y / y_scale

    x = design.matrix[present]
    p = design.n_cols

    # Column equilibration; penalties are transformed so the solution is unchanged.
    col_norms = np.linalg.norm(x, axis=0)
    scale = np.where(col_norms > 0, col_norms, 1.0)
    xe = x / scale

    base_l1 = np.zeros(p)
    base_l1[design.delta_cols] = 1.0 / hp.changepoint_prior_scale
    base_l1 /= scale

    base_ridge = np.zeros(p)
    base_ridge[design.beta_cols] = 1.0 / hp.seasonality_prior_scale**2
    base_ridge[design.kappa_cols] = 1.0 / hp.holiday_prior_scale**2
    base_ridge /= scale**2

    gram = xe.T @ xe
    lin = xe.T @ ys
    const = 0.5 * float(ys @ ys)

    # Initialization: least squares on the two trend columns only.
    trend = x[:, design.trend_cols]
    km, *_ = np.linalg.lstsq(trend, ys, rcond=None)
    theta = np.zeros(p)
    theta[0] = km[0] * scale[0]
    theta[1] = km[1] * scale[1]

    def scaled_resid(th):
        return ys - xe @ th

    sigma2 = float(np.mean(scaled_resid(theta) ** 2))
    history: list[float] = []
    converged = False
    total_iter = 0
    for _ in range(max_sigma_rounds):
        theta, history, inner_ok, n_iter = _monotone_fista(
            gram, lin, const, base_ridge * sigma2, base_l1 * sigma2, theta, tol, max_iter
        )
        total_iter += n_iter
        sigma2_new = float(np.mean(scaled_resid(theta) ** 2))
        stable = abs(sigma2_new - sigma2) <= 1e-6 * max(sigma2, 1e-300)
        sigma2 = sigma2_new
        if stable:
            converged = inner_ok
            break

    theta = theta / scale  # back to unit-column space
    coef = theta * y_scale  # back to data units

    yhat_present = (x @ theta) * y_scale
    resid = y - yhat_present
    sigma_resid = float(np.std(resid, ddof=1)) if resid.size >= 2 else 0.0
    n_iter = total_iter

    k_delta = design.delta_cols
    return FittedModel(
        k=float(coef[0]),
        m=float(coef[1]),
        changepoints=design.changepoints.copy(),
        delta=coef[k_delta].copy(),
        beta=coef[design.beta_cols].copy(),
        kappa=coef[design.kappa_cols].copy(),
        sigma_resid=sigma_resid,
        train_span=span,
        hyperparams=hp,
        holidays=holidays,
        y_scale=y_scale,
        converged=converged,
        n_iter=n_iter,
        objective_path=np.asarray(history),
        kind=series.kind,
    )


def predict_components(model: FittedModel, span: DateSpan) -> dict[str, np.ndarray]:
    """Trend, seasonal and holiday contributions evaluated on ``span``."""
    design = build_design(span, model.hyperparams, model.holidays, anchor=model.train_span)
    coef = model.coefficients()
    trend_block = np.concatenate([coef[0:2], model.delta])
    trend_cols = np.column_stack(
        [design.matrix[:, design.trend_cols], design.matrix[:, design.delta_cols]]
    )
    seasonal = design.matrix[:, design.beta_cols] @ model.beta
    holiday = design.matrix[:, design.kappa_cols] @ model.kappa
    return {
        "trend": trend_cols @ trend_block,
        "seasonal": seasonal,
        "holiday": holiday,
    }


def interval_half_width(interval_width: float, sigma_resid: float) -> float:
    z = float(norm.ppf(0.5 * (1.0 + interval_width)))
    return z * sigma_resid


def predict_with_interval(model: FittedModel, span: DateSpan) -> Forecast:
    parts = predict_components(model, span)
    yhat = parts["trend"] + parts["seasonal"] + parts["holiday"]
    half = interval_half_width(model.hyperparams.interval_width, model.sigma_resid)
    return Forecast(start=span.start, yhat=yhat, lower=yhat - half, upper=yhat + half)


def flag_anomalies(
    series: DispersionSeries,
    forecast: Forecast,
    direction: str = "low",
) -> np.ndarray:
    """Boolean day vector: observed value escapes the forecast band.

    Missing days are never flagged. ``direction`` is "low" (below the lower
    bound — coverage convergence), "high", or "both".
    """
    if series.span != forecast.span:
        raise MalformedInputError("series and forecast must share one date axis")
    if direction not in ("low", "high", "both"):
        raise ValueError(f"direction must be low|high|both, got {direction!r}")
    present = series.present_mask()
    below = present & (series.values < forecast.lower)
    above = present & (series.values > forecast.upper)
    if direction == "low":
        return below
    if direction == "high":
        return above
    return below | above


# --- model export / import ---------------------------------------------------


def model_to_dict(model: FittedModel) -> dict:
    return {
        "schema": MODEL_SCHEMA,
        "k": model.k,
        "m": model.m,
        "changepoints": model.changepoints.tolist(),
        "delta": model.delta.tolist(),
        "beta": model.beta.tolist(),
        "kappa": model.kappa.tolist(),
        "sigma_resid": model.sigma_resid,
        "train_span": {"start": model.train_span.start.isoformat(), "end": model.train_span.end.isoformat()},
        "hyperparams": {
            "interval_width": model.hyperparams.interval_width,
            "changepoint_prior_scale": model.hyperparams.changepoint_prior_scale,
            "changepoint_range": model.hyperparams.changepoint_range,
            "n_changepoints": model.hyperparams.n_changepoints,
            "weekly_order": model.hyperparams.weekly_order,
            "yearly_order": model.hyperparams.yearly_order,
            "seasonality_prior_scale": model.hyperparams.seasonality_prior_scale,
            "holiday_prior_scale": model.hyperparams.holiday_prior_scale,
        },
        "holidays": [[day.isoformat(), name] for day, name in model.holidays.entries],
        "y_scale": model.y_scale,
        "converged": model.converged,
        "n_iter": model.n_iter,
        "kind": model.kind.value if model.kind else None,
    }


def model_from_dict(doc: dict) -> FittedModel:
    if doc.get("schema") != MODEL_SCHEMA:
        raise MalformedInputError(f"unsupported model schema {doc.get('schema')!r}")
    hp = HyperParams(**doc["hyperparams"])
    holidays = HolidayCalendar(
        [(dt.date.fromisoformat(day), name) for day, name in doc["holidays"]]
    )
    return FittedModel(
        k=float(doc["k"]),
        m=float(doc["m"]),
        changepoints=np.asarray(doc["changepoints"], dtype=float),
        delta=np.asarray(doc["delta"], dtype=float),
        beta=np.asarray(doc["beta"], dtype=float),
        kappa=np.asarray(doc["kappa"], dtype=float),
        sigma_resid=float(doc["sigma_resid"]),
        train_span=DateSpan(
            dt.date.fromisoformat(doc["train_span"]["start"]),
            dt.date.fromisoformat(doc["train_span"]["end"]),
        ),
        hyperparams=hp,
        holidays=holidays,
        y_scale=float(doc["y_scale"]),
        converged=bool(doc["converged"]),
        n_iter=int(doc["n_iter"]),
        objective_path=np.empty(0),
        kind=SignalKind(doc["kind"]) if doc.get("kind") else None,
    )


def export_model(model: FittedModel) -> str:
    return json.dumps(model_to_dict(model), indent=2)


def import_model(text: str) -> FittedModel:
    return model_from_dict(json.loads(text))
