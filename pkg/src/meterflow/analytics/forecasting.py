"""Short-term consumption forecasting.

Three methods share one interface: the fitted periodic auto-regression
rolled forward day by day, additive Holt-Winters smoothing, and the
per-hour-of-day training mean ("averaging"). Forecasts are produced hourly
and summed into the next `horizon` complete calendar buckets.

The auto-regressive method needs future temperatures; when none are given
it reuses the last observed day's temperatures and flags a warning.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, ValidationError
from ..model import Granularity, MeterSeries
from ..numerics.smoothing import holt_winters_fit, holt_winters_forecast
from ..timeutil import HOURS_PER_DAY
from .exogenous import exogenous_matrix
from .parx import ParxModel, day_matrix, parx_fit
from .threeline import ThreeLineModel, three_line_predict

FORECAST_METHODS = ("parx", "holt_winters", "averaging")

TEMP_FALLBACK_WARNING = "no temperature forecast supplied; reused the last observed day"


@dataclass(frozen=True)
class ForecastResult:
    method: str
    granularity: Granularity
    start_hour: int  # start of the first forecast bucket
    values: np.ndarray  # kWh per bucket
    warnings: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        self.values.setflags(write=False)


def forecast_series(
    series: MeterSeries,
    method: str,
    granularity: Granularity = Granularity.HOURLY,
    horizon: int = 24,
    future_temps: np.ndarray | None = None,
    parx_model: ParxModel | None = None,
    three_line_model: ThreeLineModel | None = None,
    order_p: int = 3,
) -> ForecastResult:
    """Forecast the next `horizon` calendar buckets after the series ends."""
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    if method not in FORECAST_METHODS and method != "three_line":
        raise ValidationError(
            f"unknown forecasting method {method!r}; expected one of {FORECAST_METHODS}"
        )

    end_hour = series.end_hour
    first_bucket = granularity.bucket_start(end_hour)
    if first_bucket < end_hour:
        first_bucket = granularity.next_bucket(first_bucket)
    edges = [first_bucket]
    for _ in range(horizon):
        edges.append(granularity.next_bucket(edges[-1]))
    n_hours = edges[-1] - end_hour
    warnings: tuple[str, ...] = ()

    if method == "averaging":
        hourly = _averaging_forecast(series, end_hour, n_hours)
    elif method == "holt_winters":
        model = holt_winters_fit(series.consumption, season_length=HOURS_PER_DAY)
        hourly = np.maximum(holt_winters_forecast(model, n_hours), 0.0)
    elif method == "three_line":
        hourly, warnings = _three_line_forecast(
            series, three_line_model, end_hour, n_hours, future_temps
        )
    else:
        hourly, warnings = _parx_forecast(
            series, parx_model, order_p, end_hour, n_hours, future_temps
        )

    values = np.empty(horizon)
    for i in range(horizon):
        a = edges[i] - end_hour
        b = edges[i + 1] - end_hour
        values[i] = hourly[a:b].sum()
    return ForecastResult(
        method=method,
        granularity=granularity,
        start_hour=first_bucket,
        values=values,
        warnings=warnings,
    )


def _averaging_forecast(series: MeterSeries, end_hour: int, n_hours: int) -> np.ndarray:
    _, cons, _, valid = day_matrix(series)
    counts = valid.sum(axis=0)
    if (counts == 0).any():
        raise InsufficientDataError("some hours of the day have no training values")
    means = np.where(valid, cons, 0.0).sum(axis=0) / counts
    hours = np.arange(end_hour, end_hour + n_hours)
    return means[hours % HOURS_PER_DAY]


def _future_temperatures(
    series: MeterSeries, end_hour: int, n_hours: int, future_temps: np.ndarray | None
) -> tuple[np.ndarray, tuple[str, ...]]:
    if future_temps is not None:
        temps = np.asarray(future_temps, dtype=np.float64)
        if temps.size < n_hours:
            raise ValidationError(
                f"future_temps must cover {n_hours} hours, got {temps.size}"
            )
        return temps[:n_hours], ()
    last_day = np.empty(HOURS_PER_DAY)
    temp = series.temperature
    for s in range(HOURS_PER_DAY):
        offsets = np.arange(len(series) - 1, -1, -1)
        match = offsets[((series.start_hour + offsets) % HOURS_PER_DAY == s)]
        picked = np.nan
        for idx in match:
            if np.isfinite(temp[idx]):
                picked = temp[idx]
                break
        last_day[s] = picked
    hours = np.arange(end_hour, end_hour + n_hours)
    return last_day[hours % HOURS_PER_DAY], (TEMP_FALLBACK_WARNING,)


def _parx_forecast(
    series: MeterSeries,
    model: ParxModel | None,
    order_p: int,
    end_hour: int,
    n_hours: int,
    future_temps: np.ndarray | None,
) -> tuple[np.ndarray, tuple[str, ...]]:
    if model is None:
        model = parx_fit(series, order_p=order_p)
    temps, warnings = _future_temperatures(series, end_hour, n_hours, future_temps)
    drivers = exogenous_matrix(temps)

    # ring of the last `order` days of (observed then predicted) values
    p = model.order
    history = np.empty((p, HOURS_PER_DAY))
    cons = series.consumption
    for s in range(HOURS_PER_DAY):
        for lag in range(1, p + 1):
            idx = (end_hour - lag * HOURS_PER_DAY + s) - series.start_hour
            if idx < 0 or idx >= len(series):
                raise InsufficientDataError("series too short for the requested lags")
            history[lag - 1, s] = cons[idx]

    out = np.empty(n_hours)
    for i in range(n_hours):
        hour = end_hour + i
        s = hour % HOURS_PER_DAY
        value = (
            model.intercepts[s]
            + float(model.ar[s] @ history[:, s])
            + float(model.exo[s] @ drivers[i])
        )
        value = max(value, 0.0)
        out[i] = value
        # once a day boundary passes, shift that day into the history ring
        if s == HOURS_PER_DAY - 1:
            day_start = i - HOURS_PER_DAY + 1
            if day_start >= 0:
                new_day = out[day_start : i + 1]
            else:
                # mix of observed tail and forecast head for a partial first day
                new_day = np.empty(HOURS_PER_DAY)
                for h in range(HOURS_PER_DAY):
                    j = day_start + h
                    if j >= 0:
                        new_day[h] = out[j]
                    else:
                        new_day[h] = cons[end_hour + j - series.start_hour]
            history = np.vstack([new_day, history[:-1]])
    return out, warnings


def _three_line_forecast(
    series: MeterSeries,
    model: ThreeLineModel | None,
    end_hour: int,
    n_hours: int,
    future_temps: np.ndarray | None,
) -> tuple[np.ndarray, tuple[str, ...]]:
    from .threeline import three_line_fit

    if model is None:
        model = three_line_fit(series)
    temps, warnings = _future_temperatures(series, end_hour, n_hours, future_temps)
    out = np.array([three_line_predict(model, float(t)) for t in temps])
    return out, warnings
