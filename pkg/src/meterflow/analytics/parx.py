"""Periodic auto-regression with exogenous temperature drivers.

One regression per hour-of-day "season": the consumption at hour s of day n
is modeled as an intercept plus auto-regression on the same hour of the
previous p days plus the three temperature drivers. The printed model form
is intercept-free but fitted outputs carry one, so a per-season intercept is
included here. Fitting is plain least squares per season; identically-zero
driver columns are dropped (their coefficients pinned to 0), and a season
whose remaining design is rank deficient raises unless the data is fitted
exactly anyway (e.g. a constant series), in which case the minimum-norm
solution is kept and diagnostics are omitted for that season.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import timeutil
from ..errors import DependencyError, InsufficientDataError, SingularFitError, ValidationError
from ..model import MeterSeries
from ..numerics.ols import OlsFit, ols_fit
from .exogenous import ExogenousTemps, exogenous_matrix

DEFAULT_ORDER = 3
MIN_EXTRA_DAYS = 14  # training span must cover order_p + this many days
HOURS = timeutil.HOURS_PER_DAY

_RESIDUAL_TOL = 1e-8  # relative; rank-deficient fits below this are exact


@dataclass(frozen=True)
class ParxModel:
    meter_id: str
    order: int
    intercepts: np.ndarray  # (24,)
    ar: np.ndarray  # (24, order), lag 1 first
    exo: np.ndarray  # (24, 3): cooling, heating, overheating
    fitted: np.ndarray  # (24,) bool
    diagnostics: tuple[OlsFit | None, ...]
    train_start_hour: int
    train_days: int

    def __post_init__(self) -> None:
        for arr in (self.intercepts, self.ar, self.exo, self.fitted):
            arr.setflags(write=False)

    def season_fitted(self, season: int) -> bool:
        return bool(self.fitted[season])


@dataclass(frozen=True)
class DisaggregationResult:
    """Hourly split of observed consumption into a temperature-dependent part
    (driver response under the fitted coefficients) and the remainder."""

    start_hour: int
    temp_independent: np.ndarray
    temp_dependent: np.ndarray
    available: np.ndarray  # False where the hour's season is unfitted or data missing
    clamped: np.ndarray  # True where the independent part was clipped at 0

    def __post_init__(self) -> None:
        for arr in (self.temp_independent, self.temp_dependent, self.available, self.clamped):
            arr.setflags(write=False)


def day_matrix(series: MeterSeries) -> tuple[int, np.ndarray, np.ndarray, np.ndarray]:
    """Trim a series to whole UTC days and reshape to (days, 24) matrices.

    Returns (first_day, consumption, temperature, valid) where valid is
    False for gap-imputed or non-finite entries.
    """
    start = series.start_hour
    lead = (-start) % HOURS
    n_full = (len(series) - lead) // HOURS
    if n_full < 1:
        raise InsufficientDataError("series does not cover one full day")
    a = lead
    b = lead + n_full * HOURS
    cons = series.consumption[a:b].reshape(n_full, HOURS)
    temp = series.temperature[a:b].reshape(n_full, HOURS)
    valid = ~series.gap_mask[a:b].reshape(n_full, HOURS)
    valid = valid & np.isfinite(cons)
    first_day = (start + lead) // HOURS
    return first_day, cons, temp, valid


def parx_fit(
    series: MeterSeries,
    order_p: int = DEFAULT_ORDER,
    diagnostics: bool = True,
    strict: bool = True,
) -> ParxModel:
    """Fit the per-season regressions over a contiguous hourly series.

    Rows touching gap-imputed hours are excluded. With strict=True a
    rank-deficient season aborts the fit; otherwise that season is left
    unfitted and callers see it flagged.
    """
    if order_p < 1:
        raise ValidationError("order_p must be >= 1")
    first_day, cons, temp, valid = day_matrix(series)
    n_days = cons.shape[0]
    if n_days < order_p + MIN_EXTRA_DAYS:
        raise InsufficientDataError(
            f"need at least {order_p + MIN_EXTRA_DAYS} days to fit order {order_p}, got {n_days}"
        )

    drivers = exogenous_matrix(temp.reshape(-1)).reshape(n_days, HOURS, 3)
    temp_ok = np.isfinite(temp)

    intercepts = np.zeros(HOURS)
    ar = np.zeros((HOURS, order_p))
    exo = np.zeros((HOURS, 3))
    fitted = np.zeros(HOURS, dtype=bool)
    diags: list[OlsFit | None] = [None] * HOURS

    days = np.arange(order_p, n_days)
    for s in range(HOURS):
        rows_ok = valid[days, s] & temp_ok[days, s]
        for lag in range(1, order_p + 1):
            rows_ok &= valid[days - lag, s]
        use = days[rows_ok]
        if use.size <= order_p + 4:
            message = f"season {s}: only {use.size} usable training rows"
            if strict:
                raise InsufficientDataError(message)
            continue
        lags = np.column_stack([cons[use - lag, s] for lag in range(1, order_p + 1)])
        design = np.column_stack([lags, drivers[use, s, :]])
        response = cons[use, s]

        keep = ~np.all(design == 0.0, axis=0)
        kept_design = design[:, keep]
        coeffs, season_diag, ok = _season_solve(kept_design, response, s, strict, diagnostics)
        if not ok:
            continue
        full = np.zeros(order_p + 3)
        full[keep] = coeffs[1:]
        intercepts[s] = coeffs[0]
        ar[s] = full[:order_p]
        exo[s] = full[order_p:]
        fitted[s] = True
        diags[s] = season_diag

    return ParxModel(
        meter_id=series.meter_id,
        order=order_p,
        intercepts=intercepts,
        ar=ar,
        exo=exo,
        fitted=fitted,
        diagnostics=tuple(diags),
        train_start_hour=int(first_day) * HOURS,
        train_days=n_days,
    )


def _season_solve(design, response, season, strict, want_diagnostics):
    n, m = design.shape
    augmented = np.column_stack([np.ones(n), design])
    coeffs, _, rank, _ = np.linalg.lstsq(augmented, response, rcond=None)
    if rank < m + 1:
        residual = response - augmented @ coeffs
        scale = max(float(np.abs(response).max()), 1.0)
        if float(np.abs(residual).max()) > _RESIDUAL_TOL * scale:
            if strict:
                raise SingularFitError(
                    f"season {season}: design matrix is rank deficient", season=season
                )
            return None, None, False
        # degenerate but exactly fitted (e.g. constant consumption):
        # keep the minimum-norm solution, no diagnostics
        return coeffs, None, True
    diag = ols_fit(design, response) if want_diagnostics else None
    return coeffs, diag, True


def parx_predict(
    model: ParxModel,
    history: np.ndarray,
    exo: ExogenousTemps,
    season: int,
) -> float:
    """One-hour prediction from the previous p days' values at this season.

    history[0] is yesterday's value. Predictions are clamped at 0 kWh.
    """
    hist = np.asarray(history, dtype=np.float64)
    if hist.shape != (model.order,):
        raise ValidationError(f"history must have length {model.order}, got {hist.shape}")
    if not 0 <= season < HOURS:
        raise ValidationError(f"season must be in 0..23, got {season}")
    if not model.season_fitted(season):
        raise DependencyError(f"season {season} has no fitted model", stage="parx_fit")
    value = (
        model.intercepts[season]
        + float(model.ar[season] @ hist)
        + float(model.exo[season] @ exo.as_array())
    )
    return max(value, 0.0)


def predict_day(model: ParxModel, history: np.ndarray, temperatures: np.ndarray) -> np.ndarray:
    """Vectorized 24-hour prediction.

    history is (order, 24) with row 0 = yesterday; temperatures has one value
    per hour. Unfitted seasons yield NaN.
    """
    hist = np.asarray(history, dtype=np.float64)
    if hist.shape != (model.order, HOURS):
        raise ValidationError(f"history must be ({model.order}, 24), got {hist.shape}")
    temps = np.asarray(temperatures, dtype=np.float64)
    if temps.shape != (HOURS,):
        raise ValidationError(f"temperatures must have 24 values, got {temps.shape}")
    drivers = exogenous_matrix(temps)
    values = (
        model.intercepts
        + np.einsum("sp,ps->s", model.ar, hist)
        + np.einsum("sk,sk->s", model.exo, drivers)
    )
    values = np.maximum(values, 0.0)
    values[~model.fitted] = np.nan
    return values


def disaggregate(
    model: ParxModel,
    series: MeterSeries,
    store=None,
) -> DisaggregationResult:
    """Split observed consumption into temperature-dependent and
    temperature-independent parts.

    The dependent part is the fitted driver response for each hour; the
    independent part is the observation minus that, clamped at 0. Hours in
    unfitted seasons (or without data) are flagged unavailable. When a store
    is passed, the independent load is written back to it.
    """
    first_day, cons, temp, valid = day_matrix(series)
    n_days = cons.shape[0]
    drivers = exogenous_matrix(temp.reshape(-1)).reshape(n_days, HOURS, 3)
    dependent = np.einsum("sk,dsk->ds", model.exo, drivers)
    independent = cons - dependent
    clamped = independent < 0.0
    independent = np.maximum(independent, 0.0)

    available = valid & np.isfinite(temp) & model.fitted[None, :]
    dependent = np.where(available, dependent, np.nan)
    independent = np.where(available, independent, np.nan)

    result = DisaggregationResult(
        start_hour=int(first_day) * HOURS,
        temp_independent=independent.reshape(-1),
        temp_dependent=dependent.reshape(-1),
        available=available.reshape(-1),
        clamped=(clamped & available).reshape(-1),
    )
    if store is not None:
        store.update_temp_independent(series.meter_id, result.start_hour, result.temp_independent)
    return result
