"""Daily anomaly detection from prediction-distance features.

For each day the Euclidean distance between the 24 observed hourly values
and the auto-regressive prediction is one feature point. A Gaussian is
fitted over the training days' distances and then frozen; a new day is
flagged when its density falls below the configured threshold. A collapsed
(zero-variance) model conservatively flags any distance away from the mean.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .. import timeutil
from ..errors import InsufficientDataError, ValidationError
from ..model import MeterSeries
from ..numerics.gaussian import GaussianModel, gaussian_density, gaussian_fit
from ..timeutil import HOURS_PER_DAY
from .parx import ParxModel, day_matrix, parx_fit, predict_day

MIN_TRAIN_DISTANCES = 14
DEFAULT_TRAIN_DAYS = 182  # half a year
DEFAULT_EPSILON = 0.01


@dataclass(frozen=True)
class AnomalyDetector:
    meter_id: str
    parx: ParxModel
    gaussian: GaussianModel
    epsilon: float
    train_start_hour: int
    train_days: int

    def __post_init__(self) -> None:
        if not 0.0 < self.epsilon < 1.0:
            raise ValidationError(f"epsilon must be in (0, 1), got {self.epsilon}")

    def with_epsilon(self, epsilon: float) -> "AnomalyDetector":
        return AnomalyDetector(
            meter_id=self.meter_id,
            parx=self.parx,
            gaussian=self.gaussian,
            epsilon=epsilon,
            train_start_hour=self.train_start_hour,
            train_days=self.train_days,
        )


@dataclass(frozen=True)
class AnomalyReport:
    meter_id: str
    day: int  # epoch day
    distance: float
    density: float | None  # None when the model is degenerate
    flagged: bool
    epsilon: float
    partial: bool = False
    degenerate: bool = False

    @property
    def date(self) -> str:
        return timeutil.format_day(self.day)

    def to_doc(self) -> dict:
        return {
            "meter_id": self.meter_id,
            "day": self.date,
            "distance": self.distance,
            "density": self.density,
            "flagged": self.flagged,
            "epsilon": self.epsilon,
            "partial": self.partial,
            "degenerate": self.degenerate,
        }


def daily_distance(actual, predicted) -> float:
    """Euclidean distance between two 24-hour vectors."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != (HOURS_PER_DAY,) or p.shape != (HOURS_PER_DAY,):
        raise ValidationError("daily_distance expects two 24-value vectors")
    return float(np.sqrt(((a - p) ** 2).sum()))


def training_distances(model: ParxModel, series: MeterSeries) -> np.ndarray:
    """One-day-ahead in-sample distances: each day predicted from the actual
    values of its preceding p days. Days with missing hours are skipped."""
    _, cons, temp, valid = day_matrix(series)
    n_days = cons.shape[0]
    p = model.order
    distances = []
    full = valid.all(axis=1) & np.isfinite(temp).all(axis=1) & model.fitted.all()
    for d in range(p, n_days):
        if not full[d] or not valid[d - p : d].all():
            continue
        history = cons[d - p : d][::-1]
        predicted = predict_day(model, history, temp[d])
        distances.append(daily_distance(cons[d], predicted))
    return np.asarray(distances)


def train_detector(
    series: MeterSeries,
    epsilon: float = DEFAULT_EPSILON,
    train_days: int = DEFAULT_TRAIN_DAYS,
    order_p: int = 3,
    diagnostics: bool = True,
) -> AnomalyDetector:
    """Fit the auto-regression and the distance Gaussian over a training span.

    The series is truncated to the first `train_days` full days. The fitted
    model is frozen: subsequent detection never refits it.
    """
    first_day, cons, _, _ = day_matrix(series)
    n_days = cons.shape[0]
    span_days = min(train_days, n_days)
    span = series.slice_hours(
        int(first_day) * HOURS_PER_DAY,
        (int(first_day) + span_days) * HOURS_PER_DAY,
    )
    model = parx_fit(span, order_p=order_p, diagnostics=diagnostics)
    distances = training_distances(model, span)
    if distances.size < MIN_TRAIN_DISTANCES:
        raise InsufficientDataError(
            f"need at least {MIN_TRAIN_DISTANCES} training distances, got {distances.size}"
        )
    gaussian = gaussian_fit(distances)
    if 0.0 < gaussian.sigma2 <= (1e-9 * max(gaussian.mu, 1.0)) ** 2:
        # distances are floating-point residue of an exact fit; a Gaussian
        # this narrow is meaningless, so collapse to the degenerate rule
        gaussian = GaussianModel(mu=gaussian.mu, sigma2=0.0, n_train=gaussian.n_train)
    return AnomalyDetector(
        meter_id=series.meter_id,
        parx=model,
        gaussian=gaussian,
        epsilon=epsilon,
        train_start_hour=span.start_hour,
        train_days=span_days,
    )


def detect_day(
    detector: AnomalyDetector,
    day: int,
    actual: np.ndarray,
    history: np.ndarray,
    temperatures: np.ndarray,
    epsilon: float | None = None,
) -> AnomalyReport:
    """Score one day.

    actual may contain NaN for missing hours: the report is then marked
    partial and flags only if the distance over the available hours alone
    already exceeds the threshold on the high side.
    """
    eps = detector.epsilon if epsilon is None else epsilon
    if not 0.0 < eps < 1.0:
        raise ValidationError(f"epsilon must be in (0, 1), got {eps}")
    values = np.asarray(actual, dtype=np.float64)
    if values.shape != (HOURS_PER_DAY,):
        raise ValidationError("actual must have 24 values")
    predicted = predict_day(detector.parx, np.asarray(history, dtype=np.float64), temperatures)

    present = np.isfinite(values) & np.isfinite(predicted)
    partial = not present.all()
    if not present.any():
        raise InsufficientDataError(f"day {timeutil.format_day(day)} has no usable hours")
    diff = values[present] - predicted[present]
    distance = float(np.sqrt((diff**2).sum()))

    gaussian = detector.gaussian
    if gaussian.degenerate:
        if partial:
            flagged = distance > gaussian.mu
        else:
            flagged = distance != gaussian.mu
        return AnomalyReport(
            meter_id=detector.meter_id,
            day=day,
            distance=distance,
            density=None,
            flagged=flagged,
            epsilon=eps,
            partial=partial,
            degenerate=True,
        )

    density = gaussian_density(gaussian, distance)
    if partial:
        flagged = density < eps and distance > gaussian.mu
    else:
        flagged = density < eps
    return AnomalyReport(
        meter_id=detector.meter_id,
        day=day,
        distance=distance,
        density=density,
        flagged=flagged,
        epsilon=eps,
        partial=partial,
    )


def detect_range(
    detector: AnomalyDetector,
    series: MeterSeries,
    epsilon: float | None = None,
) -> list[AnomalyReport]:
    """Batch detection over every full day with enough preceding history."""
    first_day, cons, temp, valid = day_matrix(series)
    p = detector.parx.order
    reports = []
    for d in range(p, cons.shape[0]):
        day_values = np.where(valid[d], cons[d], np.nan)
        if not np.isfinite(day_values).any():
            continue
        history = cons[d - p : d][::-1]
        reports.append(
            detect_day(
                detector,
                day=int(first_day) + d,
                actual=day_values,
                history=history,
                temperatures=temp[d],
                epsilon=epsilon,
            )
        )
    return reports
