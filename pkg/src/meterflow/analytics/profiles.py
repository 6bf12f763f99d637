"""Daily load profiles and consumption-variability histograms."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Collection

import numpy as np

from .. import timeutil
from ..errors import InsufficientDataError
from ..model import MeterSeries
from ..numerics.histogram import Histogram, equi_width_histogram
from ..timeutil import HOURS_PER_DAY

MIN_PROFILE_DAYS = 7


@dataclass(frozen=True)
class DailyProfile:
    """Average temperature-independent consumption at each hour of the day,
    split into weekday and weekend (plus holiday) profiles. A class with no
    observed days is left unavailable (None)."""

    meter_id: str
    weekday_profile: np.ndarray | None
    weekend_profile: np.ndarray | None
    n_weekdays: int
    n_weekend_days: int

    def __post_init__(self) -> None:
        for arr in (self.weekday_profile, self.weekend_profile):
            if arr is not None:
                arr.setflags(write=False)


def daily_profile(
    meter_id: str,
    start_hour: int,
    temp_independent: np.ndarray,
    holidays: Collection[str] = (),
) -> DailyProfile:
    """Per-hour means of the temperature-independent load by day class.

    holidays is a set of YYYY-MM-DD dates treated as weekend days. NaN
    entries (unavailable hours) are ignored.
    """
    values = np.asarray(temp_independent, dtype=np.float64)
    lead = (-start_hour) % HOURS_PER_DAY
    n_days = (values.size - lead) // HOURS_PER_DAY
    if n_days < MIN_PROFILE_DAYS:
        raise InsufficientDataError(
            f"need at least {MIN_PROFILE_DAYS} full days of disaggregated data, got {n_days}"
        )
    matrix = values[lead : lead + n_days * HOURS_PER_DAY].reshape(n_days, HOURS_PER_DAY)
    first_day = (start_hour + lead) // HOURS_PER_DAY

    weekend = np.zeros(n_days, dtype=bool)
    for d in range(n_days):
        day = first_day + d
        weekend[d] = timeutil.is_weekend_day(day) or timeutil.format_day(day) in holidays

    return DailyProfile(
        meter_id=meter_id,
        weekday_profile=_class_means(matrix[~weekend]),
        weekend_profile=_class_means(matrix[weekend]),
        n_weekdays=int((~weekend).sum()),
        n_weekend_days=int(weekend.sum()),
    )


def _class_means(matrix: np.ndarray) -> np.ndarray | None:
    if matrix.shape[0] == 0:
        return None
    with np.errstate(invalid="ignore"):
        counts = np.isfinite(matrix).sum(axis=0)
        sums = np.nansum(matrix, axis=0)
    if (counts == 0).all():
        return None
    means = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    return means


def variability_histogram(series: MeterSeries, bucket_count: int = 10) -> Histogram:
    """Equi-width histogram over the stored (non-imputed) hourly consumption."""
    values = series.consumption[~series.gap_mask]
    return equi_width_histogram(values, bucket_count)
