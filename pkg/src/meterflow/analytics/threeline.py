"""Thermal-sensitivity model: piecewise percentile regression lines.

Observations are binned per degree Celsius; the 90th and 10th nearest-rank
percentile of each bin form two point sets, and each set gets straight-line
fits over three temperature ranges with breakpoints fixed at 16 and 20 C
(matching the heating/cooling driver regimes). Adjacent pieces are then
connected: the junction value becomes the average of both pieces there, the
outer pieces keep their slopes and re-anchor, and the middle piece is drawn
through both junction points.

The cooling gradient is the high-range slope of the 90th-percentile family;
the heating gradient is the consumption increase per degree below 16 C on
the same family; the base load is the minimum of the 10th-percentile pieces
over the observed temperature range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError
from ..model import MeterSeries
from ..numerics.histogram import percentile
from .exogenous import COOLING_BREAK, HEATING_BREAK

MIN_BINS_PER_RANGE = 3


@dataclass(frozen=True)
class LinePiece:
    slope: float
    intercept: float

    def value(self, temperature: float) -> float:
        return self.slope * temperature + self.intercept


@dataclass(frozen=True)
class PercentileLines:
    low: LinePiece | None  # T <= 16
    mid: LinePiece | None  # 16..20
    high: LinePiece | None  # T >= 20

    def pieces(self) -> list[tuple[str, LinePiece | None]]:
        return [("low", self.low), ("mid", self.mid), ("high", self.high)]

    def value(self, temperature: float) -> float | None:
        """Value at a temperature, falling back to the nearest available piece."""
        if temperature <= HEATING_BREAK:
            order = (self.low, self.mid, self.high)
        elif temperature >= COOLING_BREAK:
            order = (self.high, self.mid, self.low)
        else:
            order = (self.mid, self.low, self.high)
        for piece in order:
            if piece is not None:
                return piece.value(temperature)
        return None


@dataclass(frozen=True)
class ThreeLineModel:
    meter_id: str
    p90: PercentileLines
    p10: PercentileLines
    cooling_gradient: float | None
    heating_gradient: float | None
    base_load: float | None
    temp_lo: float
    temp_hi: float
    n_obs: int
    train_mean: float
    train_start_hour: int = 0
    train_hours: int = 0


def three_line_fit(series: MeterSeries) -> ThreeLineModel:
    mask = ~series.gap_mask & np.isfinite(series.temperature) & np.isfinite(series.consumption)
    temps = series.temperature[mask]
    values = series.consumption[mask]
    if temps.size == 0:
        raise InsufficientDataError("no observations with both temperature and consumption")

    bins = np.floor(temps).astype(np.int64)
    centers = []
    p90_points = []
    p10_points = []
    for b in np.unique(bins):
        in_bin = values[bins == b]
        centers.append(b + 0.5)
        p90_points.append(percentile(in_bin, 90))
        p10_points.append(percentile(in_bin, 10))
    centers = np.asarray(centers)
    p90_points = np.asarray(p90_points)
    p10_points = np.asarray(p10_points)

    p90_raw = _fit_family(centers, p90_points)
    p10_raw = _fit_family(centers, p10_points)
    p90 = _connect(p90_raw)
    p10 = _connect(p10_raw)

    cooling = p90.high.slope if p90.high is not None else None
    heating = -p90.low.slope if p90.low is not None else None
    temp_lo = float(centers.min())
    temp_hi = float(centers.max())
    # Base load comes from the raw pieces over their own bin-center support:
    # extrapolating a percentile line half a bin into the junction biases the
    # minimum downward by about slope/4 under per-degree binning.
    base = _base_load(p10_raw, centers)
    return ThreeLineModel(
        meter_id=series.meter_id,
        p90=p90,
        p10=p10,
        cooling_gradient=cooling,
        heating_gradient=heating,
        base_load=base,
        temp_lo=temp_lo,
        temp_hi=temp_hi,
        n_obs=int(temps.size),
        train_mean=float(values.mean()),
        train_start_hour=series.start_hour,
        train_hours=len(series),
    )


def three_line_predict(model: ThreeLineModel, temperature: float) -> float:
    """Mid-band prediction: the mean of both percentile families at T.

    Used as the temperature-only forecasting baseline; falls back to the
    training mean if neither family has a usable piece.
    """
    candidates = [
        v
        for v in (model.p90.value(temperature), model.p10.value(temperature))
        if v is not None
    ]
    if not candidates:
        return max(model.train_mean, 0.0)
    return max(sum(candidates) / len(candidates), 0.0)


def _fit_family(centers: np.ndarray, points: np.ndarray) -> PercentileLines:
    low = centers < HEATING_BREAK
    mid = (centers > HEATING_BREAK) & (centers < COOLING_BREAK)
    high = centers > COOLING_BREAK
    return PercentileLines(
        low=_fit_line(centers[low], points[low]),
        mid=_fit_line(centers[mid], points[mid]),
        high=_fit_line(centers[high], points[high]),
    )


def _fit_line(x: np.ndarray, y: np.ndarray) -> LinePiece | None:
    if x.size < MIN_BINS_PER_RANGE:
        return None
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(((x - x_mean) ** 2).sum())
    if sxx == 0.0:
        return None
    slope = float(((x - x_mean) * (y - y_mean)).sum()) / sxx
    return LinePiece(slope=slope, intercept=float(y_mean - slope * x_mean))


def _connect(lines: PercentileLines) -> PercentileLines:
    low, mid, high = lines.low, lines.mid, lines.high
    if low is not None and mid is not None and high is not None:
        v16 = 0.5 * (low.value(HEATING_BREAK) + mid.value(HEATING_BREAK))
        v20 = 0.5 * (mid.value(COOLING_BREAK) + high.value(COOLING_BREAK))
        slope_mid = (v20 - v16) / (COOLING_BREAK - HEATING_BREAK)
        return PercentileLines(
            low=LinePiece(low.slope, v16 - low.slope * HEATING_BREAK),
            mid=LinePiece(slope_mid, v16 - slope_mid * HEATING_BREAK),
            high=LinePiece(high.slope, v20 - high.slope * COOLING_BREAK),
        )
    if low is not None and mid is not None:
        v16 = 0.5 * (low.value(HEATING_BREAK) + mid.value(HEATING_BREAK))
        return PercentileLines(
            low=LinePiece(low.slope, v16 - low.slope * HEATING_BREAK),
            mid=LinePiece(mid.slope, v16 - mid.slope * HEATING_BREAK),
            high=None,
        )
    if mid is not None and high is not None:
        v20 = 0.5 * (mid.value(COOLING_BREAK) + high.value(COOLING_BREAK))
        return PercentileLines(
            low=None,
            mid=LinePiece(mid.slope, v20 - mid.slope * COOLING_BREAK),
            high=LinePiece(high.slope, v20 - high.slope * COOLING_BREAK),
        )
    return lines


def _base_load(p10: PercentileLines, centers: np.ndarray) -> float | None:
    """Minimum of the 10th-percentile pieces over their populated bin centers."""
    selectors = {
        "low": centers < HEATING_BREAK,
        "mid": (centers > HEATING_BREAK) & (centers < COOLING_BREAK),
        "high": centers > COOLING_BREAK,
    }
    values = []
    for name, piece in p10.pieces():
        if piece is None:
            continue
        supported = centers[selectors[name]]
        if supported.size == 0:
            continue
        values.extend([piece.value(float(supported.min())), piece.value(float(supported.max()))])
    if not values:
        return None
    return max(min(values), 0.0)
