"""Synthetic hourly data seeded from household archetype profiles.

Each generated series follows the same periodic auto-regressive recurrence
the analytics layer fits: per-hour intercept (the daily activity shape,
optionally amplified on weekends), auto-regression on the same hour of the
previous days, a piecewise-linear temperature response, and Gaussian noise.
The true coefficients and any injected anomaly days are returned as labels
so tests can use the generator as an oracle.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .. import timeutil
from ..analytics.exogenous import exogenous_matrix
from ..errors import ConfigError
from ..model import HourlyReading, MeterSeries
from ..timeutil import HOURS_PER_DAY

DEFAULT_START_HOUR = timeutil.parse_hour_timestamp("2014-01-01T00:00:00Z")


@dataclass(frozen=True)
class TemperatureModel:
    """Annual + diurnal sinusoid with Gaussian noise, degrees Celsius."""

    annual_mean: float = 8.0
    annual_amplitude: float = 10.0
    diurnal_amplitude: float = 4.0
    noise_sigma: float = 1.5

    def curve(self, start_hour: int, n_hours: int) -> np.ndarray:
        hours = np.arange(start_hour, start_hour + n_hours, dtype=np.float64)
        # annual peak near late July, diurnal peak mid-afternoon
        annual = self.annual_amplitude * np.sin(2 * np.pi * (hours / 8760.0 - 0.22))
        diurnal = self.diurnal_amplitude * np.sin(2 * np.pi * ((hours % 24) - 9.0) / 24.0)
        return self.annual_mean + annual + diurnal


@dataclass(frozen=True)
class SeedProfile:
    """Parametric household archetype: activity shape plus response coefficients.

    weekend_factor scales the activity intercepts on weekend days;
    weekend_noise_factor scales the consumption noise there (occupied homes
    behave more erratically).
    """

    name: str
    activity: tuple[float, ...]  # 24 per-hour intercepts, kWh
    ar_coeffs: tuple[float, ...] = (0.3, 0.1, 0.1)  # most recent day first
    temp_coeffs: tuple[float, float, float] = (0.2, -0.03, 0.05)  # cooling, heating, overheating
    weekend_factor: float = 1.0
    weekend_noise_factor: float = 1.0

    def __post_init__(self) -> None:
        if len(self.activity) != HOURS_PER_DAY:
            raise ConfigError("activity shape needs 24 hourly values")
        if sum(self.ar_coeffs) >= 1.0:
            raise ConfigError("auto-regressive coefficients must sum below 1")


def _shape(base: float, morning: float, evening: float, midday: float = 0.0) -> tuple[float, ...]:
    values = np.full(24, base)
    values[6:9] += morning
    values[11:14] += midday
    values[17:22] += evening
    return tuple(float(v) for v in values)


def default_profiles() -> tuple[SeedProfile, ...]:
    return (
        SeedProfile(
            name="evening_household",
            activity=_shape(0.5, 0.25, 0.45),
            ar_coeffs=(0.3, 0.1, 0.1),
            temp_coeffs=(0.2, -0.03, 0.05),
        ),
        SeedProfile(
            name="daytime_home",
            activity=_shape(0.45, 0.15, 0.2, midday=0.35),
            ar_coeffs=(0.25, 0.15, 0.05),
            temp_coeffs=(0.15, 0.08, 0.03),
        ),
        SeedProfile(
            name="electric_heater",
            activity=_shape(0.4, 0.1, 0.15),
            ar_coeffs=(0.2, 0.1, 0.05),
            temp_coeffs=(0.1, 0.12, 0.06),
        ),
        SeedProfile(
            name="night_owl",
            activity=tuple(
                float(v)
                for v in np.roll(np.asarray(_shape(0.45, 0.2, 0.35)), 6)
            ),
            ar_coeffs=(0.35, 0.05, 0.1),
            temp_coeffs=(0.25, 0.02, 0.01),
        ),
    )


@dataclass(frozen=True)
class AnomalyInjection:
    day: int  # day offset from the series start
    factor: float


@dataclass(frozen=True)
class SeriesLabels:
    meter_id: str
    profile: str
    start_hour: int
    n_hours: int
    ar_coeffs: tuple[float, ...]
    temp_coeffs: tuple[float, float, float]
    weekday_intercepts: tuple[float, ...]
    weekend_intercepts: tuple[float, ...]
    anomalies: tuple[AnomalyInjection, ...]
    weekend_noise_factor: float = 1.0


@dataclass(frozen=True)
class GeneratorSpec:
    n_series: int = 1
    span_hours: int = 17520  # two years
    noise_sigma: float = 0.05
    temperature_model: TemperatureModel = field(default_factory=TemperatureModel)
    rng_seed: int = 0
    seed_profiles: tuple[SeedProfile, ...] = field(default_factory=default_profiles)
    start_hour: int = DEFAULT_START_HOUR
    anomalies_per_series: int = 0
    anomaly_factor: float = 3.0
    anomaly_start_day: int = 0
    id_prefix: str = "S"

    def __post_init__(self) -> None:
        if self.n_series < 1:
            raise ConfigError("n_series must be >= 1")
        if self.span_hours < HOURS_PER_DAY:
            raise ConfigError("span_hours must cover at least one day")
        if not self.seed_profiles:
            raise ConfigError("at least one seed profile is required")


def _labels_for(spec: GeneratorSpec, index: int, meta: np.random.Generator) -> SeriesLabels:
    profile = spec.seed_profiles[int(meta.integers(len(spec.seed_profiles)))]
    n_days = -(-spec.span_hours // HOURS_PER_DAY)
    p = len(profile.ar_coeffs)
    eligible_from = max(spec.anomaly_start_day, p)
    anomalies: tuple[AnomalyInjection, ...] = ()
    if spec.anomalies_per_series > 0 and eligible_from < n_days:
        count = min(spec.anomalies_per_series, n_days - eligible_from)
        days = meta.choice(np.arange(eligible_from, n_days), size=count, replace=False)
        anomalies = tuple(
            AnomalyInjection(day=int(d), factor=spec.anomaly_factor) for d in np.sort(days)
        )
    weekday = tuple(float(v) for v in profile.activity)
    weekend = tuple(float(v * profile.weekend_factor) for v in profile.activity)
    return SeriesLabels(
        meter_id=f"{spec.id_prefix}{index:05d}",
        profile=profile.name,
        start_hour=spec.start_hour,
        n_hours=spec.span_hours,
        ar_coeffs=profile.ar_coeffs,
        temp_coeffs=profile.temp_coeffs,
        weekday_intercepts=weekday,
        weekend_intercepts=weekend,
        anomalies=anomalies,
        weekend_noise_factor=profile.weekend_noise_factor,
    )


def _values_for(spec: GeneratorSpec, labels: SeriesLabels, noise: np.random.Generator) -> MeterSeries:
    n_days = -(-spec.span_hours // HOURS_PER_DAY)
    n_hours = n_days * HOURS_PER_DAY
    tm = spec.temperature_model
    temps = tm.curve(spec.start_hour, n_hours)
    if tm.noise_sigma > 0:
        temps = temps + noise.normal(0.0, tm.noise_sigma, n_hours)

    ar = np.asarray(labels.ar_coeffs)
    p = ar.size
    beta = np.asarray(labels.temp_coeffs)
    temp_term = (exogenous_matrix(temps) @ beta).reshape(n_days, HOURS_PER_DAY)

    start_day = spec.start_hour // HOURS_PER_DAY
    weekend = np.array(
        [timeutil.is_weekend_day(start_day + d) for d in range(n_days)], dtype=bool
    )
    intercepts = np.where(
        weekend[:, None],
        np.asarray(labels.weekend_intercepts)[None, :],
        np.asarray(labels.weekday_intercepts)[None, :],
    )

    eps = (
        noise.normal(0.0, spec.noise_sigma, (n_days, HOURS_PER_DAY))
        if spec.noise_sigma > 0
        else np.zeros((n_days, HOURS_PER_DAY))
    )
    if labels.weekend_noise_factor != 1.0:
        eps[weekend] *= labels.weekend_noise_factor

    y = np.empty((n_days, HOURS_PER_DAY))
    steady = 1.0 - ar.sum()
    for d in range(min(p, n_days)):
        y[d] = np.maximum((intercepts[d] + temp_term[d] + eps[d]) / steady, 0.0)
    for d in range(p, n_days):
        level = intercepts[d] + temp_term[d] + eps[d]
        for i in range(p):
            level = level + ar[i] * y[d - 1 - i]
        y[d] = np.maximum(level, 0.0)

    for injection in labels.anomalies:
        y[injection.day] *= injection.factor

    consumption = y.reshape(-1)[: spec.span_hours].copy()
    temperature = temps[: spec.span_hours].copy()
    return MeterSeries(
        meter_id=labels.meter_id,
        start_hour=spec.start_hour,
        consumption=consumption,
        temperature=temperature,
        gap_mask=np.zeros(spec.span_hours, dtype=bool),
    )


def generate_series(spec: GeneratorSpec) -> Iterator[tuple[MeterSeries, SeriesLabels]]:
    """Yield (series, labels) pairs, deterministic for a fixed rng_seed."""
    children = np.random.SeedSequence(spec.rng_seed).spawn(spec.n_series)
    for index, child in enumerate(children):
        meta_ss, noise_ss = child.spawn(2)
        labels = _labels_for(spec, index, np.random.default_rng(meta_ss))
        series = _values_for(spec, labels, np.random.default_rng(noise_ss))
        yield series, labels


def generate_labels(spec: GeneratorSpec) -> list[SeriesLabels]:
    """Ground-truth labels only (no value generation)."""
    children = np.random.SeedSequence(spec.rng_seed).spawn(spec.n_series)
    return [
        _labels_for(spec, index, np.random.default_rng(child.spawn(2)[0]))
        for index, child in enumerate(children)
    ]


def generate_synthetic(spec: GeneratorSpec) -> tuple[Iterator[HourlyReading], list[SeriesLabels]]:
    """Streamed reading rows plus the full label set."""
    labels = generate_labels(spec)

    def stream() -> Iterator[HourlyReading]:
        for series, _ in generate_series(spec):
            yield from series.iter_readings()

    return stream(), labels


def labels_to_json(labels: Sequence[SeriesLabels]) -> list[dict]:
    return [
        {
            "meter_id": l.meter_id,
            "profile": l.profile,
            "start": timeutil.format_hour(l.start_hour),
            "n_hours": l.n_hours,
            "ar_coeffs": list(l.ar_coeffs),
            "temp_coeffs": list(l.temp_coeffs),
            "weekday_intercepts": list(l.weekday_intercepts),
            "weekend_intercepts": list(l.weekend_intercepts),
            "anomalies": [{"day": a.day, "factor": a.factor} for a in l.anomalies],
            "weekend_noise_factor": l.weekend_noise_factor,
        }
        for l in labels
    ]


def write_labels(labels: Sequence[SeriesLabels], path: str | Path) -> None:
    Path(path).write_text(json.dumps(labels_to_json(labels), indent=1))
