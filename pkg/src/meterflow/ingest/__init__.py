"""File ingestion, anonymization, and the synthetic data generator."""

from .anonymize import anonymize_customers, anonymize_readings, pseudonym
from .csvio import join_weather, parse_meter_csv, parse_weather_csv
from .synthetic import (
    AnomalyInjection,
    GeneratorSpec,
    SeedProfile,
    SeriesLabels,
    TemperatureModel,
    default_profiles,
    generate_series,
    generate_synthetic,
)

__all__ = [
    "anonymize_customers",
    "anonymize_readings",
    "pseudonym",
    "join_weather",
    "parse_meter_csv",
    "parse_weather_csv",
    "AnomalyInjection",
    "GeneratorSpec",
    "SeedProfile",
    "SeriesLabels",
    "TemperatureModel",
    "default_profiles",
    "generate_series",
    "generate_synthetic",
]
