"""Shared fixtures: generator archetypes with strong, well-identified
temperature coupling, used wherever a test needs a coefficient oracle."""

import numpy as np
import pytest

from meterflow.ingest.synthetic import GeneratorSpec, SeedProfile, TemperatureModel


def hourly_shape(base, morning=0.0, evening=0.0, midday=0.0):
    values = np.full(24, float(base))
    values[6:9] += morning
    values[11:14] += midday
    values[17:22] += evening
    return tuple(float(v) for v in values)


def strong_profiles():
    """Archetypes whose day-to-day temperature transmission is strong enough
    to identify every per-season coefficient from 400 days at noise 0.05."""
    return (
        SeedProfile("family_evening", hourly_shape(0.5, 0.25, 0.45), (0.3, 0.1, 0.1), (0.25, 0.15, 0.10)),
        SeedProfile("daytime_home", hourly_shape(0.45, 0.15, 0.3, midday=0.3), (0.25, 0.15, 0.05), (0.2, 0.18, 0.08)),
        SeedProfile("heavy_heating", hourly_shape(0.6, 0.2, 0.2), (0.2, 0.1, 0.05), (0.3, 0.12, 0.12)),
    )


def wide_temperature_model():
    """Continental-style curve whose range feeds all three drivers at every
    hour of day across a year."""
    return TemperatureModel(annual_mean=10.0, annual_amplitude=14.0, diurnal_amplitude=2.0, noise_sigma=2.5)


def heating_only_profiles():
    """No cooling response at all: predictions stay unbiased outside a
    winter-anchored training span."""
    return (
        SeedProfile("home_a", hourly_shape(0.5, 0.25, 0.45), (0.3, 0.1, 0.1), (0.0, 0.15, 0.08)),
        SeedProfile("home_b", hourly_shape(0.45, 0.2, 0.3), (0.25, 0.1, 0.05), (0.0, 0.12, 0.05)),
    )


def thermal_profile(cooling=0.4, heating=0.3, base=0.5):
    """Flat activity, no auto-regression: consumption is a pure piecewise
    function of temperature plus noise."""
    return (SeedProfile("thermal", tuple([base] * 24), (0.0, 0.0, 0.0), (cooling, heating, 0.0)),)


def spread_temperature_model():
    return TemperatureModel(annual_mean=12.0, annual_amplitude=12.0, diurnal_amplitude=4.0, noise_sigma=1.5)


@pytest.fixture
def strong_spec():
    def make(n_series=1, days=400, noise=0.05, seed=0, **kwargs):
        return GeneratorSpec(
            n_series=n_series,
            span_hours=days * 24,
            noise_sigma=noise,
            rng_seed=seed,
            seed_profiles=strong_profiles(),
            temperature_model=wide_temperature_model(),
            **kwargs,
        )

    return make
