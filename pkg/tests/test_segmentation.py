import numpy as np
import pytest

from meterflow.analytics.segmentation import (
    CustomerFeatures,
    extract_features,
    segment_customers,
)
from meterflow.analytics.threeline import three_line_fit
from meterflow.errors import DependencyError, ValidationError
from meterflow.ingest.synthetic import GeneratorSpec, generate_series

from conftest import spread_temperature_model, thermal_profile


def features(meter, base, activity, heating, cooling):
    return CustomerFeatures(
        meter_id=meter,
        base_load=base,
        activity_load=activity,
        heating_gradient=heating,
        cooling_gradient=cooling,
    )


def two_population_features(n_per_side=8, seed=0):
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n_per_side):
        out.append(
            features(f"low{i}", 0.3 + rng.normal(0, 0.02), 0.5, 0.1 + rng.normal(0, 0.01), 0.05)
        )
    for i in range(n_per_side):
        out.append(
            features(f"high{i}", 1.5 + rng.normal(0, 0.02), 2.0, 0.4 + rng.normal(0, 0.01), 0.3)
        )
    return out


def test_extract_features_from_thermal_fixture():
    spec = GeneratorSpec(
        n_series=1,
        span_hours=730 * 24,
        noise_sigma=0.05,
        rng_seed=9,
        seed_profiles=thermal_profile(0.4, 0.3, 0.5),
        temperature_model=spread_temperature_model(),
    )
    series, _ = next(generate_series(spec))
    model = three_line_fit(series)
    # pure thermal profile: the true activity load is the flat 0.5 intercept
    til = np.full(len(series), 0.5)
    got = extract_features("m", model, til)
    assert got.base_load == pytest.approx(0.5, abs=0.1)
    assert got.activity_load == pytest.approx(0.5)
    assert got.heating_gradient == pytest.approx(0.3, rel=0.1)
    assert got.cooling_gradient == pytest.approx(0.4, rel=0.1)


def test_missing_three_line_raises_dependency_error():
    with pytest.raises(DependencyError) as err:
        extract_features("m", None, np.ones(10))
    assert err.value.stage == "three_line_fit"


def test_missing_disaggregation_raises_dependency_error():
    spec = GeneratorSpec(
        n_series=1,
        span_hours=400 * 24,
        rng_seed=1,
        seed_profiles=thermal_profile(),
        temperature_model=spread_temperature_model(),
    )
    series, _ = next(generate_series(spec))
    model = three_line_fit(series)
    with pytest.raises(DependencyError) as err:
        extract_features("m", model, None)
    assert err.value.stage == "disaggregate"


def test_two_populations_separate_with_k2():
    feats = two_population_features()
    result = segment_customers(feats, k=2, seed=3)
    low = {result.assignments[f"low{i}"] for i in range(8)}
    high = {result.assignments[f"high{i}"] for i in range(8)}
    assert len(low) == 1 and len(high) == 1 and low != high


def test_k1_centroid_is_feature_mean():
    feats = two_population_features()
    result = segment_customers(feats, k=1, seed=0)
    centroid = result.clusters[0].centroid
    assert centroid["base_load"] == pytest.approx(np.mean([f.base_load for f in feats]))
    assert centroid["activity_load"] == pytest.approx(np.mean([f.activity_load for f in feats]))


def test_duplicate_meters_land_in_same_cluster():
    feats = two_population_features()
    twin_a = features("twin_a", 0.7, 1.0, 0.2, 0.1)
    twin_b = features("twin_b", 0.7, 1.0, 0.2, 0.1)
    result = segment_customers(feats + [twin_a, twin_b], k=3, seed=1)
    assert result.assignments["twin_a"] == result.assignments["twin_b"]


def test_k_exceeding_meters_rejected():
    with pytest.raises(ValidationError):
        segment_customers(two_population_features(2), k=5)


def test_deterministic_given_seed():
    feats = two_population_features()
    a = segment_customers(feats, k=2, seed=42)
    b = segment_customers(feats, k=2, seed=42)
    assert a.assignments == b.assignments


def test_unknown_feature_name_rejected():
    with pytest.raises(ValidationError):
        segment_customers(two_population_features(), k=2, feature_names=("volume",))


def test_non_finite_feature_rejected():
    with pytest.raises(ValidationError):
        features("bad", float("nan"), 1.0, 0.1, 0.1)
