"""Customer feature extraction and k-means segmentation."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DependencyError, ValidationError
from ..numerics.kmeans import KMeansResult, kmeans
from .profiles import DailyProfile
from .threeline import ThreeLineModel

BASE_FEATURES = ("base_load", "activity_load", "heating_gradient", "cooling_gradient")


@dataclass(frozen=True)
class CustomerFeatures:
    meter_id: str
    base_load: float
    activity_load: float
    heating_gradient: float
    cooling_gradient: float
    profile_vector: np.ndarray | None = None

    def __post_init__(self) -> None:
        for name in BASE_FEATURES:
            if not math.isfinite(getattr(self, name)):
                raise ValidationError(f"feature {name} must be finite")
        if self.profile_vector is not None:
            self.profile_vector.setflags(write=False)


def extract_features(
    meter_id: str,
    three_line: ThreeLineModel | None,
    temp_independent: np.ndarray | None,
    profile: DailyProfile | None = None,
) -> CustomerFeatures:
    """Assemble the segmentation feature vector from the fitted models.

    activity_load is the mean temperature-independent load. A missing or
    partial upstream model raises DependencyError naming the stage.
    """
    if three_line is None:
        raise DependencyError(f"meter {meter_id}: thermal model not fitted", stage="three_line_fit")
    if (
        three_line.base_load is None
        or three_line.heating_gradient is None
        or three_line.cooling_gradient is None
    ):
        raise DependencyError(
            f"meter {meter_id}: thermal model is partial (missing temperature ranges)",
            stage="three_line_fit",
        )
    if temp_independent is None:
        raise DependencyError(f"meter {meter_id}: not disaggregated", stage="disaggregate")
    values = np.asarray(temp_independent, dtype=np.float64)
    values = values[np.isfinite(values)]
    if values.size == 0:
        raise DependencyError(f"meter {meter_id}: not disaggregated", stage="disaggregate")

    profile_vector = None
    if profile is not None and profile.weekday_profile is not None:
        profile_vector = profile.weekday_profile.copy()

    return CustomerFeatures(
        meter_id=meter_id,
        base_load=three_line.base_load,
        activity_load=float(values.mean()),
        heating_gradient=three_line.heating_gradient,
        cooling_gradient=three_line.cooling_gradient,
        profile_vector=profile_vector,
    )


@dataclass(frozen=True)
class ClusterSummary:
    index: int
    members: tuple[str, ...]
    centroid: dict[str, float]


@dataclass(frozen=True)
class SegmentationResult:
    k: int
    feature_names: tuple[str, ...]
    assignments: dict[str, int]
    clusters: tuple[ClusterSummary, ...]
    kmeans: KMeansResult


def segment_customers(
    features: Sequence[CustomerFeatures],
    k: int,
    feature_names: Sequence[str] = BASE_FEATURES,
    include_profile: bool = False,
    max_iter: int = 100,
    seed: int = 0,
) -> SegmentationResult:
    """Cluster customers on z-scored features; centroids are reported back in
    original units. Deterministic for a fixed seed."""
    if not features:
        raise ValidationError("no customer features supplied")
    if k > len(features):
        raise ValidationError(f"k={k} exceeds the {len(features)} available meters")
    for name in feature_names:
        if name not in BASE_FEATURES:
            raise ValidationError(f"unknown feature {name!r}; expected from {BASE_FEATURES}")

    columns = [
        np.array([getattr(f, name) for f in features], dtype=np.float64) for name in feature_names
    ]
    matrix = np.column_stack(columns)
    if include_profile:
        if any(f.profile_vector is None for f in features):
            raise DependencyError("profile vectors missing for some meters", stage="daily_profile")
        matrix = np.column_stack([matrix] + [np.vstack([f.profile_vector for f in features])])

    mean = matrix.mean(axis=0)
    std = matrix.std(axis=0)
    std = np.where(std > 0, std, 1.0)
    standardized = (matrix - mean) / std

    result = kmeans(standardized, k=k, max_iter=max_iter, seed=seed)
    centroids_raw = result.centroids * std + mean

    assignments = {f.meter_id: int(c) for f, c in zip(features, result.assignments)}
    clusters = []
    for c in range(k):
        members = tuple(f.meter_id for f, a in zip(features, result.assignments) if a == c)
        centroid = {
            name: float(centroids_raw[c, j]) for j, name in enumerate(feature_names)
        }
        clusters.append(ClusterSummary(index=c, members=members, centroid=centroid))

    return SegmentationResult(
        k=k,
        feature_names=tuple(feature_names),
        assignments=assignments,
        clusters=tuple(clusters),
        kmeans=result,
    )
