"""Meter analytics: temperature transforms, periodic auto-regression,
thermal-sensitivity lines, profiles, segmentation, forecasting baselines,
anomaly detection, and the forecast evaluation harness."""

from .anomaly import AnomalyDetector, AnomalyReport, daily_distance, detect_day, train_detector
from .exogenous import ExogenousTemps, exogenous_matrix, exogenous_transform
from .forecasting import FORECAST_METHODS, ForecastResult, forecast_series
from .parx import DisaggregationResult, ParxModel, disaggregate, parx_fit, parx_predict, predict_day
from .profiles import DailyProfile, daily_profile, variability_histogram
from .segmentation import CustomerFeatures, SegmentationResult, extract_features, segment_customers
from .threeline import LinePiece, PercentileLines, ThreeLineModel, three_line_fit, three_line_predict

__all__ = [
    "AnomalyDetector",
    "AnomalyReport",
    "daily_distance",
    "detect_day",
    "train_detector",
    "ExogenousTemps",
    "exogenous_matrix",
    "exogenous_transform",
    "FORECAST_METHODS",
    "ForecastResult",
    "forecast_series",
    "DisaggregationResult",
    "ParxModel",
    "disaggregate",
    "parx_fit",
    "parx_predict",
    "predict_day",
    "DailyProfile",
    "daily_profile",
    "variability_histogram",
    "CustomerFeatures",
    "SegmentationResult",
    "extract_features",
    "segment_customers",
    "LinePiece",
    "PercentileLines",
    "ThreeLineModel",
    "three_line_fit",
    "three_line_predict",
]
