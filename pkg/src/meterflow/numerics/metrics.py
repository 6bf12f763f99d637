"""Forecast error metrics."""

from __future__ import annotations

import math

import numpy as np

from ..errors import ValidationError


def rmse(actual, predicted) -> float:
    """Root-mean-square error between two equal-length vectors."""
    a = np.asarray(actual, dtype=np.float64)
    p = np.asarray(predicted, dtype=np.float64)
    if a.shape != p.shape:
        raise ValidationError(f"length mismatch: {a.shape} vs {p.shape}")
    if a.size == 0:
        raise ValidationError("rmse needs at least one value")
    return float(math.sqrt(np.mean((a - p) ** 2)))
