"""Piecewise-linear temperature drivers.

Outdoor temperature maps to three non-negative regressors: cooling demand
above 20 C, heating demand below 16 C, and an extra overheating term below
5 C (both heating terms are active in that range). The transform is
continuous in temperature at 5, 16 and 20 C.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import ValidationError

COOLING_BREAK = 20.0
HEATING_BREAK = 16.0
OVERHEATING_BREAK = 5.0


@dataclass(frozen=True)
class ExogenousTemps:
    cooling: float  # degrees above 20
    heating: float  # degrees below 16
    overheating: float  # degrees below 5

    def as_array(self) -> np.ndarray:
        return np.array([self.cooling, self.heating, self.overheating])


def exogenous_transform(temperature: float) -> ExogenousTemps:
    if not math.isfinite(temperature):
        raise ValidationError(f"temperature must be finite, got {temperature!r}")
    t = float(temperature)
    return ExogenousTemps(
        cooling=t - COOLING_BREAK if t > COOLING_BREAK else 0.0,
        heating=HEATING_BREAK - t if t < HEATING_BREAK else 0.0,
        overheating=OVERHEATING_BREAK - t if t < OVERHEATING_BREAK else 0.0,
    )


def exogenous_matrix(temperatures: np.ndarray) -> np.ndarray:
    """Vectorized transform: n temperatures -> n x 3 driver matrix."""
    t = np.asarray(temperatures, dtype=np.float64)
    out = np.zeros((t.size, 3))
    out[:, 0] = np.maximum(t - COOLING_BREAK, 0.0)
    out[:, 1] = np.maximum(HEATING_BREAK - t, 0.0)
    out[:, 2] = np.maximum(OVERHEATING_BREAK - t, 0.0)
    return out
