"""Single-variable Gaussian model for distance features."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateModelError, InsufficientDataError


@dataclass(frozen=True)
class GaussianModel:
    mu: float
    sigma2: float  # population variance (divide by n)
    n_train: int

    @property
    def sigma(self) -> float:
        return math.sqrt(self.sigma2)

    @property
    def degenerate(self) -> bool:
        return self.sigma2 == 0.0


def gaussian_fit(train) -> GaussianModel:
    """Population mean and variance of the training values."""
    data = np.asarray(train, dtype=np.float64)
    if data.size < 2:
        raise InsufficientDataError(f"need at least 2 training values, got {data.size}")
    mu = float(data.mean())
    sigma2 = float(np.mean((data - mu) ** 2))
    return GaussianModel(mu=mu, sigma2=sigma2, n_train=int(data.size))


def gaussian_density(model: GaussianModel, x: float) -> float:
    """Normal density at x. A zero-variance model cannot be scored."""
    if model.sigma2 <= 0.0:
        raise DegenerateModelError(
            "model variance is zero; widen training data or treat any x != mu as anomalous"
        )
    z = (x - model.mu) ** 2 / (2.0 * model.sigma2)
    return math.exp(-z) / (model.sigma * math.sqrt(2.0 * math.pi))
