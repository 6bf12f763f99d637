"""Additive triple exponential smoothing (Holt-Winters).

Smoothing parameters are picked by a grid search over {0.1, ..., 0.9}^3
minimizing in-sample one-step RMSE; the grid is evaluated for all parameter
triples simultaneously with vectorized state updates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, ValidationError

_GRID = np.arange(0.1, 0.95, 0.1)


@dataclass(frozen=True)
class HoltWintersModel:
    alpha: float
    beta: float
    gamma: float
    season_length: int
    level: float
    trend: float
    seasonal: np.ndarray  # seasonal[t % season_length] is the latest state for phase t
    n_obs: int
    train_rmse: float

    def __post_init__(self) -> None:
        self.seasonal.setflags(write=False)


def holt_winters_fit(series, season_length: int = 24) -> HoltWintersModel:
    y = np.asarray(series, dtype=np.float64)
    n = y.size
    m = season_length
    if m < 1:
        raise ValidationError("season_length must be >= 1")
    if n < 2 * m:
        raise InsufficientDataError(
            f"need at least two full seasons ({2 * m} values), got {n}"
        )

    alphas, betas, gammas = np.meshgrid(_GRID, _GRID, _GRID, indexing="ij")
    a = alphas.ravel()
    b = betas.ravel()
    g = gammas.ravel()
    combos = a.size

    first_mean = y[:m].mean()
    second_mean = y[m : 2 * m].mean()
    b0 = (second_mean - first_mean) / m
    # detrended initial seasonals; the level state enters the recursion as
    # the deseasonalized level at the end of the first season
    trend_line = first_mean + b0 * (np.arange(m) - (m - 1) / 2.0)
    level = np.full(combos, first_mean + b0 * (m - 1) / 2.0)
    trend = np.full(combos, b0)
    seasonal = np.tile(y[:m] - trend_line, (combos, 1))

    sq_err = np.zeros(combos)
    for t in range(m, n):
        phase = t % m
        s_old = seasonal[:, phase]
        pred = level + trend + s_old
        err = y[t] - pred
        sq_err += err * err
        prev_level = level
        level = a * (y[t] - s_old) + (1.0 - a) * (level + trend)
        trend = b * (level - prev_level) + (1.0 - b) * trend
        seasonal[:, phase] = g * (y[t] - level) + (1.0 - g) * s_old

    rmse_all = np.sqrt(sq_err / (n - m))
    best = int(rmse_all.argmin())
    return HoltWintersModel(
        alpha=float(a[best]),
        beta=float(b[best]),
        gamma=float(g[best]),
        season_length=m,
        level=float(level[best]),
        trend=float(trend[best]),
        seasonal=seasonal[best].copy(),
        n_obs=n,
        train_rmse=float(rmse_all[best]),
    )


def holt_winters_forecast(model: HoltWintersModel, horizon: int) -> np.ndarray:
    if horizon < 1:
        raise ValidationError("horizon must be >= 1")
    m = model.season_length
    steps = np.arange(1, horizon + 1)
    phases = (model.n_obs + steps - 1) % m
    return model.level + steps * model.trend + model.seasonal[phases]
