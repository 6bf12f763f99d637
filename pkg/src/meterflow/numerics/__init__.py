"""Generic numerical kernels used by the meter analytics layer."""

from .gaussian import GaussianModel, gaussian_density, gaussian_fit
from .histogram import Histogram, equi_width_histogram, percentile
from .kmeans import KMeansResult, kmeans
from .metrics import rmse
from .ols import OlsFit, ols_fit
from .smoothing import HoltWintersModel, holt_winters_fit, holt_winters_forecast

__all__ = [
    "GaussianModel",
    "gaussian_density",
    "gaussian_fit",
    "Histogram",
    "equi_width_histogram",
    "percentile",
    "KMeansResult",
    "kmeans",
    "rmse",
    "OlsFit",
    "ols_fit",
    "HoltWintersModel",
    "holt_winters_fit",
    "holt_winters_forecast",
]
