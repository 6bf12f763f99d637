"""Ordinary least squares with coefficient diagnostics.

The fit always prepends an intercept column. Standard errors, t-values and
two-tailed p-values come from the classical residual-variance estimate with
n - m - 1 degrees of freedom; p-values are evaluated with a self-contained
regularized incomplete-beta routine (modified Lentz continued fraction),
accurate to well below 1e-6 over the diagnostic range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InsufficientDataError, SingularFitError


@dataclass(frozen=True)
class OlsFit:
    coefficients: np.ndarray  # intercept first
    std_errors: np.ndarray
    t_values: np.ndarray
    p_values: np.ndarray
    adjusted_r2: float
    n: int
    residuals: np.ndarray

    def __post_init__(self) -> None:
        for arr in (self.coefficients, self.std_errors, self.t_values, self.p_values, self.residuals):
            arr.setflags(write=False)

    def predict(self, design: np.ndarray) -> np.ndarray:
        x = np.asarray(design, dtype=np.float64)
        if x.ndim == 1:
            x = x.reshape(1, -1)
        return self.coefficients[0] + x @ self.coefficients[1:]


def ols_fit(design: np.ndarray, response: np.ndarray) -> OlsFit:
    """Fit response = b0 + design @ b with least squares.

    design is n x m (no intercept column); raises SingularFitError when the
    augmented design is rank deficient and InsufficientDataError when
    n <= m + 1.
    """
    x = np.asarray(design, dtype=np.float64)
    y = np.asarray(response, dtype=np.float64)
    if x.ndim == 1:
        x = x.reshape(-1, 1)
    n, m = x.shape
    if y.shape != (n,):
        raise ValueError(f"response length {y.shape} does not match design rows {n}")
    n_params = m + 1
    if n <= n_params:
        raise InsufficientDataError(
            f"need more than {n_params} observations for {n_params} coefficients, got {n}"
        )
    augmented = np.column_stack([np.ones(n), x])
    coef, _, rank, _ = np.linalg.lstsq(augmented, y, rcond=None)
    if rank < n_params:
        raise SingularFitError(f"design matrix is rank deficient (rank {rank} < {n_params})")

    fitted = augmented @ coef
    residuals = y - fitted
    dof = n - n_params
    rss = float(residuals @ residuals)
    sigma2 = rss / dof
    xtx_inv = np.linalg.inv(augmented.T @ augmented)
    std_errors = np.sqrt(np.maximum(sigma2 * np.diag(xtx_inv), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_values = np.where(std_errors > 0, coef / std_errors, np.inf * np.sign(coef))
    p_values = student_t_two_tailed(t_values, dof)

    tss = float(np.sum((y - y.mean()) ** 2))
    if tss > 0:
        r2 = 1.0 - rss / tss
        adjusted_r2 = 1.0 - (1.0 - r2) * (n - 1) / dof
    else:
        # constant response fitted exactly by the intercept
        adjusted_r2 = 1.0 if rss <= 1e-12 else -math.inf
    return OlsFit(
        coefficients=coef,
        std_errors=std_errors,
        t_values=t_values,
        p_values=p_values,
        adjusted_r2=float(adjusted_r2),
        n=n,
        residuals=residuals,
    )


def student_t_two_tailed(t_values: np.ndarray, dof: int) -> np.ndarray:
    """P(|T| >= |t|) for Student-t with dof degrees of freedom."""
    t = np.asarray(t_values, dtype=np.float64)
    out = np.empty(t.shape, dtype=np.float64)
    flat = t.ravel()
    res = out.ravel()
    for i, ti in enumerate(flat):
        if math.isinf(ti):
            res[i] = 0.0
        else:
            x = dof / (dof + ti * ti)
            res[i] = betainc_regularized(0.5 * dof, 0.5, x)
    return out


def betainc_regularized(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) via the continued fraction."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    # The continued fraction converges fast for x < (a+1)/(a+b+2);
    # otherwise use the symmetry I_x(a,b) = 1 - I_{1-x}(b,a).
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _betacf(a: float, b: float, x: float, max_iter: int = 300, eps: float = 3e-16) -> float:
    """Modified Lentz evaluation of the incomplete-beta continued fraction."""
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, max_iter + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < eps:
            break
    return h
