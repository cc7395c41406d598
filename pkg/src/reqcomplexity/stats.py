"""Correlation, polynomial regression and normality testing for effort data."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from statistics import NormalDist
from typing import Sequence

import numpy as np
from scipy.special import betainc

from .errors import DomainError, UsageError

_STD_NORMAL = NormalDist()


def _series(x: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1:
        raise UsageError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise UsageError(f"{name} contains non-finite values")
    return arr


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    x, y = _series(x, "x"), _series(y, "y")
    if len(x) != len(y):
        raise UsageError(f"series lengths differ: {len(x)} vs {len(y)}")
    if len(x) < 3:
        raise UsageError(f"pearson needs at least 3 pairs, got {len(x)}")
    dx, dy = x - x.mean(), y - y.mean()
    sxx, syy = float(dx @ dx), float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise DomainError("correlation undefined: a series has zero variance")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return min(1.0, max(-1.0, r))


def fisher_ci(r: float, n: int, level: float = 0.95) -> tuple[float, float]:
    """Confidence interval for a Pearson ``r`` via the Fisher z transform."""
    if not 0 < level < 1:
        raise UsageError(f"confidence level must lie in (0, 1), got {level}")
    if n < 4:
        raise UsageError(f"fisher_ci needs n >= 4, got {n}")
    if abs(r) >= 1:
        raise DomainError(f"confidence interval is degenerate for r = {r}")
    z = math.atanh(r)
    half = _STD_NORMAL.inv_cdf(0.5 + level / 2) / math.sqrt(n - 3)
    return math.tanh(z - half), math.tanh(z + half)


@dataclass(frozen=True)
class CorrelationResult:
    r: float
    n: int
    ci_low: float | None
    ci_high: float | None
    level: float = 0.95


def correlate(x: Sequence[float], y: Sequence[float], level: float = 0.95) -> CorrelationResult:
    """Pearson ``r`` with its Fisher interval; the interval is ``None`` when ``|r| = 1``."""
    r = pearson(x, y)
    n = len(x)
    low = high = None
    if abs(r) < 1 and n >= 4:
        low, high = fisher_ci(r, n, level)
    return CorrelationResult(r, n, low, high, level)


# -- Student t ----------------------------------------------------------------

def t_cdf(t: float, dof: float) -> float:
    if dof <= 0:
        raise UsageError(f"degrees of freedom must be positive, got {dof}")
    if math.isnan(t):
        return math.nan
    if math.isinf(t):
        return 1.0 if t > 0 else 0.0
    tail = 0.5 * float(betainc(dof / 2, 0.5, dof / (dof + t * t)))
    return 1.0 - tail if t >= 0 else tail


def t_two_sided_p(t: float, dof: float) -> float:
    """``P(|T| >= |t|)``; computed directly to keep precision in the tail."""
    if dof <= 0:
        raise UsageError(f"degrees of freedom must be positive, got {dof}")
    if math.isinf(t):
        return 0.0
    return float(betainc(dof / 2, 0.5, dof / (dof + t * t)))


# -- OLS ------------------------------------------------------------------------

@dataclass(frozen=True)
class RegressionResult:
    degree: int
    beta: tuple[float, ...]
    std_errors: tuple[float, ...]
    t_values: tuple[float, ...]
    p_values: tuple[float, ...]
    r_squared: float
    dof: int
    residuals: np.ndarray = field(repr=False)

    def predict(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return sum(b * x**k for k, b in enumerate(self.beta))


def ols_poly(x: Sequence[float], y: Sequence[float], degree: int = 1) -> RegressionResult:
    """Least-squares fit of ``y = b0 + b1 x (+ b2 x^2)`` with per-coefficient t-tests."""
    if degree not in (1, 2):
        raise UsageError(f"degree must be 1 or 2, got {degree}")
    x, y = _series(x, "x"), _series(y, "y")
    if len(x) != len(y):
        raise UsageError(f"series lengths differ: {len(x)} vs {len(y)}")
    k = degree + 1
    dof = len(x) - k
    if dof <= 0:
        raise UsageError(f"degree {degree} fit needs more than {k} points, got {len(x)}")
    design = np.vander(x, k, increasing=True)
    if np.linalg.matrix_rank(design) < k:
        raise DomainError(f"design matrix is rank deficient for a degree {degree} fit")
    q, r = np.linalg.qr(design)
    beta = np.linalg.solve(r, q.T @ y)
    resid = y - design @ beta
    rss = float(resid @ resid)
    dy = y - y.mean()
    tss = float(dy @ dy)
    if tss == 0:
        raise DomainError("r-squared undefined: response has zero variance")
    r2 = min(1.0, max(0.0, 1.0 - rss / tss))
    r_inv = np.linalg.inv(r)
    cov = (rss / dof) * (r_inv @ r_inv.T)
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    t_vals, p_vals = [], []
    for b, s in zip(beta, se):
        if s > 0:
            t = float(b / s)
        else:
            t = math.copysign(math.inf, b) if b != 0 else 0.0
        t_vals.append(t)
        p_vals.append(t_two_sided_p(t, dof))
    return RegressionResult(
        degree=degree,
        beta=tuple(float(b) for b in beta),
        std_errors=tuple(float(s) for s in se),
        t_values=tuple(t_vals),
        p_values=tuple(p_vals),
        r_squared=r2,
        dof=dof,
        residuals=resid,
    )


# -- Kolmogorov-Smirnov ---------------------------------------------------------

KS_CAVEAT = (
    "normal parameters were estimated from the sample; the asymptotic "
    "Kolmogorov p-value is conservative in this case (Lilliefors effect)"
)


def kolmogorov_sf(lam: float) -> float:
    """``P(K > lam)`` for the Kolmogorov distribution (asymptotic series)."""
    if lam < 0.2:
        # the complementary mass is below 1e-12 here and the series converges slowly
        return 1.0
    total = math.fsum(2 * (-1) ** (k - 1) * math.exp(-2 * k * k * lam * lam) for k in range(1, 101))
    return min(1.0, max(0.0, total))


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n: int
    note: str = KS_CAVEAT


def ks_normal(sample: Sequence[float]) -> KsResult:
    """One-sample K-S test against a normal with the sample's mean and sd."""
    x = np.sort(_series(sample, "sample"))
    n = len(x)
    if n < 5:
        raise UsageError(f"ks_normal needs at least 5 observations, got {n}")
    sd = float(x.std(ddof=1))
    if sd == 0:
        raise DomainError("K-S normality test undefined: sample has zero variance")
    fitted = NormalDist(float(x.mean()), sd)
    cdf = np.array([fitted.cdf(v) for v in x])
    i = np.arange(1, n + 1)
    d = float(max((i / n - cdf).max(), (cdf - (i - 1) / n).max()))
    return KsResult(d, kolmogorov_sf(math.sqrt(n) * d), n)
