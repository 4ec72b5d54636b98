"""Wald-type tests, asymptotic power, sample-size planning, and power under
local alternatives.

All statistics weight parameter deviations by the inverse of the asymptotic
covariance of ``sqrt(n)(theta_hat - theta)`` (``sigma_n`` from the estimation
module), so each statistic is asymptotically chi-square under its null.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .estimation import FitResult, covariance_mlrm
from .exceptions import DecompositionError, DomainError
from .model import ModelData, Theta

__all__ = [
    "LinearHypothesis",
    "WaldOutcome",
    "PowerReport",
    "wald_statistic",
    "wald_simple",
    "wald_composite",
    "approx_power",
    "required_sample_size",
    "contiguous_power",
    "UNBOUNDED_SAMPLE_SIZE",
]

UNBOUNDED_SAMPLE_SIZE = math.inf
_MAX_SAMPLE_SIZE = 1e9


@dataclass(frozen=True)
class LinearHypothesis:
    """Linear restriction M' theta = m with full-column-rank M."""

    m_matrix: np.ndarray
    m_vector: np.ndarray

    def __post_init__(self):
        mat = np.atleast_2d(np.asarray(self.m_matrix, dtype=float))
        vec = np.atleast_1d(np.asarray(self.m_vector, dtype=float))
        object.__setattr__(self, "m_matrix", mat)
        object.__setattr__(self, "m_vector", vec)
        if mat.shape[1] != vec.size:
            raise DomainError("restriction matrix and value dimensions differ")
        if mat.shape[1] >= mat.shape[0]:
            raise DomainError("need r < dim(theta) restrictions")
        smallest_sv = np.linalg.svd(mat, compute_uv=False)[-1]
        if smallest_sv <= 1e-10:
            raise DomainError("restriction matrix is rank deficient")

    @property
    def n_restrictions(self) -> int:
        return self.m_matrix.shape[1]

    @classmethod
    def coordinates(cls, indices, values, dim):
        """Restriction pinning ``theta[indices] = values``."""
        indices = np.atleast_1d(indices)
        mat = np.zeros((dim, len(indices)))
        for col, idx in enumerate(indices):
            mat[idx, col] = 1.0
        return cls(m_matrix=mat, m_vector=np.atleast_1d(values))


@dataclass(frozen=True)
class WaldOutcome:
    statistic: float
    df: int
    p_value: float

    def reject_at(self, level: float) -> bool:
        if not 0.0 < level < 1.0:
            raise DomainError(f"level must lie in (0, 1), got {level}")
        return self.statistic > numerics.chisq_quantile(self.df, level)


@dataclass(frozen=True)
class PowerReport:
    ell: float
    sigma_w: float
    approx_power: float
    n_used: int


def wald_statistic(diff: np.ndarray, covariance: np.ndarray, n: int) -> float:
    """Quadratic form ``n * diff' covariance^{-1} diff``.

    Invariant under any joint invertible linear reparameterization of the
    difference and its covariance.
    """
    diff = np.atleast_1d(np.asarray(diff, dtype=float))
    cov = np.atleast_2d(np.asarray(covariance, dtype=float))
    try:
        solved = numerics.solve_spd(cov, diff)
    except DecompositionError as err:
        raise DecompositionError(f"covariance not positive definite: {err}") from err
    return float(n * diff @ solved)


def _outcome(stat: float, df: int) -> WaldOutcome:
    return WaldOutcome(statistic=stat, df=df, p_value=float(numerics.chisq_sf(stat, df)))


def wald_simple(data: ModelData, fit: FitResult, theta0: Theta) -> WaldOutcome:
    """Test theta = theta0 for the full parameter vector.

    The weighting covariance is evaluated at the null point; degrees of
    freedom equal dim(theta) = p + 1.
    """
    sigma0 = covariance_mlrm(data, theta0, fit.alpha).sigma_n
    diff = fit.theta_hat.to_array() - theta0.to_array()
    stat = wald_statistic(diff, sigma0, data.n_obs)
    return _outcome(stat, diff.size)


def wald_composite(data: ModelData, fit: FitResult, hyp: LinearHypothesis) -> WaldOutcome:
    """Test M' theta = m with the covariance plugged in at the estimate."""
    theta = fit.theta_hat
    if hyp.m_matrix.shape[0] != theta.dim:
        raise DomainError("restriction matrix does not match parameter dimension")
    sigma = covariance_mlrm(data, theta, fit.alpha).sigma_n
    m = hyp.m_matrix
    diff = m.T @ theta.to_array() - hyp.m_vector
    stat = wald_statistic(diff, m.T @ sigma @ m, data.n_obs)
    return _outcome(stat, hyp.n_restrictions)


def approx_power(
    theta_star: Theta,
    theta0: Theta,
    alpha: float,
    n: int,
    level: float,
    sigma_provider,
) -> PowerReport:
    """First-order approximation to the power of the simple test at theta*.

    ``sigma_provider(theta)`` must return the asymptotic covariance matrix at
    a parameter point.  With ``ell = (theta*-theta0)' Sigma(theta0)^{-1}
    (theta*-theta0)`` and the delta-method standard deviation ``sigma_w``,
    the approximation is ``1 - Phi(sqrt(n)/sigma_w * (chi2_quantile/n - ell))``.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    diff = theta_star.to_array() - theta0.to_array()
    df = diff.size
    if not np.any(diff != 0.0):
        return PowerReport(ell=0.0, sigma_w=0.0, approx_power=level, n_used=n)
    sigma0 = np.atleast_2d(sigma_provider(theta0))
    sigma_star = np.atleast_2d(sigma_provider(theta_star))
    inv_diff = numerics.solve_spd(sigma0, diff)
    ell = float(diff @ inv_diff)
    var_w = float(4.0 * inv_diff @ sigma_star @ inv_diff)
    if var_w <= 0.0:
        raise DomainError("degenerate direction: the power expansion has zero variance")
    sigma_w = math.sqrt(var_w)
    crit = numerics.chisq_quantile(df, level)
    arg = math.sqrt(n) / sigma_w * (crit / n - ell)
    return PowerReport(
        ell=ell,
        sigma_w=sigma_w,
        approx_power=float(1.0 - numerics.normal_cdf(arg)),
        n_used=n,
    )


def required_sample_size(
    theta_star: Theta,
    theta0: Theta,
    alpha: float,
    target_power: float,
    level: float,
    sigma_provider,
):
    """Smallest n at which the power approximation reaches ``target_power``.

    Solves the quadratic (in sqrt(n)) power equation and rounds up, so the
    reported size guarantees the target under the approximation.  Returns
    ``UNBOUNDED_SAMPLE_SIZE`` when the solution exceeds 1e9 (no detectable
    effect).
    """
    if not 0.0 < target_power < 1.0:
        raise DomainError(f"target power must lie in (0, 1), got {target_power}")
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    report = approx_power(theta_star, theta0, alpha, 1, level, sigma_provider)
    ell, sigma_w = report.ell, report.sigma_w
    if ell <= 0.0 or sigma_w <= 0.0:
        raise DomainError("theta* must differ from theta0 along a non-degenerate direction")
    df = theta_star.dim
    crit = numerics.chisq_quantile(df, level)
    a_term = sigma_w**2 * numerics.normal_quantile(1.0 - target_power) ** 2
    b_term = 2.0 * ell * crit
    value = (a_term + b_term + math.sqrt(a_term * (a_term + 2.0 * b_term))) / (2.0 * ell**2)
    if value > _MAX_SAMPLE_SIZE:
        return UNBOUNDED_SAMPLE_SIZE
    return max(1, int(math.ceil(value - 1e-12)))


def contiguous_power(
    hyp: LinearHypothesis,
    d: np.ndarray,
    alpha: float,
    level: float,
    sigma_n: np.ndarray,
) -> float:
    """Asymptotic power against the local alternative theta0 + d/sqrt(n).

    Under that drifting alternative the statistic is noncentral chi-square
    with r degrees of freedom and noncentrality
    ``delta = (M'd)' [M' sigma_n M]^{-1} (M'd)``.
    """
    if not 0.0 < level < 1.0:
        raise DomainError(f"level must lie in (0, 1), got {level}")
    d = np.atleast_1d(np.asarray(d, dtype=float))
    m = hyp.m_matrix
    if m.shape[0] != d.size:
        raise DomainError("shift vector does not match parameter dimension")
    d_star = m.T @ d
    inner = m.T @ np.atleast_2d(sigma_n) @ m
    delta = float(d_star @ numerics.solve_spd(inner, d_star))
    r = hyp.n_restrictions
    crit = numerics.chisq_quantile(r, level)
    return numerics.noncentral_chisq_sf(crit, r, delta)
