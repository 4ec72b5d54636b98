"""Influence analysis of the estimator and of the Wald-type tests:
first-order influence functions (generic quadrature route and the normal
closed form), second-order influence of the test functionals, gross-error
sensitivity, and asymptotic relative efficiency.

Conventions.  The influence function in direction ``i0`` is the Gateaux
derivative of the estimating functional under contamination of that single
direction, scaled by n:

    IF(t) = Psi_n^{-1} psi_{i0}(t),

where ``psi_i`` is the per-observation estimating score and ``Psi_n`` the
averaged sensitivity matrix in the same normalization (the one returned by
``covariance_mlrm``).  For the normal family both components then carry the
physically correct units (response units for the coefficient part, scale
units for the sigma part), and the coefficient part of the gross-error
sensitivity is ``sigma (1+a)^{3/2} a^{-1/2} e^{-1/2} ||S^{-1} x_{i0}||``;
the sigma part is ``sigma (1+a)^{5/2} a^{-1} exp(-(3a+2)/(2(a+1)))``, i.e.
proportional to sigma like every scale statistic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import numerics
from .estimation import covariance_mlrm
from .exceptions import DecompositionError, DomainError
from .inference import LinearHypothesis
from .model import DensityFamily, ModelData, Theta

__all__ = [
    "IFRequest",
    "IFReport",
    "if_general",
    "if_mlrm_closed",
    "if2_simple",
    "if2_composite",
    "gross_error_sensitivity",
    "are",
    "UNBOUNDED_SENSITIVITY",
]

UNBOUNDED_SENSITIVITY = math.inf


@dataclass(frozen=True)
class IFRequest:
    """Which direction to contaminate and where.

    ``direction`` is an observation index, or ``"all"`` to contaminate every
    direction at the same point.
    """

    contamination_points: np.ndarray
    theta: Theta
    alpha: float
    direction: int | str = "all"

    def __post_init__(self):
        pts = np.atleast_1d(np.asarray(self.contamination_points, dtype=float))
        object.__setattr__(self, "contamination_points", pts)
        if pts.size < 1:
            raise DomainError("need at least one contamination point")
        if self.alpha < 0:
            raise DomainError(f"alpha must be nonnegative, got {self.alpha}")
        if self.direction != "all" and not isinstance(self.direction, (int, np.integer)):
            raise DomainError("direction must be an observation index or 'all'")


@dataclass(frozen=True)
class IFReport:
    points: np.ndarray
    first_order: np.ndarray
    sup_norm: float
    second_order_simple: np.ndarray | None = None
    second_order_composite: np.ndarray | None = None


def _direction_indices(req: IFRequest, n: int):
    if req.direction == "all":
        return range(n)
    i0 = int(req.direction)
    if not 0 <= i0 < n:
        raise DomainError(f"direction {i0} outside 0..{n - 1}")
    return [i0]


# ---------------------------------------------------------------------------
# general (integral-contract) route
# ---------------------------------------------------------------------------

def _sensitivity_matrix(family: DensityFamily, theta: Theta, alpha: float) -> np.ndarray:
    """Averaged sensitivity of the estimating functional at the model.

    Assembled from the two per-direction curvature blocks of the estimating
    equations; at the model they share every integral, with exponent
    alpha + 1 throughout, and their difference is the tilted score
    covariance.
    """
    c = alpha + 1.0
    n = family.n_directions
    dim = family.param_dim
    total = np.zeros((dim, dim))
    for i in range(n):
        j0 = family.power_integral(i, theta, c)
        j1 = family.power_score_integral(i, theta, c)
        j2 = family.power_score_outer_integral(i, theta, c)
        j3 = family.power_score_jacobian_integral(i, theta, c)
        a_full = ((1.0 + alpha) * j2 + j3) * j0 - (1.0 + alpha) * np.outer(j1, j1)
        a_star = (alpha * j2 + j3) * j0 - alpha * np.outer(j1, j1)
        total += (a_full - a_star) / j0**2
    return total / n


def _direction_score(family, i, t, theta, alpha):
    """Estimating score of direction i at contamination point t, normalized
    by the same convention as the sensitivity matrix."""
    c = alpha + 1.0
    j0 = family.power_integral(i, theta, c)
    j1 = family.power_score_integral(i, theta, c)
    u = family.score_vector(i, t, theta)
    f_alpha = math.exp(alpha * family.log_density(i, t, theta))
    return f_alpha * (u * j0 - j1) / j0**2


def if_general(family: DensityFamily, data: ModelData, req: IFRequest) -> IFReport:
    """First-order influence through the family's integral contract.

    Works for any family (quadrature-backed or closed-form); at the model
    the sensitivity matrix coincides with the estimating-score normalization
    of ``psi_n`` up to the shared tilt factor, which cancels in the product.
    """
    theta, alpha = req.theta, req.alpha
    m = _sensitivity_matrix(family, theta, alpha)
    try:
        m_inv = numerics.spd_inverse(m)
    except DecompositionError as err:
        raise DecompositionError(f"sensitivity matrix singular: {err}") from err
    idx = _direction_indices(req, family.n_directions)
    # the per-direction estimating score is 1/sqrt(1+alpha)-tilted relative
    # to the psi normalization; m carries the same factor, so scaling cancels
    values = np.empty((req.contamination_points.size, family.param_dim))
    for k, t in enumerate(req.contamination_points):
        num = np.zeros(family.param_dim)
        for i in idx:
            num += _direction_score(family, i, t, theta, alpha)
        values[k] = m_inv @ num
    return IFReport(
        points=req.contamination_points,
        first_order=values,
        sup_norm=float(np.max(np.linalg.norm(values, axis=1))),
    )


# ---------------------------------------------------------------------------
# normal-family closed form
# ---------------------------------------------------------------------------

def _closed_direction_score(data: ModelData, i, t, theta: Theta, alpha):
    """psi_i(t) for the normal linear family in the estimating-equation
    normalization: exp(-a r^2/2) (r x_i, r^2 - 1/(1+a)) / sigma."""
    sig = theta.sigma
    r = (t - float(data.design[i] @ theta.beta)) / sig
    w = math.exp(-0.5 * alpha * r * r)
    return np.concatenate(
        [w * r * data.design[i] / sig, [w * (r * r - 1.0 / (1.0 + alpha)) / sig]]
    )


def _stacked_scores(data: ModelData, req: IFRequest) -> np.ndarray:
    idx = _direction_indices(req, data.n_obs)
    out = np.zeros((req.contamination_points.size, data.n_params + 1))
    for k, t in enumerate(req.contamination_points):
        for i in idx:
            out[k] += _closed_direction_score(data, i, t, req.theta, req.alpha)
    return out


def if_mlrm_closed(data: ModelData, req: IFRequest) -> IFReport:
    """Closed-form first-order influence for the normal linear model.

    ``IF = psi_n^{-1} psi_{i0}(t)``; the coefficient part is
    ``sigma (1+a)^{3/2} e^{-a r^2/2} r S^{-1} x_{i0}`` and the sigma part
    ``sigma (1+a)^{5/2}/2 e^{-a r^2/2} (r^2 - 1/(1+a))``.  At ``alpha = 0``
    the coefficient part grows linearly in the residual (the unbounded
    maximum-likelihood case); for ``alpha > 0`` both parts vanish at extreme
    contamination.
    """
    psi = covariance_mlrm(data, req.theta, req.alpha).psi_n
    scores = _stacked_scores(data, req)
    values = np.linalg.solve(psi, scores.T).T
    return IFReport(
        points=req.contamination_points,
        first_order=values,
        sup_norm=float(np.max(np.linalg.norm(values, axis=1))),
    )


# ---------------------------------------------------------------------------
# second-order influence of the Wald functionals
# ---------------------------------------------------------------------------

def if2_simple(data: ModelData, req: IFRequest) -> IFReport:
    """Second-order influence of the simple-null Wald functional.

    The first-order term vanishes at the null, leaving the quadratic
    ``2 psi' psi_n^{-1} sigma_n^{-1} psi_n^{-1} psi = 2 IF' sigma_n^{-1} IF``.
    """
    cov = covariance_mlrm(data, req.theta, req.alpha)
    scores = _stacked_scores(data, req)
    psi_inv = numerics.spd_inverse(cov.psi_n)
    middle = psi_inv @ numerics.spd_inverse(cov.sigma_n) @ psi_inv
    second = 2.0 * np.einsum("ki,ij,kj->k", scores, middle, scores)
    base = if_mlrm_closed(data, req)
    return IFReport(
        points=req.contamination_points,
        first_order=base.first_order,
        sup_norm=base.sup_norm,
        second_order_simple=second,
    )


def if2_composite(data: ModelData, req: IFRequest, hyp: LinearHypothesis) -> IFReport:
    """Second-order influence of the composite-null Wald functional:
    ``2 [psi_n^{-1} psi]' M (M' sigma_n M)^{-1} M' [psi_n^{-1} psi]``."""
    cov = covariance_mlrm(data, req.theta, req.alpha)
    base = if_mlrm_closed(data, req)
    m = hyp.m_matrix
    inner = m.T @ cov.sigma_n @ m
    projected = base.first_order @ m
    second = 2.0 * np.einsum(
        "ki,ij,kj->k", projected, numerics.spd_inverse(inner), projected
    )
    return IFReport(
        points=req.contamination_points,
        first_order=base.first_order,
        sup_norm=base.sup_norm,
        second_order_composite=second,
    )


# ---------------------------------------------------------------------------
# gross-error sensitivity and efficiency
# ---------------------------------------------------------------------------

def gross_error_sensitivity(data: ModelData, i0: int, theta: Theta, alpha: float):
    """Supremum over contamination points of the influence norm, split into
    the coefficient and scale components.

    Closed forms: the coefficient part peaks at standardized residual
    ``1/sqrt(a)``, the scale part at ``r^2 = (3a+2)/(a(a+1))``.  Both are
    infinite at ``alpha = 0``.
    """
    if not 0 <= i0 < data.n_obs:
        raise DomainError(f"direction {i0} outside 0..{data.n_obs - 1}")
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    if alpha == 0.0:
        return UNBOUNDED_SENSITIVITY, UNBOUNDED_SENSITIVITY
    a = alpha
    sig = theta.sigma
    s = data.design.T @ data.design / data.n_obs
    s_inv_x = numerics.solve_spd(s, data.design[i0])
    gamma_beta = (
        sig * (1 + a) ** 1.5 / math.sqrt(a) * math.exp(-0.5) * float(np.linalg.norm(s_inv_x))
    )
    gamma_sigma = sig * (1 + a) ** 2.5 / a * math.exp(-(3 * a + 2) / (2 * (a + 1)))
    return gamma_beta, gamma_sigma


def are(alpha: float):
    """Asymptotic efficiency of the robust estimator relative to maximum
    likelihood, as variance ratios in (0, 1]: one value for the coefficients
    and one for the scale."""
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    a = alpha
    are_beta = (2 * a + 1) ** 1.5 / (1 + a) ** 3
    are_sigma = 2.0 * (2 * a + 1) ** 2.5 / ((1 + a) ** 3 * (3 * a * a + 4 * a + 2))
    return float(are_beta), float(are_sigma)
