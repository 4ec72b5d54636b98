"""Point estimation for the normal linear model: closed-form maximum
likelihood, the robust divergence-based estimator for alpha > 0, and the
asymptotic covariance matrices of both.

The alpha > 0 objective is non-concave, so the solver tracks the branch
rooted at the maximum-likelihood solution by continuation: starting from the
closed-form fit at alpha = 0, it increases alpha in steps of at most
``alpha_step`` and runs a damped Newton iteration at each stage, warm-started
from the previous stage.  An optional multistart pass probes other basins.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import numerics
from .exceptions import DecompositionError, DegenerateFitError, DomainError
from .model import ModelData, Theta

__all__ = [
    "FitResult",
    "CovarianceTriple",
    "DesignDiagnostics",
    "SolverOptions",
    "design_diagnostics",
    "fit_mle",
    "fit_rp",
    "fit_rp_path",
    "covariance_mlrm",
]

MIN_DESIGN_EIGENVALUE = 1e-12
DEGENERATE_SCALE_FACTOR = 1e-10


@dataclass(frozen=True)
class FitResult:
    theta_hat: Theta
    alpha: float
    converged: bool
    iterations: int
    gradient_norm: float
    sigma_n: np.ndarray
    objective_value: float


@dataclass(frozen=True)
class CovarianceTriple:
    """Sensitivity matrix, score variance, and the sandwich they compose.

    Stored in the positive-definite convention, normalized so that
    ``psi_n^{-1} omega_n psi_n^{-1} = sigma_n`` holds exactly.
    """

    psi_n: np.ndarray
    omega_n: np.ndarray
    sigma_n: np.ndarray


@dataclass(frozen=True)
class DesignDiagnostics:
    min_eigenvalue_xtx_over_n: float
    max_scaled_leverage: float
    max_abs_covariate: float


@dataclass(frozen=True)
class SolverOptions:
    tol: float = 1e-8
    max_iter: int = 200
    alpha_step: float = 0.1
    multistart: int = 0
    multistart_seed: int = 0

    def __post_init__(self):
        if self.tol <= 0 or self.max_iter < 1 or not 0 < self.alpha_step <= 0.1 + 1e-12:
            raise DomainError("invalid solver options")


def design_diagnostics(data: ModelData) -> DesignDiagnostics:
    """Conditioning summary of the fixed design.

    Fitting requires the smallest eigenvalue of X'X/n to be positive; the
    scaled leverage n * max_i x_i' (X'X)^{-1} x_i flags designs whose
    asymptotics are driven by a few rows.
    """
    x = data.design
    n = data.n_obs
    s = x.T @ x / n
    lam = numerics.min_eigenvalue(s)
    if lam > MIN_DESIGN_EIGENVALUE:
        xtx_inv = numerics.spd_inverse(x.T @ x)
        leverage = np.einsum("ij,jk,ik->i", x, xtx_inv, x)
        max_lev = float(n * leverage.max())
    else:
        max_lev = math.inf
    return DesignDiagnostics(
        min_eigenvalue_xtx_over_n=lam,
        max_scaled_leverage=max_lev,
        max_abs_covariate=float(np.abs(x).max()),
    )


def _require_full_rank(data: ModelData) -> None:
    diag = design_diagnostics(data)
    if diag.min_eigenvalue_xtx_over_n <= MIN_DESIGN_EIGENVALUE:
        raise DecompositionError(
            "design is rank deficient: min eigenvalue of X'X/n is "
            f"{diag.min_eigenvalue_xtx_over_n:.3e}"
        )


def _response_scale(y: np.ndarray) -> float:
    return max(1.0, float(np.sqrt(np.mean(y * y))))


def covariance_mlrm(data: ModelData, theta: Theta, alpha: float) -> CovarianceTriple:
    """Asymptotic covariance of sqrt(n)(theta_hat - theta) and its factors.

    The coefficient block is ``sigma^2 (1+a)^3 / (2a+1)^{3/2} (X'X/n)^{-1}``
    and the scale entry ``sigma^2 (1+a)^3 (3a^2+4a+2) / (4 (2a+1)^{5/2})``;
    the blocks are asymptotically independent.  At ``alpha = 0`` this is the
    classical ``diag(sigma^2 (X'X/n)^{-1}, sigma^2/2)``.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    a = alpha
    sig2 = theta.sigma**2
    p = data.n_params
    s = data.design.T @ data.design / data.n_obs

    psi = np.zeros((p + 1, p + 1))
    omega = np.zeros((p + 1, p + 1))
    sigma_n = np.zeros((p + 1, p + 1))
    psi[:p, :p] = s / (sig2 * (1 + a) ** 1.5)
    psi[p, p] = 2.0 / (sig2 * (1 + a) ** 2.5)
    omega[:p, :p] = s / (sig2 * (2 * a + 1) ** 1.5)
    omega[p, p] = (3 * a * a + 4 * a + 2) / (sig2 * (1 + a) ** 2 * (2 * a + 1) ** 2.5)
    sigma_n[:p, :p] = sig2 * (1 + a) ** 3 / (2 * a + 1) ** 1.5 * numerics.spd_inverse(s)
    sigma_n[p, p] = sig2 * (1 + a) ** 3 * (3 * a * a + 4 * a + 2) / (4 * (2 * a + 1) ** 2.5)
    return CovarianceTriple(psi_n=psi, omega_n=omega, sigma_n=sigma_n)


# ---------------------------------------------------------------------------
# vectorized objective internals (beta, s = log sigma parameterization)
# ---------------------------------------------------------------------------

def _objective_only(x, y, beta, s, a):
    sig = math.exp(s)
    r = (y - x @ beta) / sig
    c = ((1 + a) / (2 * math.pi)) ** (a / (2 * (1 + a)))
    with np.errstate(over="ignore", under="ignore"):
        v = c * sig ** (-a / (1 + a)) * np.exp(-0.5 * a * r * r)
    val = float(np.mean(v))
    return val if np.isfinite(val) else -math.inf


def _objective_grad_hess(x, y, beta, s, a):
    n, p = x.shape
    sig = math.exp(s)
    r = (y - x @ beta) / sig
    c = ((1 + a) / (2 * math.pi)) ** (a / (2 * (1 + a)))
    v = c * sig ** (-a / (1 + a)) * np.exp(-0.5 * a * r * r)
    q = r * r - 1.0 / (1 + a)
    val = float(np.mean(v))
    grad = np.empty(p + 1)
    grad[:p] = a / (n * sig) * (x.T @ (v * r))
    grad[p] = a * float(np.mean(v * q))
    hess = np.empty((p + 1, p + 1))
    hess[:p, :p] = a / (n * sig**2) * (x.T @ (x * (v * (a * r * r - 1.0))[:, None]))
    cross = a / (n * sig) * (x.T @ (v * r * (a * q - 2.0)))
    hess[:p, p] = cross
    hess[p, :p] = cross
    hess[p, p] = a * float(np.mean(v * (a * q * q - 2.0 * r * r)))
    return val, grad, 0.5 * (hess + hess.T)


def _newton_stage(x, y, beta, s, a, tol, max_iter, scale_floor):
    """Damped Newton ascent at fixed alpha; returns (beta, s, converged, iters)."""
    beta = beta.copy()
    eye = np.eye(x.shape[1] + 1)
    for it in range(max_iter):
        if math.exp(s) < scale_floor:
            raise DegenerateFitError(
                f"scale collapsed below {scale_floor:.3e} during fitting"
            )
        val, grad, hess = _objective_grad_hess(x, y, beta, s, a)
        # convergence on the (beta, sigma)-scale gradient
        g_check = grad.copy()
        g_check[-1] /= math.exp(s)
        if float(np.max(np.abs(g_check))) <= tol:
            return beta, s, True, it
        neg = -hess
        mu = 0.0
        for _ in range(64):
            try:
                direction = numerics.solve_spd(neg + mu * eye, grad)
                break
            except DecompositionError:
                mu = 1e-8 if mu == 0.0 else 10.0 * mu
        else:  # pragma: no cover - mu growth always terminates
            return beta, s, False, it
        # keep single stages from tunnelling into the degenerate spike
        if abs(direction[-1]) > 1.0:
            direction = direction / abs(direction[-1])
        slope = float(grad @ direction)
        # near the optimum the predicted gain drops below the objective's
        # float resolution; the slack keeps the search from stalling there
        slack = 1e-14 * (1.0 + abs(val))
        step = 1.0
        for _ in range(60):
            cand_beta = beta + step * direction[:-1]
            cand_s = s + step * direction[-1]
            if _objective_only(x, y, cand_beta, cand_s, a) >= val + 1e-4 * step * slope - slack:
                beta, s = cand_beta, cand_s
                break
            step *= 0.5
        else:
            return beta, s, False, it
    return beta, s, False, max_iter


def fit_mle(data: ModelData) -> FitResult:
    """Closed-form maximum-likelihood fit: OLS coefficients and the
    1/n-denominator scale estimate."""
    _require_full_rank(data)
    x, y = data.design, data.response
    n = data.n_obs
    beta = numerics.solve_spd(x.T @ x, x.T @ y)
    resid = y - x @ beta
    sigma = float(np.sqrt(np.mean(resid * resid)))
    if sigma < DEGENERATE_SCALE_FACTOR * _response_scale(y):
        raise DegenerateFitError(
            "residuals vanish: the likelihood is unbounded as sigma -> 0"
        )
    theta = Theta(beta=beta, sigma=sigma)
    grad = np.concatenate([x.T @ resid / (n * sigma**2), [0.0]])
    # sigma component is exactly zero at the 1/n solution by construction
    gnorm = float(np.max(np.abs(grad)))
    loglik = float(-0.5 * math.log(2 * math.pi) - math.log(sigma) - 0.5)
    return FitResult(
        theta_hat=theta,
        alpha=0.0,
        converged=True,
        iterations=0,
        gradient_norm=gnorm,
        sigma_n=covariance_mlrm(data, theta, 0.0).sigma_n,
        objective_value=loglik,
    )


def _continuation_targets(alphas, step):
    """Ascending ladder visiting every target with increments <= step.

    Stage values are computed by exact endpoint interpolation so each target
    is hit exactly (no floating-point drift from repeated addition).
    """
    targets = sorted(set(float(a) for a in alphas))
    ladder = []
    cur = 0.0
    for t in targets:
        if t == 0.0:
            continue
        stages = max(1, int(math.ceil((t - cur) / step - 1e-9)))
        ladder.extend(cur + (t - cur) * (j / stages) for j in range(1, stages))
        ladder.append(t)
        cur = t
    return targets, ladder


def fit_rp_path(data: ModelData, alphas, options: SolverOptions | None = None):
    """Fit the estimator at every alpha in ``alphas`` along one continuation
    run from the maximum-likelihood solution; returns ``{alpha: FitResult}``.
    """
    opts = options or SolverOptions()
    mle = fit_mle(data)
    x, y = data.design, data.response
    floor = DEGENERATE_SCALE_FACTOR * _response_scale(y)
    results: dict[float, FitResult] = {}
    targets, ladder = _continuation_targets(alphas, opts.alpha_step)
    if 0.0 in targets:
        results[0.0] = mle
    beta = mle.theta_hat.beta.copy()
    s = math.log(mle.theta_hat.sigma)
    target_set = {t for t in targets if t != 0.0}
    for a in ladder:
        beta, s, converged, iters = _newton_stage(
            x, y, beta, s, a, opts.tol, opts.max_iter, floor
        )
        if a in target_set:
            results[a] = _package_fit(data, x, y, beta, s, a, converged, iters, opts)
    return results


def _package_fit(data, x, y, beta, s, a, converged, iters, opts):
    if opts.multistart > 0:
        beta, s, converged, iters = _multistart_refine(
            x, y, beta, s, a, converged, iters, opts
        )
    sigma = math.exp(s)
    val, grad, _ = _objective_grad_hess(x, y, beta, s, a)
    g_check = grad.copy()
    g_check[-1] /= sigma
    theta = Theta(beta=beta, sigma=sigma)
    return FitResult(
        theta_hat=theta,
        alpha=a,
        converged=converged,
        iterations=iters,
        gradient_norm=float(np.max(np.abs(g_check))),
        sigma_n=covariance_mlrm(data, theta, a).sigma_n,
        objective_value=val,
    )


def _multistart_refine(x, y, beta, s, a, converged, iters, opts):
    """Probe other basins from subsample starting points; keep the best
    converged stationary point by objective value."""
    n, p = x.shape
    floor = DEGENERATE_SCALE_FACTOR * _response_scale(y)
    best = (_objective_only(x, y, beta, s, a), beta, s, converged, iters)
    stream = numerics.RngStream(opts.multistart_seed, stream_id=0)
    gen = stream.generator
    m = max(p + 2, n // 2)
    for _ in range(opts.multistart):
        idx = gen.choice(n, size=m, replace=False)
        xs, ys = x[idx], y[idx]
        try:
            b0 = np.linalg.solve(xs.T @ xs, xs.T @ ys)
        except np.linalg.LinAlgError:
            continue
        resid = ys - xs @ b0
        sd = float(np.sqrt(np.mean(resid * resid)))
        if sd < floor:
            continue
        s0 = math.log(sd * (0.3 + 0.9 * gen.random()))
        try:
            b1, s1, ok, it1 = _newton_stage(x, y, b0, s0, a, opts.tol, opts.max_iter, floor)
        except DegenerateFitError:
            continue
        if ok:
            cand = (_objective_only(x, y, b1, s1, a), b1, s1, ok, it1)
            if cand[0] > best[0]:
                best = cand
    return best[1], best[2], best[3], best[4]


def fit_rp(
    data: ModelData,
    alpha: float,
    init: Theta | None = None,
    options: SolverOptions | None = None,
) -> FitResult:
    """Fit the minimum-divergence estimator at a single alpha.

    ``alpha = 0`` returns the closed-form fit.  For ``alpha > 0`` the default
    start is the alpha-continuation path from the maximum-likelihood fit; an
    explicit ``init`` adds a direct Newton run from that point and the better
    of the two stationary points (by objective value) is returned.  A
    non-converged run is returned flagged, never silently.
    """
    if alpha < 0:
        raise DomainError(f"alpha must be nonnegative, got {alpha}")
    opts = options or SolverOptions()
    if alpha == 0.0:
        return fit_mle(data)
    result = fit_rp_path(data, [alpha], opts)[alpha]
    if init is not None:
        x, y = data.design, data.response
        floor = DEGENERATE_SCALE_FACTOR * _response_scale(y)
        beta, s, ok, iters = _newton_stage(
            x, y, init.beta.copy(), math.log(init.sigma), alpha, opts.tol, opts.max_iter, floor
        )
        alt = _package_fit(data, x, y, beta, s, alpha, ok, iters, replace(opts, multistart=0))
        if (alt.converged and not result.converged) or (
            alt.converged == result.converged
            and alt.objective_value > result.objective_value
        ):
            result = alt
    return result
