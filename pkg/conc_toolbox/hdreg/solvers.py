"""
Least squares, the Lasso by cyclic coordinate descent and the Poisson Lasso by
proximal gradient with backtracking.

Both penalized objectives use the 1/n-scaled loss

    lasso:   ||y - X b||_2^2 / n + lam ||b||_1
    poisson: -(1/n) sum_i [y_i x_i^T b - exp(x_i^T b)] + lam ||b||_1

and both solvers stop on the residual of the corresponding KKT system.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
import statsmodels.api as sm

from conc_toolbox.global_vars import solvers
from conc_toolbox.utils.errors import RankDeficientError, require

logger = logging.getLogger(__name__)


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


@dataclass
class LassoFit:
    beta_hat: np.ndarray
    lam: float
    kkt_residual: float
    iterations: int
    converged: bool
    objective_trace: list = field(default_factory=list)

    @property
    def objective(self):
        return self.objective_trace[-1] if self.objective_trace else float("nan")

    def to_dict(self):
        return {
            "lam": self.lam,
            "kkt_residual": self.kkt_residual,
            "iterations": self.iterations,
            "converged": self.converged,
            "objective": self.objective,
            "nonzeros": int(np.count_nonzero(self.beta_hat)),
        }


def ols(X, y, sigma):
    """
    Least-squares fit with its theoretical risks under noise level sigma.

    Returns:
        (beta, sigma^2 tr((X^T X)^-1), p sigma^2 / n)
    Raises:
        RankDeficientError -- p > n or X without full column rank.
    """
    X = np.asarray(X, dtype=float)
    n, p = X.shape
    if p > n or np.linalg.matrix_rank(X) < p:
        raise RankDeficientError(f"design of shape {X.shape} does not have full column rank")
    fit = sm.OLS(np.asarray(y, dtype=float), X).fit()
    mse_identity = sigma ** 2 * float(np.trace(fit.normalized_cov_params))
    return np.asarray(fit.params), mse_identity, p * sigma ** 2 / n


def _subgradient_gap(gradient, beta, lam):
    """
    Largest violation of 0 in gradient + lam * d||beta||_1, the smallest
    subgradient norm in the sup metric.
    """
    active = beta != 0
    gaps = np.where(
        active,
        np.abs(gradient + lam * np.sign(beta)),
        np.maximum(np.abs(gradient) - lam, 0.0),
    )
    return float(np.max(gaps)) if gaps.size else 0.0


def lasso_objective(X, y, beta, lam):
    r = y - X @ beta
    return float(r @ r) / len(y) + lam * float(np.sum(np.abs(beta)))


def lasso_kkt_residual(X, y, beta, lam):
    gradient = -2.0 * (X.T @ (y - X @ beta)) / len(y)
    return _subgradient_gap(gradient, beta, lam)


def lasso_cd(X, y, lam, tol=None, max_iter=None, beta0=None):
    """
    Cyclic coordinate descent on ||y - X b||^2 / n + lam ||b||_1.

    Each coordinate is set to soft(X_j^T r_j / n, lam / 2) / (X_j^T X_j / n),
    r_j being the residual without coordinate j. A sweep visits the columns in
    index order; iteration stops once the KKT residual drops to tol.
    """
    require(lam > 0, f"lam must be > 0, got {lam}")
    tol = solvers.lasso_tol if tol is None else tol
    max_iter = solvers.lasso_max_iter if max_iter is None else max_iter
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    n, p = X.shape
    beta = np.zeros(p) if beta0 is None else np.array(beta0, dtype=float)
    scale = np.sum(X ** 2, axis=0) / n
    r = y - X @ beta
    trace = [lasso_objective(X, y, beta, lam)]
    residual = lasso_kkt_residual(X, y, beta, lam)
    iterations = 0
    while residual > tol and iterations < max_iter:
        for j in range(p):
            old = beta[j]
            if scale[j] == 0:
                beta[j] = 0.0
            else:
                z = X[:, j] @ r / n + scale[j] * old
                beta[j] = soft_threshold(z, lam / 2.0) / scale[j]
            if beta[j] != old:
                r -= X[:, j] * (beta[j] - old)
        iterations += 1
        trace.append(float(r @ r) / n + lam * float(np.sum(np.abs(beta))))
        residual = _subgradient_gap(-2.0 * (X.T @ r) / n, beta, lam)
    converged = residual <= tol
    if not converged:
        logger.warning("lasso_cd stopped after %d sweeps with KKT residual %.3g", iterations, residual)
    return LassoFit(beta, lam, residual, iterations, converged, trace)


def _poisson_loss(X, y, beta):
    with np.errstate(over="ignore"):
        eta = X @ beta
        value = float(np.mean(np.exp(eta) - y * eta))
    return value if np.isfinite(value) else np.inf


def _poisson_gradient(X, y, beta):
    with np.errstate(over="ignore"):
        return X.T @ (np.exp(X @ beta) - y) / len(y)


def poisson_lasso_objective(X, y, beta, lam):
    return _poisson_loss(X, y, beta) + lam * float(np.sum(np.abs(beta)))


def poisson_kkt_residual(X, y, beta, lam):
    """
    Sup-norm violation of (1/n) X_j^T (y - exp(X b)) = lam sign(b_j) on the
    support and |(1/n) X_j^T (y - exp(X b))| <= lam off it.
    """
    return _subgradient_gap(_poisson_gradient(X, y, beta), beta, lam)


def poisson_lasso_pg(X, y, lam, tol=None, max_iter=None, step=1.0, armijo=None, beta0=None):
    """
    Proximal gradient on the penalized Poisson negative log-likelihood.

    Each iteration halves the step until the prox step b+ satisfies
    F(b+) <= F(b) - armijo ||b+ - b||^2 / step, so the objective trace never
    increases; an overflowing linear predictor makes F(b+) infinite and is
    rejected the same way. The next iteration starts from twice the accepted step.
    """
    require(lam > 0, f"lam must be > 0, got {lam}")
    require(step > 0, f"step must be > 0, got {step}")
    tol = solvers.poisson_tol if tol is None else tol
    max_iter = solvers.poisson_max_iter if max_iter is None else max_iter
    armijo = solvers.armijo if armijo is None else armijo
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    beta = np.zeros(X.shape[1]) if beta0 is None else np.array(beta0, dtype=float)
    objective = poisson_lasso_objective(X, y, beta, lam)
    require(np.isfinite(objective), "starting point has an infinite objective")
    trace = [objective]
    gradient = _poisson_gradient(X, y, beta)
    residual = _subgradient_gap(gradient, beta, lam)
    iterations = 0
    while residual > tol and iterations < max_iter:
        while True:
            candidate = soft_threshold(beta - step * gradient, step * lam)
            move = candidate - beta
            value = poisson_lasso_objective(X, y, candidate, lam)
            if value <= objective - armijo * float(move @ move) / step:
                break
            step /= 2.0
            if step < 1e-20:
                logger.warning("poisson_lasso_pg: line search collapsed at iteration %d", iterations)
                return LassoFit(beta, lam, residual, iterations, False, trace)
        beta, objective = candidate, value
        trace.append(objective)
        gradient = _poisson_gradient(X, y, beta)
        residual = _subgradient_gap(gradient, beta, lam)
        step *= 2.0
        iterations += 1
    converged = residual <= tol
    if not converged:
        logger.warning(
            "poisson_lasso_pg stopped after %d iterations with KKT residual %.3g", iterations, residual
        )
    return LassoFit(beta, lam, residual, iterations, converged, trace)
