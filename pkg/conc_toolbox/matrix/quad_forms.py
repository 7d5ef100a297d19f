"""Concentration of quadratic forms xi^T A xi."""
import math
from dataclasses import dataclass

import numpy as np

from conc_toolbox.matrix.eigen import as_matrix, matrix_norms, operator_norm
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.numerics import invert_sqrt_linear


@dataclass(frozen=True)
class QuadraticThreshold:
    """``threshold`` is exceeded with probability at most ``p``."""

    threshold: float
    p: float

    def to_dict(self):
        return {"threshold": self.threshold, "p": self.p}


def _scales(sigma, n):
    sigma = np.broadcast_to(np.asarray(sigma, dtype=float), (n,))
    require(np.all(sigma >= 0), "standard deviations must be >= 0")
    return sigma


def _chaos_norms(A, sigma):
    a = as_matrix(A).require_square().entries
    sigma = _scales(sigma, a.shape[0])
    scaled = sigma[:, None] * a * sigma[None, :]
    norms = matrix_norms(scaled)
    return norms.frobenius, norms.operator


def gaussian_chaos(A, sigma, x):
    """
    For centered gaussian xi with sd sigma_i, xi^T A xi - E xi^T A xi exceeds
    2 ||D A D||_F sqrt(x) + 2 ||D A D||_2 x with probability at most e^(-x).
    """
    require(x >= 0, f"x must be >= 0, got {x}")
    fro, op = _chaos_norms(A, sigma)
    return QuadraticThreshold(2.0 * fro * math.sqrt(x) + 2.0 * op * x, math.exp(-x))


def gaussian_chaos_tail(A, sigma, t):
    """The chaos bound as a right tail in t."""
    fro, op = _chaos_norms(A, sigma)
    if fro == 0:
        return 1.0 if t <= 0 else 0.0
    return math.exp(-invert_sqrt_linear(0.0, 2.0 * fro, 2.0 * op, t))


def chi_square_tail(n, x):
    """chi-square(n) - n via the chaos bound with A = I."""
    require(n >= 1, f"degrees of freedom must be >= 1, got {n}")
    return gaussian_chaos(np.eye(n), 1.0, x)


def _diagonal_free(A):
    a = as_matrix(A).require_square().entries
    require(np.all(np.diag(a) == 0), "matrix must have a zero diagonal")
    return a


def hw_diagfree(A, K, t):
    """exp(-(t^2 / (64 K^4 ||A||_F) ^ t / (8 sqrt(2) K^2 ||A||_2))) for zero-diagonal A."""
    a = _diagonal_free(A)
    require(K > 0, f"K must be > 0, got {K}")
    if t <= 0:
        return 1.0
    norms = matrix_norms(a)
    if norms.frobenius == 0:
        return 0.0
    exponent = min(
        t ** 2 / (64.0 * K ** 4 * norms.frobenius),
        t / (8.0 * math.sqrt(2.0) * K ** 2 * norms.operator),
    )
    return min(1.0, math.exp(-exponent))


def hw_moment_gaussian(s):
    """(sigma_i, kappa) satisfying E|xi|^(2p) <= p! sigma_i^2 kappa^(2p-2) / 2 for N(0, s^2)."""
    require(s > 0, f"sd must be > 0, got {s}")
    return math.sqrt(2.0) * s, math.sqrt(2.0) * s


def _moment_norms(A, sigma):
    a = as_matrix(A).require_square().entries
    sigma = _scales(sigma, a.shape[0])
    return float(np.linalg.norm(a * sigma[None, :], "fro")), operator_norm(a)


def hw_moment(A, sigma, kappa, t):
    """exp(-(t^2 / (192 kappa^2 ||A D||_F^2) ^ t / (256 kappa^2 ||A||_2)))."""
    require(kappa > 0, f"kappa must be > 0, got {kappa}")
    if t <= 0:
        return 1.0
    fro, op = _moment_norms(A, sigma)
    if fro == 0 or op == 0:
        return 0.0
    exponent = min(t ** 2 / (192.0 * kappa ** 2 * fro ** 2), t / (256.0 * kappa ** 2 * op))
    return min(1.0, math.exp(-exponent))


def hw_moment_radius(A, sigma, kappa, x):
    """256 kappa^2 ||A||_2 x + 8 sqrt(3) kappa ||A D||_F sqrt(x), exceeded with probability e^(-x)."""
    require(kappa > 0 and x >= 0, "need kappa > 0 and x >= 0")
    fro, op = _moment_norms(A, sigma)
    return 256.0 * kappa ** 2 * op * x + 8.0 * math.sqrt(3.0) * kappa * fro * math.sqrt(x)


def hw_rv(A, K, t, c):
    """exp(-c (t^2 / (K^4 ||A||_F^2) ^ t / (K^2 ||A||_2))) with a caller-supplied constant c."""
    require(K > 0 and c >= 0, "need K > 0 and c >= 0")
    if t <= 0 or c == 0:
        return 1.0
    norms = matrix_norms(A)
    if norms.frobenius == 0:
        return 0.0
    exponent = min(t ** 2 / (K ** 4 * norms.frobenius ** 2), t / (K ** 2 * norms.operator))
    return min(1.0, math.exp(-c * exponent))


@dataclass(frozen=True)
class _VectorQuadratic:
    central: float
    sqrt_coef: float
    linear_coef: float

    def threshold(self, t):
        return self.central + self.sqrt_coef * math.sqrt(t) + self.linear_coef * t


def _vector_quadratic(A, sigma, mu):
    a = as_matrix(A).entries
    require(sigma > 0, f"sigma must be > 0, got {sigma}")
    cov = a.T @ a
    mu = np.zeros(a.shape[1]) if mu is None else np.asarray(mu, dtype=float)
    require(mu.shape == (a.shape[1],), f"mean vector must have length {a.shape[1]}")
    trace = float(np.trace(cov))
    trace_sq = float(np.sum(cov * cov))
    op = operator_norm(cov)
    mean_term = float(mu @ cov @ mu)
    sqrt_coef = 2.0 * sigma ** 2 * math.sqrt(trace_sq)
    if mean_term > 0 and trace_sq > 0:
        sqrt_coef += 2.0 * mean_term * op / math.sqrt(trace_sq)
    return _VectorQuadratic(sigma ** 2 * trace + mean_term, sqrt_coef, 2.0 * sigma ** 2 * op)


def subg_vector_quadratic(A, sigma, mu, t):
    """
    ||A xi||^2 exceeds sigma^2 [tr S + 2 sqrt(tr(S^2) t) + 2 ||S|| t]
    + tr(S mu mu^T)(1 + 2 sqrt(||S||^2 t / tr(S^2))) with probability at most e^(-t),
    S = A^T A.
    """
    require(t >= 0, f"t must be >= 0, got {t}")
    form = _vector_quadratic(A, sigma, mu)
    return QuadraticThreshold(form.threshold(t), math.exp(-t))


def subg_vector_quadratic_tail(A, sigma, mu, level):
    """P(||A xi||^2 > level) as a function of the level."""
    form = _vector_quadratic(A, sigma, mu)
    if form.sqrt_coef == 0 and form.linear_coef == 0:
        return 1.0 if level <= form.central else 0.0
    return math.exp(-invert_sqrt_linear(form.central, form.sqrt_coef, form.linear_coef, level))


def subweibull_eta(A, q, t):
    """min(t^2/||A||_F^2, t/||A||_op, (t/||A||_{2->inf})^(2/(q+1)), (t/||A||_max)^(1/q))."""
    a = as_matrix(A).require_square().entries
    require(np.allclose(a, a.T), "matrix must be symmetric")
    require(int(q) == q and q >= 1, f"q must be a positive integer, got {q}")
    norms = matrix_norms(a)
    entry_max = float(np.max(np.abs(a)))
    if entry_max == 0:
        return math.inf
    return min(
        t ** 2 / norms.frobenius ** 2,
        t / norms.operator,
        (t / norms.row_l2_max) ** (2.0 / (q + 1)),
        (t / entry_max) ** (1.0 / q),
    )


def subweibull_quadratic(A, M, q, t, C):
    """2 exp(-eta(A, q, t / M^2) / C) with a caller-supplied constant C."""
    require(M > 0 and C > 0, "need M > 0 and C > 0")
    if t <= 0:
        return 1.0
    return min(1.0, 2.0 * math.exp(-subweibull_eta(A, q, t / M ** 2) / C))
