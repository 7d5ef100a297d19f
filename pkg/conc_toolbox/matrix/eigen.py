"""Dense matrices, their norms, sample-covariance eigenvalues and Bai-Yin bounds."""
import logging
import math
from dataclasses import dataclass

import numpy as np
import pandas as pd
from scipy.sparse.linalg import eigsh

from conc_toolbox.global_vars import solvers, tolerances
from conc_toolbox.utils.errors import NoSolutionError, require

logger = logging.getLogger(__name__)

# up to this size extreme eigenvalues come from a full symmetric decomposition
SMALL_MATRIX = 64


class DenseMatrix(object):
    """Row-major real matrix with finite entries."""

    def __init__(self, entries):
        entries = np.atleast_2d(np.asarray(entries, dtype=float))
        require(entries.ndim == 2, "a matrix needs two dimensions")
        require(np.all(np.isfinite(entries)), "matrix entries must be finite")
        self.entries = entries
        self.entries.setflags(write=False)

    @classmethod
    def from_csv(cls, path):
        return cls(pd.read_csv(path, header=None).to_numpy(dtype=float))

    @property
    def rows(self):
        return self.entries.shape[0]

    @property
    def cols(self):
        return self.entries.shape[1]

    @property
    def is_square(self):
        return self.rows == self.cols

    def require_square(self):
        require(self.is_square, f"expected a square matrix, got {self.rows}x{self.cols}")
        return self

    def __repr__(self):
        return f"DenseMatrix({self.rows}x{self.cols})"


def as_matrix(A):
    return A if isinstance(A, DenseMatrix) else DenseMatrix(A)


@dataclass(frozen=True)
class MatrixNorms:
    frobenius: float
    operator: float
    row_l2_max: float

    def to_dict(self):
        return {"frobenius": self.frobenius, "operator": self.operator, "row_l2_max": self.row_l2_max}


def operator_norm(A, tol=None, max_iter=None):
    """Largest singular value by power iteration on A^T A."""
    tol = tolerances.power_iteration_tol if tol is None else tol
    max_iter = tolerances.power_iteration_max_iter if max_iter is None else max_iter
    a = as_matrix(A).entries
    if not np.any(a):
        return 0.0
    x = np.random.default_rng(0).standard_normal(a.shape[1])
    x /= np.linalg.norm(x)
    value = 0.0
    for _ in range(max_iter):
        y = a.T @ (a @ x)
        new_value = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0:
            return 0.0
        x = y / norm
        if abs(new_value - value) <= tol * new_value:
            return math.sqrt(new_value)
        value = new_value
    logger.warning("power iteration stopped after %d iterations", max_iter)
    return math.sqrt(value)


def matrix_norms(A):
    a = as_matrix(A).entries
    return MatrixNorms(
        frobenius=float(np.linalg.norm(a, "fro")),
        operator=operator_norm(a),
        row_l2_max=float(np.max(np.linalg.norm(a, axis=1))),
    )


def extreme_eigenvalues(S, tol=None):
    """(lambda_min, lambda_max) of a symmetric matrix."""
    tol = tolerances.eigen_tol if tol is None else tol
    s = as_matrix(S).require_square().entries
    s = 0.5 * (s + s.T)
    if s.shape[0] <= SMALL_MATRIX:
        values = np.linalg.eigvalsh(s)
        return float(values[0]), float(values[-1])
    v0 = np.ones(s.shape[0])
    top = float(eigsh(s, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False)[0])
    # lambda_min from the top of the shifted matrix top*I - S
    shifted = top * np.eye(s.shape[0]) - s
    if not np.any(np.abs(shifted) > tol * max(1.0, abs(top))):
        return top, top
    gap = float(eigsh(shifted, k=1, which="LA", tol=tol, v0=v0, return_eigenvectors=False)[0])
    return top - gap, top


def sample_cov_extreme(X):
    """Extreme eigenvalues of S_n = X^T X / n for an n x p design."""
    x = as_matrix(X).entries
    n = x.shape[0]
    return extreme_eigenvalues(x.T @ x / n)


def baiyin_edges(sigma2, y):
    """Limits sigma^2 (1 -+ sqrt(y))^2 of the extreme sample-covariance eigenvalues."""
    require(sigma2 > 0, f"sigma2 must be > 0, got {sigma2}")
    require(0 <= y <= 1, f"aspect ratio must lie in [0, 1], got {y}")
    root = math.sqrt(y)
    return sigma2 * (1.0 - root) ** 2, sigma2 * (1.0 + root) ** 2


@dataclass(frozen=True)
class BaiYinBound:
    delta: float
    t: float
    op_norm_bound: float
    probability: float
    eig_window: tuple
    iterations: int

    def to_dict(self):
        return {
            "delta": self.delta,
            "t": self.t,
            "op_norm_bound": self.op_norm_bound,
            "probability": self.probability,
            "eig_window": list(self.eig_window),
            "iterations": self.iterations,
        }


def baiyin_min_c(n, p):
    return 2.0 * n * math.log(9.0) / p


def baiyin_nonasymptotic(n, p, theta, c, damping=None, tol=None, max_iter=None):
    """
    Solve t = c theta max(delta, delta^2), delta = 2c (sqrt(p/n) + t / sqrt(n))
    by damped iteration from t = 0.

    Raises NoSolutionError when the iteration diverges or does not settle.
    """
    require(n >= 1 and p >= 1, "need n >= 1 and p >= 1")
    require(theta > 0, f"theta must be > 0, got {theta}")
    require(c >= baiyin_min_c(n, p), f"c must be at least 2 n log 9 / p = {baiyin_min_c(n, p):g}, got {c}")
    damping = solvers.fixed_point_damping if damping is None else damping
    tol = solvers.fixed_point_tol if tol is None else tol
    max_iter = solvers.fixed_point_max_iter if max_iter is None else max_iter

    def delta_of(t):
        return 2.0 * c * (math.sqrt(p / n) + t / math.sqrt(n))

    def update(t):
        delta = delta_of(t)
        return c * theta * max(delta, delta * delta)

    t = 0.0
    for iteration in range(1, max_iter + 1):
        new_t = (1.0 - damping) * t + damping * update(t)
        if not math.isfinite(new_t) or new_t > 1e150:
            raise NoSolutionError(f"Bai-Yin fixed point diverges for (n, p, theta, c) = ({n}, {p}, {theta}, {c})")
        if abs(new_t - t) <= tol * max(1.0, new_t):
            t = new_t
            break
        t = new_t
    else:
        raise NoSolutionError(f"Bai-Yin fixed point did not settle in {max_iter} iterations")
    delta = delta_of(t)
    bound = 2.0 * c * theta * max(delta, delta * delta)
    probability = max(0.0, 1.0 - 2.0 * math.exp(-c * t * t))
    return BaiYinBound(delta, t, bound, probability, (1.0 - t * t, 1.0 + t * t), iteration)
