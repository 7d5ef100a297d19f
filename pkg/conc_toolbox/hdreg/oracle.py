"""
Tuning parameters, events and oracle inequalities for the Lasso and the
Poisson Lasso, plus cone and restricted-eigenvalue diagnostics.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from conc_toolbox.global_vars import simulation
from conc_toolbox.matrix.quad_forms import subg_vector_quadratic
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.rng import RngStream

logger = logging.getLogger(__name__)


def lasso_lambda(A, sigma, n, p):
    """lam = A sigma sqrt(log p / n)."""
    require(A > 0 and sigma > 0, "need A > 0 and sigma > 0")
    require(n >= 1 and p >= 2, f"need n >= 1 and p >= 2, got n={n}, p={p}")
    return A * sigma * math.sqrt(math.log(p) / n)


def kkt_event(X, y, beta_star, lam):
    """Whether ||X^T (y - X beta*) / n||_inf <= lam / 2."""
    X = np.asarray(X, dtype=float)
    score = X.T @ (np.asarray(y, dtype=float) - X @ beta_star) / X.shape[0]
    return bool(np.max(np.abs(score)) <= lam / 2.0)


def kkt_probability(A, p):
    """Lower bound 1 - 2 p^(1 - A^2/8) on the probability of the KKT event."""
    return max(0.0, 1.0 - 2.0 * p ** (1.0 - A ** 2 / 8.0))


def cone_check(u, support, eta, atol=1e-10):
    """Whether ||u_{S^c}||_1 <= eta ||u_S||_1."""
    u = np.asarray(u, dtype=float)
    inside = np.zeros(len(u), dtype=bool)
    inside[np.asarray(support, dtype=int)] = True
    return bool(np.sum(np.abs(u[~inside])) <= eta * np.sum(np.abs(u[inside])) + atol)


def project_l1_ball(v, radius):
    """Euclidean projection of v onto {x : ||x||_1 <= radius}."""
    if radius <= 0:
        return np.zeros_like(v)
    magnitude = np.abs(v)
    if magnitude.sum() <= radius:
        return v.copy()
    ordered = np.sort(magnitude)[::-1]
    cumulative = np.cumsum(ordered) - radius
    index = np.arange(1, len(v) + 1)
    rho = np.nonzero(ordered - cumulative / index > 0)[0][-1]
    theta = cumulative[rho] / (rho + 1.0)
    return np.sign(v) * np.maximum(magnitude - theta, 0.0)


def _into_cone(u, inside, eta):
    u = u.copy()
    u[~inside] = project_l1_ball(u[~inside], eta * np.sum(np.abs(u[inside])))
    return u


def _cone_minimum(gram, support, eta, restarts, tol, max_iter, seed, restricted):
    G = np.asarray(gram, dtype=float)
    p = G.shape[0]
    require(G.shape == (p, p), "gram must be square")
    inside = np.zeros(p, dtype=bool)
    inside[np.asarray(support, dtype=int)] = True
    require(inside.any(), "support must not be empty")
    require(eta >= 0, f"eta must be >= 0, got {eta}")
    weights = inside.astype(float) if restricted else np.ones(p)

    def quotient(u):
        return float(u @ G @ u) / float(u @ (weights * u))

    step0 = 0.5 / max(float(np.max(np.abs(np.linalg.eigvalsh((G + G.T) / 2.0)))), 1e-12)
    generator = RngStream(simulation.seed if seed is None else seed).generator()
    sub = G[np.ix_(inside, inside)]
    starts = []
    first = np.zeros(p)
    first[inside] = np.linalg.eigh((sub + sub.T) / 2.0)[1][:, 0]
    starts.append(first)
    for _ in range(max(restarts - 1, 0)):
        starts.append(_into_cone(generator.standard_normal(p), inside, eta))

    best = math.inf
    for u in starts:
        u = u / math.sqrt(float(u @ (weights * u)))
        value = quotient(u)
        step = step0
        for _ in range(max_iter):
            gradient = 2.0 * (G @ u - value * weights * u)
            improved = False
            while step > 1e-16:
                candidate = _into_cone(u - step * gradient, inside, eta)
                norm = float(candidate @ (weights * candidate))
                if norm > 0:
                    candidate /= math.sqrt(norm)
                    new_value = quotient(candidate)
                    if new_value < value:
                        improved = True
                        break
                step /= 2.0
            if not improved:
                break
            gain = value - new_value
            u, value = candidate, new_value
            step *= 2.0
            if gain <= tol * max(1.0, abs(value)):
                break
        best = min(best, value)
    return max(best, 0.0)


def re_estimate(gram, support, eta, restarts=10, tol=1e-12, max_iter=5000, seed=None):
    """
    Heuristic estimate of min u^T G u / ||u||_2^2 over the cone
    ||u_{S^c}||_1 <= eta ||u_S||_1.

    Projected gradient descent from the bottom eigenvector of G_SS and from
    ``restarts - 1`` random cone points; the smallest value found is returned.
    It can only overestimate the true minimum, and never exceeds
    lambda_min(G_SS).
    """
    return _cone_minimum(gram, support, eta, restarts, tol, max_iter, seed, restricted=False)


def stabil_estimate(gram, support, eta, restarts=10, tol=1e-12, max_iter=5000, seed=None):
    """The same search for min u^T G u / ||u_S||_2^2, the stabil constant."""
    return _cone_minimum(gram, support, eta, restarts, tol, max_iter, seed, restricted=True)


@dataclass(frozen=True)
class LassoOracleBounds:
    l1: float
    l2sq: float
    pred: float
    proof_l1: float
    proof_l2sq: float
    proof_pred: float
    probability: float

    @property
    def printed(self):
        return self.l1, self.l2sq, self.pred

    @property
    def proof(self):
        return self.proof_l1, self.proof_l2sq, self.proof_pred

    def to_dict(self):
        return {
            "l1": self.l1,
            "l2sq": self.l2sq,
            "pred": self.pred,
            "proof_l1": self.proof_l1,
            "proof_l2sq": self.proof_l2sq,
            "proof_pred": self.proof_pred,
            "probability": self.probability,
        }


def lasso_oracle_bounds(A, sigma, s, n, p, gamma):
    """
    Lasso error bounds under the KKT event with restricted eigenvalue gamma.

    Printed form: l1 = 3 A sigma s sqrt(log p / n) / gamma^2,
    l2sq = 9 A sigma^2 s log p / (n gamma^2), pred = 9 A sigma s log p / (n gamma).
    The argument itself yields l1 = 3 lam s / gamma, l2sq = 9 lam^2 s / gamma^2 and
    pred = 9 lam^2 s / gamma; both sets are returned.
    """
    require(gamma > 0, f"gamma must be > 0, got {gamma}")
    require(s >= 0, f"s must be >= 0, got {s}")
    lam = lasso_lambda(A, sigma, n, p)
    log_ratio = math.log(p) / n
    return LassoOracleBounds(
        l1=3.0 * A * sigma * s * math.sqrt(log_ratio) / gamma ** 2,
        l2sq=9.0 * A * sigma ** 2 * s * log_ratio / gamma ** 2,
        pred=9.0 * A * sigma * s * log_ratio / gamma,
        proof_l1=3.0 * lam * s / gamma,
        proof_l2sq=9.0 * lam ** 2 * s / gamma ** 2,
        proof_pred=9.0 * lam ** 2 * s / gamma,
        probability=kkt_probability(A, p),
    )


def poisson_lambda(A, L, B, n, p):
    """
    max{16 A^2 L log(2p) / (3n), 8 A L e^(LB/2) sqrt(log(2p)/n),
        20 A L e^(LB) sqrt(2 log(2p)/n)}.
    """
    require(A > 0 and L > 0 and B >= 0, "need A > 0, L > 0 and B >= 0")
    require(n >= 1 and p >= 1, f"need n, p >= 1, got n={n}, p={p}")
    log_term = math.log(2 * p)
    return max(
        16.0 * A ** 2 * L * log_term / (3.0 * n),
        8.0 * A * L * math.exp(L * B / 2.0) * math.sqrt(log_term / n),
        20.0 * A * L * math.exp(L * B) * math.sqrt(2.0 * log_term / n),
    )


def poisson_constants(L, B, k):
    """
    Curvature constant c = e^(-5LB)/2 of the Poisson loss on the l1 ball of
    radius 4B and the factors 2/(ck), 3/(c^2 k) it puts in the oracle bounds.
    """
    require(k > 0, f"k must be > 0, got {k}")
    c = math.exp(-5.0 * L * B) / 2.0
    logger.info("poisson constants: c=%.6g, k=%.6g", c, k)
    return {"c": c, "k": k, "l1_factor": 2.0 / (c * k), "pred_factor": 3.0 / (c ** 2 * k)}


def poisson_probability(A, p):
    """Lower bound 1 - (2p)^(1 - A^2) - (2p)^(-A^2/2) on the event probability."""
    return max(0.0, 1.0 - (2.0 * p) ** (1.0 - A ** 2) - (2.0 * p) ** (-(A ** 2) / 2.0))


@dataclass(frozen=True)
class PoissonOracleBounds:
    l1: float
    pred: float
    probability: float

    def to_dict(self):
        return {"l1": self.l1, "pred": self.pred, "probability": self.probability}


def poisson_oracle_bounds(A, L, B, s, lam, k, p=None):
    """
    ||b - b*||_1 <= 4 e^(5LB) s lam / k and excess risk <= 12 e^(10LB) s lam^2 / k,
    with the probability bound when the dimension p is given.
    """
    require(s >= 0 and lam >= 0, "need s >= 0 and lam >= 0")
    constants = poisson_constants(L, B, k)
    probability = poisson_probability(A, p) if p is not None else float("nan")
    return PoissonOracleBounds(
        constants["l1_factor"] * s * lam,
        constants["pred_factor"] * s * lam ** 2,
        probability,
    )


def poisson_kkt_event(X, y, beta_star, lam, fraction=0.5):
    """Whether ||X^T (y - exp(X beta*)) / n||_inf <= fraction * lam."""
    X = np.asarray(X, dtype=float)
    score = X.T @ (np.asarray(y, dtype=float) - np.exp(X @ beta_star)) / X.shape[0]
    return bool(np.max(np.abs(score)) <= fraction * lam)


def ols_prediction_tail(X, sigma, t):
    """
    The in-sample risk ||X(b_ols - b*)||^2 / n of least squares exceeds
    sigma^2 (p + 2 sqrt(p t) + 2 t) / n with probability at most e^(-t).

    The fitted noise is P eps with P the hat matrix, so the risk is
    ||Q^T eps||^2 / n for an orthonormal basis Q of the column space.
    """
    X = np.asarray(X, dtype=float)
    n = X.shape[0]
    Q, _ = np.linalg.qr(X)
    return subg_vector_quadratic(Q.T / math.sqrt(n), sigma, None, t)
