"""
Replication studies for least squares, the Lasso and the Poisson Lasso.

Replication r draws its instance from stream r of the study seed, so results
depend on (parameters, seed) only and not on the number of workers.
"""
import json
import logging
import math
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from conc_toolbox.global_vars import simulation
from conc_toolbox.hdreg import oracle
from conc_toolbox.hdreg.instances import gen_linear, gen_poisson
from conc_toolbox.hdreg.solvers import lasso_cd, ols, poisson_lasso_pg
from conc_toolbox.utils.errors import require

logger = logging.getLogger(__name__)

QUANTILES = (0.5, 0.9, 0.99)


@dataclass
class SimulationReport:
    family: str
    rows: pd.DataFrame
    summary: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)

    def to_dict(self):
        return {"family": self.family, "params": self.params, "summary": self.summary}

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True, default=_plain)
        if path is not None:
            with open(path, "w") as f:
                f.write(text)
        return text

    def to_csv(self, path=None):
        return self.rows.to_csv(path, index=False, float_format="%.17g")


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def _replicate(function, reps, threads, **kwargs):
    require(reps >= 1, f"need at least one replication, got {reps}")
    rows = Parallel(n_jobs=threads)(delayed(function)(rep=rep, **kwargs) for rep in range(reps))
    return pd.DataFrame(rows)


def _quantiles(rows, columns):
    return {
        column: {str(q): float(rows[column].quantile(q)) for q in QUANTILES}
        for column in columns
    }


def _mean_se(values):
    values = np.asarray(values, dtype=float)
    se = float(np.std(values, ddof=1) / math.sqrt(len(values))) if len(values) > 1 else float("nan")
    return float(np.mean(values)), se


def _ols_row(rep, n, p, sigma, t, seed, design, rho):
    instance = gen_linear(n, p, p, sigma, design=design, rho=rho, column_normalize=False, seed=seed, stream_id=rep)
    beta, mse_identity, insample_risk = ols(instance.X, instance.y, sigma)
    u = beta - instance.beta_star
    risk = float(np.sum((instance.X @ u) ** 2)) / n
    threshold = oracle.ols_prediction_tail(instance.X, sigma, t).threshold
    return {
        "rep": rep,
        "sq_error": float(u @ u),
        "mse_identity": mse_identity,
        "risk": risk,
        "insample_risk": insample_risk,
        "tail_threshold": threshold,
        "exceeds": risk > threshold,
    }


def simulate_ols(n, p, sigma=1.0, reps=1000, t=3.0, seed=None, threads=1, design="iid_gaussian", rho=0.0):
    """
    Monte-Carlo check of E||b - b*||^2 = sigma^2 tr((X^T X)^-1), of the in-sample
    risk p sigma^2 / n and of the prediction-error tail e^(-t).
    """
    seed = simulation.seed if seed is None else seed
    rows = _replicate(
        _ols_row, reps, threads, n=n, p=p, sigma=sigma, t=t, seed=seed, design=design, rho=rho
    )
    risk_mean, risk_se = _mean_se(rows["risk"])
    error_mean, error_se = _mean_se(rows["sq_error"])
    summary = {
        "risk_mean": risk_mean,
        "risk_se": risk_se,
        "risk_theory": p * sigma ** 2 / n,
        "sq_error_mean": error_mean,
        "sq_error_se": error_se,
        "mse_identity_mean": float(rows["mse_identity"].mean()),
        "tail_frequency": float(rows["exceeds"].mean()),
        "tail_bound": math.exp(-t),
    }
    logger.info("ols study: risk %.4g (theory %.4g)", risk_mean, summary["risk_theory"])
    params = {"n": n, "p": p, "sigma": sigma, "reps": reps, "t": t, "seed": seed}
    return SimulationReport("ols", rows, summary, params)


def _lasso_row(rep, n, p, s, sigma, A, gamma, seed, design, rho):
    instance = gen_linear(n, p, s, sigma, design=design, rho=rho, seed=seed, stream_id=rep)
    lam = oracle.lasso_lambda(A, sigma, n, p)
    fit = lasso_cd(instance.X, instance.y, lam)
    bounds = oracle.lasso_oracle_bounds(A, sigma, s, n, p, gamma)
    u = fit.beta_hat - instance.beta_star
    l1 = float(np.sum(np.abs(u)))
    l2sq = float(u @ u)
    pred = float(np.sum((instance.X @ u) ** 2)) / n
    return {
        "rep": rep,
        "kkt_event": oracle.kkt_event(instance.X, instance.y, instance.beta_star, lam),
        "cone": oracle.cone_check(u, instance.support, 3.0),
        "l1_error": l1,
        "l2sq_error": l2sq,
        "pred_error": pred,
        "l1_within": l1 <= bounds.l1,
        "l2sq_within": l2sq <= bounds.l2sq,
        "pred_within": pred <= bounds.pred,
        "l1_within_proof": l1 <= bounds.proof_l1,
        "l2sq_within_proof": l2sq <= bounds.proof_l2sq,
        "pred_within_proof": pred <= bounds.proof_pred,
        "converged": fit.converged,
        "kkt_residual": fit.kkt_residual,
    }


def _event_summary(rows, event, columns):
    on_event = rows[rows[event]]
    summary = {f"{event}_frequency": float(rows[event].mean())}
    for column in columns:
        summary[f"{column}_on_event"] = float(on_event[column].mean()) if len(on_event) else float("nan")
    return summary


def simulate_lasso(
    n, p, s, sigma=1.0, A=8.0, reps=1000, gamma=1.0, seed=None, threads=1, design="iid_gaussian", rho=0.0
):
    """
    Lasso study at lam = A sigma sqrt(log p / n): frequency of the KKT event,
    whether the error falls in the cone and within the oracle bounds on that
    event, and error quantiles. ``gamma`` is the restricted eigenvalue assumed
    for the design, 1 for the isotropic one.
    """
    seed = simulation.seed if seed is None else seed
    rows = _replicate(
        _lasso_row, reps, threads,
        n=n, p=p, s=s, sigma=sigma, A=A, gamma=gamma, seed=seed, design=design, rho=rho,
    )
    bounds = oracle.lasso_oracle_bounds(A, sigma, s, n, p, gamma)
    summary = _event_summary(
        rows, "kkt_event",
        ["cone", "l1_within", "l2sq_within", "pred_within", "l1_within_proof", "l2sq_within_proof", "pred_within_proof"],
    )
    summary.update(
        {
            "lam": oracle.lasso_lambda(A, sigma, n, p),
            "kkt_probability_bound": bounds.probability,
            "cone_whenever_kkt": bool(rows.loc[rows["kkt_event"], "cone"].all()),
            "converged_frequency": float(rows["converged"].mean()),
            "bounds": bounds.to_dict(),
            "quantiles": _quantiles(rows, ["l1_error", "l2sq_error", "pred_error"]),
        }
    )
    logger.info(
        "lasso study: KKT event frequency %.4f (bound %.4f)",
        summary["kkt_event_frequency"], bounds.probability,
    )
    params = {"n": n, "p": p, "s": s, "sigma": sigma, "A": A, "gamma": gamma, "reps": reps, "seed": seed}
    return SimulationReport("gaussian", rows, summary, params)


def _poisson_excess_risk(X, beta, beta_star):
    """(1/n) sum_i [e^(eta_i) - e^(eta*_i) - e^(eta*_i)(eta_i - eta*_i)]."""
    eta = X @ beta
    eta_star = X @ beta_star
    rate = np.exp(eta_star)
    return float(np.mean(np.exp(eta) - rate - rate * (eta - eta_star)))


def _poisson_row(rep, n, p, s, L, B, A, k, seed):
    instance = gen_poisson(n, p, s, L, B, seed=seed, stream_id=rep)
    lam = oracle.poisson_lambda(A, L, B, n, p)
    fit = poisson_lasso_pg(instance.X, instance.y, lam)
    bounds = oracle.poisson_oracle_bounds(A, L, B, s, lam, k, p)
    u = fit.beta_hat - instance.beta_star
    l1 = float(np.sum(np.abs(u)))
    excess = _poisson_excess_risk(instance.X, fit.beta_hat, instance.beta_star)
    return {
        "rep": rep,
        "kkt_event": oracle.poisson_kkt_event(instance.X, instance.y, instance.beta_star, lam),
        "l1_error": l1,
        "excess_risk": excess,
        "l1_within_4B": l1 <= 4.0 * B + 1e-6,
        "l1_within": l1 <= bounds.l1,
        "pred_within": excess <= bounds.pred,
        "converged": fit.converged,
        "kkt_residual": fit.kkt_residual,
    }


def simulate_poisson(n, p, s, L=1.0, B=1.0, A=2.0, k=0.5, reps=1000, seed=None, threads=1):
    """
    Poisson Lasso study at the calibrated lam with stabil constant k: event
    frequency, the l1 radius 4B and the oracle bounds on the event.
    """
    seed = simulation.seed if seed is None else seed
    rows = _replicate(_poisson_row, reps, threads, n=n, p=p, s=s, L=L, B=B, A=A, k=k, seed=seed)
    lam = oracle.poisson_lambda(A, L, B, n, p)
    bounds = oracle.poisson_oracle_bounds(A, L, B, s, lam, k, p)
    summary = _event_summary(rows, "kkt_event", ["l1_within_4B", "l1_within", "pred_within"])
    summary.update(
        {
            "lam": lam,
            "probability_bound": bounds.probability,
            "constants": oracle.poisson_constants(L, B, k),
            "converged_frequency": float(rows["converged"].mean()),
            "bounds": bounds.to_dict(),
            "quantiles": _quantiles(rows, ["l1_error", "excess_risk"]),
        }
    )
    logger.info("poisson study: event frequency %.4f (bound %.4f)", summary["kkt_event_frequency"], bounds.probability)
    params = {"n": n, "p": p, "s": s, "L": L, "B": B, "A": A, "k": k, "reps": reps, "seed": seed}
    return SimulationReport("poisson", rows, summary, params)
