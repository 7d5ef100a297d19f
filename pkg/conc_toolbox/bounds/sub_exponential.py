"""Weighted sums of sub-exponential and psi_1 variables."""
import math
from dataclasses import dataclass

import numpy as np

from conc_toolbox.bounds.tail_bound import SumModel
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.tail_norms import TailClassParams

GAUSSIAN_REGIME = "gaussian"
EXPONENTIAL_REGIME = "exponential"


@dataclass(frozen=True)
class RegimeBound:
    p: float
    regime: str
    crossover: float

    def to_dict(self):
        return {"p": self.p, "regime": self.regime, "crossover": self.crossover}


def _two_regime(t, quad_scale, lin_scale):
    """2 exp(-1/2 min(t^2 / quad_scale, t / lin_scale)) with the active regime."""
    quad = t ** 2 / quad_scale
    lin = t / lin_scale
    regime = GAUSSIAN_REGIME if quad <= lin else EXPONENTIAL_REGIME
    p = min(1.0, 2.0 * math.exp(-0.5 * min(quad, lin)))
    return RegimeBound(p, regime, quad_scale / lin_scale)


def _sub_exponential_terms(model):
    if not isinstance(model, SumModel):
        model = SumModel(**model)
    terms = [t.normalized() for t in model.tail_classes(kind=("subE", "subE2"))]
    lam = np.array([t["lam"] for t in terms])
    alpha = np.array([t["alpha"] if t.tail_class == "subE2" else t["lam"] for t in terms])
    return model.w, lam, alpha


def subE_sum(model, t, variant="b"):
    """
    Two-sided tail of sum_i w_i X_i for independent centered subE terms.

    Variant ``b`` uses lam = max lam_i and w = max |w_i|:
    2 exp(-1/2 (t^2 / (||w||^2 lam^2) ^ t / (w lam))).
    Variant ``c`` uses sum w_i^2 lam_i^2 and the window scale max|w_i| max alpha_i;
    for weights 1/n this is 2 exp(-1/2 (n t^2 / mean(lam_i^2) ^ n t / alpha)).
    """
    w, lam, alpha = _sub_exponential_terms(model)
    w_max = float(np.max(np.abs(w)))
    if variant == "b":
        lam_max = float(np.max(np.maximum(lam, alpha)))
        return _two_regime(t, float(np.sum(w ** 2)) * lam_max ** 2, w_max * lam_max)
    require(variant == "c", f"unknown sub-exponential variant {variant!r}")
    return _two_regime(t, float(np.sum(w ** 2 * lam ** 2)), w_max * float(np.max(alpha)))


def subE_mean(lam_bar2, alpha, n, t):
    """Mean of n independent subE(lam_i, alpha_i) terms: the variant ``c`` closed form."""
    require(n >= 1 and lam_bar2 > 0 and alpha > 0, "need n >= 1, lam_bar2 > 0, alpha > 0")
    return _two_regime(t, lam_bar2 / n, alpha / n)


def subE_small_large_split(lam, n, t):
    """
    Weights 1/sqrt(n): 2 exp(-t^2 / (2 lam^2)) up to t = lam sqrt(n) and
    2 exp(-t sqrt(n) / (2 lam)) beyond.
    """
    require(lam > 0 and n >= 1, "need lam > 0 and n >= 1")
    return _two_regime(t, lam ** 2, lam / math.sqrt(n))


def psi1_sum(norms, w, t):
    """2 exp(-1/4 (t^2 / (2 sum b_i^2) ^ t / max b_i)) with b_i = |w_i| ||X_i||_psi1."""
    b = np.abs(np.asarray(w, dtype=float) * np.asarray(norms, dtype=float))
    require(b.size >= 1 and np.all(np.isfinite(b)), "norms and weights must be finite")
    require(np.any(b > 0), "weighted norms must not all vanish")
    exponent = 0.25 * min(t ** 2 / (2.0 * float(np.sum(b ** 2))), t / float(np.max(b)))
    return min(1.0, 2.0 * math.exp(-exponent))


def chi_square_mean_class(n):
    """Each centered chi-square(1) term is subE2(2, 4)."""
    return SumModel.iid(TailClassParams.sub_exponential(2.0, alpha=4.0), n, np.full(n, 1.0 / n))
