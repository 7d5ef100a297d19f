import math
from dataclasses import dataclass

import numpy as np
from toolz import memoize

from conc_toolbox.bounds.tail_bound import SumModel
from conc_toolbox.utils.distributions import DistributionSpec
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.tail_norms import (OrliczSpec, TailClassParams,
                                           proxy_to_psi2, psi_norm)


@dataclass(frozen=True)
class SumBound:
    """A sum bound reported in each of its forms and as their minimum."""

    p: float
    forms: dict

    def to_dict(self):
        return {"p": self.p, **self.forms}


def subg_tail(sigma2, t):
    require(sigma2 > 0, f"variance proxy must be > 0, got {sigma2}")
    return min(1.0, 2.0 * math.exp(-(t ** 2) / (2.0 * sigma2)))


@memoize
def _psi2_norm(spec, centered):
    return psi_norm(spec, OrliczSpec.psi(2), centered=centered).value


def term_constants(term, centered=True):
    """(variance proxy, psi_2 norm) of one summand."""
    if isinstance(term, TailClassParams):
        require(term.tail_class == "subG", f"expected a subG term, got {term.tail_class}")
        sigma2 = term["sigma2"]
        return sigma2, proxy_to_psi2(math.sqrt(sigma2))
    require(isinstance(term, DistributionSpec), f"unsupported term {term!r}")
    return term.subg_proxy(), _psi2_norm(term, centered)


def subg_sum(model, t):
    """
    Two-sided tail of sum_i w_i X_i for independent centered sub-Gaussian terms.

    Reports the variance-proxy form 2 exp(-t^2 / (2 sum w_i^2 sigma_i^2)), the
    psi_2 form 2 exp(-t^2 / (8 sum ||w_i X_i||^2)) and their minimum.
    """
    if not isinstance(model, SumModel):
        model = SumModel(**model)
    constants = [term_constants(term, model.centered) for term in model.terms]
    w2 = model.w ** 2
    proxy = float(np.sum(w2 * np.array([c[0] for c in constants])))
    norms2 = float(np.sum(w2 * np.array([c[1] for c in constants]) ** 2))
    forms = {
        "variance_form": min(1.0, 2.0 * math.exp(-(t ** 2) / (2.0 * proxy))),
        "norm_form": min(1.0, 2.0 * math.exp(-(t ** 2) / (8.0 * norms2))),
    }
    return SumBound(min(forms.values()), forms)


def subg_sum_unspecified(constant, norms, w, t):
    """2 exp(-C t^2 / sum ||w_i X_i||_psi2^2) with a caller-supplied universal constant C."""
    require(constant >= 0, f"constant must be >= 0, got {constant}")
    b2 = float(np.sum((np.asarray(w, dtype=float) * np.asarray(norms, dtype=float)) ** 2))
    require(b2 > 0, "weighted norms must not all vanish")
    return min(1.0, 2.0 * math.exp(-constant * t ** 2 / b2))


def _weight_norm(w):
    norm = float(np.linalg.norm(np.asarray(w, dtype=float)))
    require(norm > 0, "weight vector must be non-zero")
    return norm


def ef_subg_sum(C_b, w, t):
    """Weighted exponential-family sum with variances bounded by C_b^2."""
    require(C_b > 0, f"C_b must be > 0, got {C_b}")
    return min(1.0, 2.0 * math.exp(-(t ** 2) / (2.0 * C_b ** 2 * _weight_norm(w) ** 2)))


def ef_random_weight_sum(w_env, C_b, t):
    """Same bound for random weights W_i independent of the responses with |W_i| <= w_env[i]."""
    require(np.all(np.asarray(w_env, dtype=float) >= 0), "weight envelope must be >= 0")
    return ef_subg_sum(C_b, w_env, t)


def ef_moment_bound(C_b, w, k):
    """E|C_n|^k <= k (2 C_b^2)^(k/2) Gamma(k/2) ||w||_2^k."""
    require(C_b > 0 and k >= 1, "need C_b > 0 and k >= 1")
    norm = _weight_norm(w)
    return k * (2.0 * C_b ** 2) ** (k / 2.0) * math.gamma(k / 2.0) * norm ** k


def ef_square_subE(C_b, w):
    """
    Tail class of the centered square of a weighted exponential-family sum:
    subE(8 sqrt(2) C_b^2 ||w||^2) on the window |s| <= 1 / (8 C_b^2 ||w||^2).
    """
    require(C_b > 0, f"C_b must be > 0, got {C_b}")
    scale = 8.0 * C_b ** 2 * _weight_norm(w) ** 2
    return TailClassParams.sub_exponential(math.sqrt(2.0) * scale, alpha=scale)


def ef_psi2_norm(C_b, w):
    """psi_2 norm bound implied by the sub-Gaussian proxy C_b^2 ||w||^2."""
    require(C_b > 0, f"C_b must be > 0, got {C_b}")
    return proxy_to_psi2(C_b * _weight_norm(w))
