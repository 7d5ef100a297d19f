import math
from dataclasses import dataclass

import numpy as np
from toolz import memoize

from conc_toolbox.utils.errors import require
from conc_toolbox.utils.tail_norms import gbo_exponent


def gbo_tail(norm, theta, L, x):
    """
    P(|X| >= x) <= 2 exp(-t) where t solves norm (sqrt(t) + L t^(1/theta)) = x.
    """
    require(norm > 0, f"GBO norm must be > 0, got {norm}")
    require(theta > 0 and L >= 0, "need theta > 0 and L >= 0")
    if x <= 0:
        return 1.0
    t = float(gbo_exponent(x / norm, theta, L))
    return min(1.0, 2.0 * math.exp(-t))


def _holder_conjugate(theta):
    return math.inf if theta == 1 else theta / (theta - 1.0)


@memoize
def weibull_C(theta):
    """C(theta), the constant of the GBO norm bound for sub-Weibull sums."""
    require(theta > 0, f"theta must be > 0, got {theta}")
    head = max(math.sqrt(2.0), 2.0 ** (1.0 / theta))
    if theta < 1:
        return head * (
            math.sqrt(8.0)
            * math.e ** 3
            * (2.0 * math.pi) ** 0.25
            * math.exp(1.0 / 24.0)
            * (math.exp(2.0 / math.e) / theta) ** (1.0 / theta)
        )
    return head * (4.0 * math.e + 2.0 * math.log(2.0) ** (1.0 / theta))


@dataclass(frozen=True)
class SubWeibullConstants:
    C: float
    L_n: float
    b_norm: float

    @property
    def scale(self):
        """2e C(theta) ||b||_2, the GBO norm bound of the sum."""
        return 2.0 * math.e * self.C * self.b_norm


def subweibull_constants(theta, b):
    """
    C(theta) and L_n(theta) for the weighted-norm vector b.

    For theta >= 1, L_n uses the l_p norm of b with p the Holder conjugate of theta.
    """
    b = np.abs(np.asarray(b, dtype=float))
    require(b.size >= 1 and np.any(b > 0), "b must contain a non-zero entry")
    C = weibull_C(float(theta))
    b2 = float(np.linalg.norm(b))
    lead = 4.0 ** (1.0 / theta) / (math.sqrt(2.0) * b2)
    if theta < 1:
        L_n = lead * float(np.max(b))
    else:
        L_n = lead * 4.0 * math.e * float(np.linalg.norm(b, _holder_conjugate(theta))) / C
    return SubWeibullConstants(C, L_n, b2)


def subweibull_sum(norms, w, theta, x):
    """Two-sided tail of sum_i w_i X_i at deviation x for centered terms with finite psi_theta norms."""
    b = np.asarray(w, dtype=float) * np.asarray(norms, dtype=float)
    constants = subweibull_constants(theta, b)
    return gbo_tail(constants.scale, theta, constants.L_n, x)
