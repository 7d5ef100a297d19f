import math
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import pandas as pd

from conc_toolbox.utils.distributions import DistributionSpec, as_spec
from conc_toolbox.utils.errors import require
from conc_toolbox.utils.tail_norms import TailClassParams

TWO_SIDED = "two_sided"
RIGHT = "right"


@dataclass(frozen=True)
class TailBound:
    """
    A tail bound t -> p with its validity domain, sidedness and source.

    ``evaluator`` returns the raw formula value, which may exceed one;
    calling the bound clamps it to a probability.
    """

    family: str
    evaluator: Callable[[float], float]
    params: dict = field(default_factory=dict)
    side: str = TWO_SIDED
    domain: tuple = (0.0, math.inf)
    cite: str = ""
    certified: bool = True
    factor: float = 1.0

    def __post_init__(self):
        require(self.side in (TWO_SIDED, RIGHT), f"unknown side {self.side!r}")

    def raw(self, t):
        lo, hi = self.domain
        require(lo <= t <= hi, f"{self.family}: t={t} outside validity domain {self.domain}")
        return self.factor * float(self.evaluator(t))

    def __call__(self, t):
        return min(1.0, self.raw(t))

    def table(self, t_grid):
        t_grid = np.asarray(t_grid, dtype=float)
        raw = [self.raw(t) for t in t_grid]
        return pd.DataFrame({"t": t_grid, "raw": raw, "clamped": np.minimum(1.0, raw)})

    def scaled(self, factor):
        """The same bound multiplied by ``factor`` (used to check that certification can fail)."""
        return replace(self, factor=self.factor * factor)

    def describe(self):
        return {
            "family": self.family,
            "params": self.params,
            "side": self.side,
            "domain": list(self.domain),
            "cite": self.cite,
            "certified": self.certified,
        }


@dataclass(frozen=True)
class SumModel:
    """Weighted sum of independent terms, each a law or a tail class."""

    terms: Sequence
    weights: Sequence[float]
    centered: bool = True

    def __post_init__(self):
        require(len(self.terms) >= 1, "a sum model needs at least one term")
        require(
            len(self.terms) == len(self.weights),
            f"{len(self.terms)} terms but {len(self.weights)} weights",
        )
        w = np.asarray(self.weights, dtype=float)
        require(np.all(np.isfinite(w)), "weights must be finite")
        require(np.linalg.norm(w) > 0, "weight vector must be non-zero")
        terms = tuple(
            t if isinstance(t, (DistributionSpec, TailClassParams)) else _term_from_dict(t)
            for t in self.terms
        )
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "weights", tuple(float(x) for x in w))

    @classmethod
    def iid(cls, term, n, weights=None):
        weights = np.ones(n) if weights is None else weights
        return cls([term] * n, list(weights))

    @property
    def w(self):
        return np.asarray(self.weights)

    def tail_classes(self, kind=None):
        """The terms as tail classes, requiring them all to be of ``kind`` when given."""
        classes = []
        for term in self.terms:
            require(
                isinstance(term, TailClassParams),
                f"term {term!r} carries no tail-class parameters",
            )
            if kind is not None:
                require(
                    term.tail_class in kind,
                    f"expected {kind} terms, got {term.tail_class}",
                )
            classes.append(term)
        return classes

    def specs(self):
        require(
            all(isinstance(t, DistributionSpec) for t in self.terms),
            "every term must be a distribution",
        )
        return list(self.terms)


def _term_from_dict(data):
    if "class" in data:
        return TailClassParams.from_dict(data)
    return as_spec(data)
