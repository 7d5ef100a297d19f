"""
Registry of bound families.

catalog.json holds, per family, the anchor naming the inequality, its
sidedness, a parameter schema with example parameters and, for certified
families, the canonical generative model and an 8-point t-grid. This module
turns those records into TailBound objects and mc_verify experiments.
"""
import logging
import math
from functools import partial
from pathlib import Path

import numpy as np
from toolz import memoize

from conc_toolbox.bounds import (classical, sub_exponential, sub_gamma,
                                 sub_gaussian, sub_weibull)
from conc_toolbox.bounds.tail_bound import SumModel, TailBound
from conc_toolbox.global_vars import load_json
from conc_toolbox.matrix import quad_forms
from conc_toolbox.maxima import subg_max_tail
from conc_toolbox.utils.distributions import spec_from_dict
from conc_toolbox.utils.errors import ParameterDomainError, require
from conc_toolbox.utils.tail_norms import (OrliczSpec, TailClassParams,
                                           psi_norm, psi_theta_tail)
from conc_toolbox.verification.mc_verify import Experiment
from conc_toolbox.verification.models import build_matrix, weight_vector

logger = logging.getLogger(__name__)

file_location = Path(__file__).parents[0]

SCHEMA_TYPES = ("positive", "nonnegative", "real", "count", "law", "weights", "vector", "matrix")

_BUILDERS = {}


def builder(family):
    def register(fun):
        _BUILDERS[family] = fun
        return fun

    return register


@memoize
def load_catalog():
    return load_json("catalog.json", file_location)


def families(certified=None):
    """Family tags, optionally restricted to (non-)certified ones."""
    catalog = load_catalog()
    return [
        name for name, entry in catalog.items() if certified is None or entry["certified"] == certified
    ]


def entry(family):
    catalog = load_catalog()
    if family not in catalog:
        raise ParameterDomainError(f"unknown bound family {family!r}")
    return catalog[family]


def _is_number(value):
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _check_value(family, name, kind, value):
    where = f"{family}.{name}"
    if kind == "positive":
        require(_is_number(value) and value > 0, f"{where} must be a number > 0, got {value!r}")
    elif kind == "nonnegative":
        require(_is_number(value) and value >= 0, f"{where} must be a number >= 0, got {value!r}")
    elif kind == "real":
        require(_is_number(value), f"{where} must be a finite number, got {value!r}")
    elif kind == "count":
        require(_is_number(value) and int(value) == value and value >= 1, f"{where} must be an integer >= 1")
    elif kind == "law":
        require(isinstance(value, dict), f"{where} must be a law object")
        spec_from_dict(value)
    elif kind == "weights":
        weight_vector(value, 1 if not isinstance(value, list) else len(value))
    elif kind == "vector":
        require(
            isinstance(value, list) and len(value) >= 1 and all(_is_number(v) for v in value),
            f"{where} must be a non-empty list of numbers",
        )
    elif kind == "matrix":
        build_matrix(value)
    else:
        raise ParameterDomainError(f"{where}: unknown schema type {kind!r}")


def validate_params(family, params):
    """Check ``params`` against the family schema; unknown and missing keys are rejected."""
    schema = entry(family)["schema"]
    require(isinstance(params, dict), f"{family}: parameters must be an object")
    unknown = set(params) - set(schema)
    missing = set(schema) - set(params)
    require(not unknown, f"{family}: unknown parameters {sorted(unknown)}")
    require(not missing, f"{family}: missing parameters {sorted(missing)}")
    for name, kind in schema.items():
        _check_value(family, name, kind, params[name])
    return params


def _domain(record):
    lo, hi = record["domain"]
    return float(lo), math.inf if hi is None else float(hi)


def build(family, params=None):
    """The family's TailBound at ``params`` (its example parameters by default)."""
    record = entry(family)
    params = record["params"] if params is None else params
    validate_params(family, params)
    evaluator = _BUILDERS[family](params)
    return TailBound(
        family=family,
        evaluator=evaluator,
        params=params,
        side=record["side"],
        domain=_domain(record),
        cite=record["anchor"],
        certified=record["certified"],
    )


@memoize
def default_bound(family):
    return build(family)


def experiment(family, replications=100000, seed=None, stream_id=0):
    """The canonical mc_verify experiment of a certified family."""
    record = entry(family)
    require(record["certified"] and "model" in record, f"{family} has no canonical model")
    kwargs = {} if seed is None else {"seed": seed}
    return Experiment(
        record["model"],
        tuple(record["t_grid"]),
        replications,
        side=record["side"],
        stream_id=stream_id,
        **kwargs,
    )


def certification_entries(selected=None, replications=100000, seed=None):
    """(family, bound, experiment) triples for every certified family, or those in ``selected``."""
    names = families(certified=True) if selected is None else list(selected)
    return [(name, default_bound(name), experiment(name, replications, seed)) for name in names]


def listing(family=None):
    """JSON-ready description of the catalog."""
    names = families() if family is None else [family]
    rows = []
    for name in names:
        record = entry(name)
        rows.append(
            {
                "family": name,
                "anchor": record["anchor"],
                "side": record["side"],
                "certified": record["certified"],
                "domain": record["domain"],
                "schema": record["schema"],
                "params": record["params"],
                "model": record.get("model"),
                "t_grid": record.get("t_grid"),
            }
        )
    return rows


# builders: params -> evaluator t -> raw bound


def _law(params):
    return spec_from_dict(params["law"])


def _weights(params, key="weights"):
    return weight_vector(params[key], int(params["n"]))


@builder("markov")
def _markov(params):
    return partial(classical.markov, params["expected_phi"])


@builder("chebyshev")
def _chebyshev(params):
    return partial(classical.chebyshev, params["variance"])


@builder("chernoff")
def _chernoff(params):
    law = _law(params)
    mgf = partial(law.mgf, centered=True)
    s_max = law.mgf_domain()[1]
    return lambda t: classical.chernoff(mgf, t, s_max)


@builder("hoeffding")
def _hoeffding(params):
    intervals = np.tile([params["a"], params["b"]], (int(params["n"]), 1))
    return partial(classical.hoeffding, intervals)


@builder("mcdiarmid")
def _mcdiarmid(params):
    return partial(classical.mcdiarmid, np.full(int(params["n"]), params["c"]))


@builder("azuma")
def _azuma(params):
    n = int(params["n"])
    return partial(classical.azuma, np.full(n, params["lower"]), np.full(n, params["upper"]))


@builder("mills_upper")
def _mills_upper(params):
    return lambda t: classical.mills(t)[1]


@builder("mills_sharp")
def _mills_sharp(params):
    return classical.mills_sharp


@builder("subg_tail")
def _subg_tail(params):
    return partial(sub_gaussian.subg_tail, params["sigma2"])


@builder("subg_sum")
def _subg_sum(params):
    model = SumModel.iid(_law(params), int(params["n"]), _weights(params))
    return lambda t: sub_gaussian.subg_sum(model, t).p


@builder("subg_sum_unspecified")
def _subg_sum_unspecified(params):
    norms = params["norms"]
    w = weight_vector(params["weights"], len(norms))
    return lambda t: sub_gaussian.subg_sum_unspecified(params["constant"], norms, w, t)


@builder("ef_subg_sum")
def _ef_subg_sum(params):
    return partial(sub_gaussian.ef_subg_sum, params["C_b"], _weights(params))


@builder("ef_random_weight_sum")
def _ef_random_weight_sum(params):
    envelope = _weights(params, "envelope")
    return lambda t: sub_gaussian.ef_random_weight_sum(envelope, params["C_b"], t)


@builder("lipschitz_gaussian")
def _lipschitz_gaussian(params):
    return partial(classical.lipschitz_gaussian, params["L"])


@builder("lipschitz_logconcave")
def _lipschitz_logconcave(params):
    return partial(classical.lipschitz_logconcave, params["gamma"], params["L"])


@builder("lipschitz_sepconvex")
def _lipschitz_sepconvex(params):
    return partial(classical.lipschitz_sepconvex, params["L"], params["a"], params["b"])


@builder("subE_sum")
def _subE_sum(params):
    term = TailClassParams.sub_exponential(params["lam"])
    model = SumModel.iid(term, int(params["n"]), _weights(params))
    return lambda t: sub_exponential.subE_sum(model, t, variant="b").p


@builder("subE_mean")
def _subE_mean(params):
    return lambda t: sub_exponential.subE_mean(params["lam_bar2"], params["alpha"], int(params["n"]), t).p


@builder("subE_split")
def _subE_split(params):
    return lambda t: sub_exponential.subE_small_large_split(params["lam"], int(params["n"]), t).p


@builder("psi1_sum")
def _psi1_sum(params):
    norm = psi_norm(_law(params), OrliczSpec.psi(1.0), centered=True).value
    n = int(params["n"])
    return partial(sub_exponential.psi1_sum, np.full(n, norm), _weights(params))


@builder("subgamma_exact")
def _subgamma_exact(params):
    return lambda t: sub_gamma.subgamma_tail(params["v"], params["c"], t).exact


@builder("subgamma_relaxed")
def _subgamma_relaxed(params):
    return lambda t: sub_gamma.subgamma_tail(params["v"], params["c"], t).relaxed


@builder("subgamma_right")
def _subgamma_right(params):
    return partial(sub_gamma.subgamma_right_tail, params["v"], params["c"])


@builder("subgamma_sum")
def _subgamma_sum(params):
    terms = [(params["v"], params["c"])] * int(params["n"])
    return lambda t: sub_gamma.subgamma_sum(terms, t).exact


@builder("bernstein_bounded")
def _bernstein_bounded(params):
    variances = np.full(int(params["n"]), params["variance"])
    return lambda t: sub_gamma.bernstein_bounded(variances, params["M"], t)


@builder("bernstein_moment")
def _bernstein_moment(params):
    n = int(params["n"])
    _, condition = sub_gamma.bernstein_moment(np.full(n, params["v2"]), np.full(n, params["kappa"]))
    return condition.tail


@builder("ef_bernstein")
def _ef_bernstein(params):
    law = _law(params)
    w = _weights(params)
    constant = sub_gamma.ef_ctheta(law)
    constants = np.full(len(w), constant)
    w_max = float(np.max(np.abs(w)))
    return lambda t: sub_gamma.ef_bernstein_from_constants(constants, w_max, t)


@builder("poisson_sum")
def _poisson_sum(params):
    lam = np.full(int(params["n"]), params["lam"])
    return partial(sub_gamma.poisson_sum, lam, _weights(params))


@builder("gbo_tail")
def _gbo_tail(params):
    return partial(sub_weibull.gbo_tail, params["norm"], params["theta"], params["L"])


@builder("subweibull_sum")
def _subweibull_sum(params):
    theta = params["theta"]
    norm = psi_norm(_law(params), OrliczSpec.psi(theta), centered=True).value
    n = int(params["n"])
    return partial(sub_weibull.subweibull_sum, np.full(n, norm), _weights(params), theta)


@builder("psi_theta_tail")
def _psi_theta_tail(params):
    return partial(psi_theta_tail, params["norm"], params["theta"])


@builder("dkw")
def _dkw(params):
    return partial(classical.dkw, int(params["n"]))


@builder("gaussian_chaos")
def _gaussian_chaos(params):
    return partial(quad_forms.gaussian_chaos_tail, build_matrix(params["matrix"]), params["sigma"])


@builder("hw_diagfree")
def _hw_diagfree(params):
    return partial(quad_forms.hw_diagfree, build_matrix(params["matrix"]), params["K"])


@builder("hw_moment")
def _hw_moment(params):
    a = build_matrix(params["matrix"])
    return partial(quad_forms.hw_moment, a, params["sigma"], params["kappa"])


@builder("hw_rv")
def _hw_rv(params):
    a = build_matrix(params["matrix"])
    return lambda t: quad_forms.hw_rv(a, params["K"], t, params["c"])


@builder("subg_vector_quadratic")
def _subg_vector_quadratic(params):
    a = build_matrix(params["matrix"])
    return partial(quad_forms.subg_vector_quadratic_tail, a, params["sigma"], None)


@builder("subweibull_quadratic")
def _subweibull_quadratic(params):
    a = build_matrix(params["matrix"])
    return lambda t: quad_forms.subweibull_quadratic(a, params["M"], int(params["q"]), t, params["C"])


@builder("subg_max_tail")
def _subg_max_tail(params):
    return lambda t: subg_max_tail(params["sigma"], int(params["n"]), t)[0]


@builder("subg_max_tail_abs")
def _subg_max_tail_abs(params):
    return lambda t: subg_max_tail(params["sigma"], int(params["n"]), t)[1]
