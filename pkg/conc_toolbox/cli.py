"""
Command-line front end.

Every subcommand turns its options into a RunConfig (a JSON parameter
document plus output settings) and hands it to ``dispatch``. Exit codes:
0 success, 1 usage or configuration error, 2 certification failure.

    conc-toolbox bound eval --params '{"family": "hoeffding", "t_grid": [0.1, 0.2]}'
    conc-toolbox verify --suite --replications 100000 --out report.csv
"""
import json
import logging
import sys
from dataclasses import dataclass, field
from typing import Optional

import click
import numpy as np
import pandas as pd

from conc_toolbox.bounds import catalog
from conc_toolbox.global_vars import simulation
from conc_toolbox.hdreg import simulate as hdreg_simulate
from conc_toolbox.matrix import eigen, quad_forms
from conc_toolbox import maxima
from conc_toolbox.utils.distributions import spec_from_dict
from conc_toolbox.utils.errors import ConfigError
from conc_toolbox.utils.numerics import solve_decreasing
from conc_toolbox.utils.tail_norms import OrliczSpec, psi_norm
from conc_toolbox.verification import mc_verify

logger = logging.getLogger(__name__)

loggers_to_shut_up = [
    "numexpr.utils",
    "joblib",
    "statsmodels",
]

FORMATS = ("csv", "json")

# allowed keys of the parameter document, per command
COMMAND_KEYS = {
    "bound.eval": {"family", "params", "t_grid"},
    "bound.radius": {"family", "params", "delta"},
    "norm": {"law", "theta", "centered"},
    "verify": {"family", "experiment", "suite", "replications", "shrink"},
    "maxima": {"kind", "sigma", "n", "t", "v", "c", "norms", "theta", "a", "v2", "kappa", "p", "m", "r", "moment"},
    "matrix.hw": {"A", "K", "t"},
    "matrix.chaos": {"A", "sigma", "x"},
    "matrix.quadform": {"A", "sigma", "mu", "t"},
    "matrix.baiyin": {"n", "p", "theta", "c"},
    "hdreg.simulate": {"family", "n", "p", "s", "sigma", "A", "L", "B", "k", "gamma", "reps", "t"},
    "catalog": {"family"},
}

EXIT_OK, EXIT_CONFIG, EXIT_FAILED = 0, 1, 2

# keys each maxima kind reads
MAXIMA_KEYS = {
    "subg": ("sigma", "n"),
    "subgamma": ("v", "c", "n"),
    "orlicz": ("norms",),
    "bounded_sum": ("a",),
    "bernstein": ("v2", "kappa", "n", "p", "m"),
    "crude": ("n", "r", "moment"),
}


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    output: Optional[str] = None
    fmt: str = "json"
    seed: int = simulation.seed
    threads: int = 1

    def __post_init__(self):
        if self.command not in COMMAND_KEYS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not isinstance(self.params, dict):
            raise ConfigError(f"{self.command}: parameters must be a JSON object")
        unknown = set(self.params) - COMMAND_KEYS[self.command]
        if unknown:
            raise ConfigError(f"{self.command}: unknown keys {sorted(unknown)}")
        if self.fmt not in FORMATS:
            raise ConfigError(f"unknown output format {self.fmt!r}, expected one of {FORMATS}")
        if self.threads == 0 or self.threads < -1:
            raise ConfigError(f"threads must be a positive count or auto, got {self.threads}")


def parse_json(text, source="parameters"):
    """Parse a JSON document, reporting the line and column of a syntax error."""
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"malformed JSON in {source}: {e.msg} at line {e.lineno} column {e.colno}")


def load_params(params, config_file):
    document = {}
    if config_file is not None:
        with open(config_file) as f:
            document.update(parse_json(f.read(), config_file))
    if params is not None:
        document.update(parse_json(params, "--params"))
    return document


def _require_keys(config, *names):
    missing = [name for name in names if name not in config.params]
    if missing:
        raise ConfigError(f"{config.command}: missing keys {missing}")


# handlers: RunConfig -> (artifact, passed)


def _bound(config):
    _require_keys(config, "family")
    return catalog.build(config.params["family"], config.params.get("params"))


def _bound_eval(config):
    _require_keys(config, "t_grid")
    bound = _bound(config)
    return bound.table(config.params["t_grid"]).assign(family=bound.family), True


def _bound_radius(config):
    _require_keys(config, "delta")
    bound = _bound(config)
    delta = float(config.params["delta"])
    if not 0 < delta < 1:
        raise ConfigError(f"delta must lie in (0, 1), got {delta}")
    radius = solve_decreasing(bound.raw, delta, x0=max(1.0, bound.domain[0]))
    return {"family": bound.family, "delta": delta, "radius": radius}, True


def _norm(config):
    _require_keys(config, "law")
    spec = spec_from_dict(config.params["law"])
    theta = float(config.params.get("theta", 2.0))
    estimate = psi_norm(spec, OrliczSpec.psi(theta), centered=bool(config.params.get("centered", False)))
    return {"law": spec.to_dict(), "theta": theta, **estimate.to_dict()}, True


def _verify(config):
    params = config.params
    replications = int(params.get("replications", 100000))
    shrink = params.get("shrink")
    if params.get("suite"):
        entries = catalog.certification_entries(replications=replications, seed=config.seed)
        frame, passed, _ = mc_verify.suite(entries, replications, config.seed, config.threads, shrink)
        return frame, passed
    _require_keys(config, "family")
    family = params["family"]
    bound = catalog.default_bound(family)
    if "experiment" in params:
        experiment = mc_verify.Experiment.from_dict({"seed": config.seed, **params["experiment"]})
    else:
        experiment = catalog.experiment(family, replications, config.seed)
    if shrink is None:
        report = mc_verify.run(experiment, bound, config.threads)
    else:
        report = mc_verify.falsify(experiment, bound, float(shrink), config.threads)
    return report, report.passed


def _maxima(config):
    _require_keys(config, "kind")
    p = config.params
    kind = p["kind"]
    if kind not in MAXIMA_KEYS:
        raise ConfigError(f"unknown maxima kind {kind!r}, expected one of {sorted(MAXIMA_KEYS)}")
    _require_keys(config, *MAXIMA_KEYS[kind])
    if kind == "subg":
        plain, absolute = maxima.subg_max_expect(p["sigma"], p["n"])
        result = {"expect_max": plain, "expect_abs_max": absolute}
        if "t" in p:
            tail, abs_tail = maxima.subg_max_tail(p["sigma"], p["n"], p["t"])
            result.update({"tail": tail, "abs_tail": abs_tail})
    elif kind == "subgamma":
        result = {"expect_max": maxima.subgamma_max_expect(p["v"], p["c"], p["n"])}
    elif kind == "orlicz":
        result = {"expect_abs_max": maxima.orlicz_max_expect(p["norms"], p.get("theta", 2.0), p.get("n"))}
    elif kind == "bounded_sum":
        result = {"expect_abs_max": maxima.bounded_sum_max_expect(p["a"])}
    elif kind == "bernstein":
        result = {"moment": maxima.bernstein_max_moment(p["v2"], p["kappa"], p["n"], p["p"], p["m"])}
    else:
        result = {"expect_abs_max": maxima.crude_max_moment(p["n"], p["r"], p["moment"])}
    return {"kind": kind, **result}, True


def _matrix_param(config):
    """``A`` is either an inline array of rows or the path of a headerless CSV file."""
    A = config.params["A"]
    if not isinstance(A, str):
        return A
    try:
        return eigen.DenseMatrix.from_csv(A)
    except OSError as e:
        raise ConfigError(f"{config.command}: cannot read matrix file {A!r}: {e}")


def _matrix_hw(config):
    _require_keys(config, "A", "K", "t")
    p = config.params
    return {"t": p["t"], "p": quad_forms.hw_diagfree(_matrix_param(config), p["K"], p["t"])}, True


def _matrix_chaos(config):
    _require_keys(config, "A", "x")
    p = config.params
    return quad_forms.gaussian_chaos(_matrix_param(config), p.get("sigma", 1.0), p["x"]).to_dict(), True


def _matrix_quadform(config):
    _require_keys(config, "A", "t")
    p = config.params
    bound = quad_forms.subg_vector_quadratic(_matrix_param(config), p.get("sigma", 1.0), p.get("mu"), p["t"])
    return bound.to_dict(), True


def _matrix_baiyin(config):
    _require_keys(config, "n", "p", "theta", "c")
    p = config.params
    result = eigen.baiyin_nonasymptotic(p["n"], p["p"], p["theta"], p["c"]).to_dict()
    lower, upper = eigen.baiyin_edges(1.0, min(1.0, p["p"] / p["n"]))
    return {**result, "asymptotic_edges": [lower, upper]}, True


def _hdreg_simulate(config):
    p = dict(config.params)
    family = p.pop("family", "gaussian")
    _require_keys(config, "n", "p")
    common = {"seed": config.seed, "threads": config.threads}
    if family == "gaussian":
        _require_keys(config, "s")
        allowed = {"n", "p", "s", "sigma", "A", "reps", "gamma"}
        function = hdreg_simulate.simulate_lasso
    elif family == "poisson":
        _require_keys(config, "s")
        allowed = {"n", "p", "s", "L", "B", "A", "k", "reps"}
        function = hdreg_simulate.simulate_poisson
    elif family == "ols":
        allowed = {"n", "p", "sigma", "reps", "t"}
        function = hdreg_simulate.simulate_ols
    else:
        raise ConfigError(f"unknown regression family {family!r}")
    unknown = set(p) - allowed
    if unknown:
        raise ConfigError(f"hdreg.simulate: keys {sorted(unknown)} do not apply to the {family} family")
    return function(**p, **common), True


def _catalog(config):
    return catalog.listing(config.params.get("family")), True


HANDLERS = {
    "bound.eval": _bound_eval,
    "bound.radius": _bound_radius,
    "norm": _norm,
    "verify": _verify,
    "maxima": _maxima,
    "matrix.hw": _matrix_hw,
    "matrix.chaos": _matrix_chaos,
    "matrix.quadform": _matrix_quadform,
    "matrix.baiyin": _matrix_baiyin,
    "hdreg.simulate": _hdreg_simulate,
    "catalog": _catalog,
}


def _plain(value):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def render(artifact, fmt):
    """Text of an artifact: a report object, a DataFrame, a dict or a list of dicts."""
    if hasattr(artifact, "to_json") and hasattr(artifact, "to_csv") and not isinstance(artifact, pd.DataFrame):
        return artifact.to_csv() if fmt == "csv" else artifact.to_json()
    if isinstance(artifact, pd.DataFrame):
        if fmt == "csv":
            return artifact.to_csv(index=False, float_format="%.17g")
        return json.dumps(artifact.to_dict(orient="records"), indent=2, sort_keys=True, default=_plain)
    if fmt == "csv":
        rows = artifact if isinstance(artifact, list) else [artifact]
        return pd.json_normalize(rows).to_csv(index=False, float_format="%.17g")
    return json.dumps(artifact, indent=2, sort_keys=True, default=_plain)


def dispatch(config):
    """Run the addressed operation, write its artifact and return the exit code."""
    try:
        artifact, passed = HANDLERS[config.command](config)
    except (KeyError, TypeError) as e:
        raise ConfigError(f"{config.command}: invalid parameters: {type(e).__name__}: {e}") from e
    text = render(artifact, config.fmt)
    if config.output is None:
        click.echo(text)
    else:
        with open(config.output, "w") as f:
            f.write(text)
    if not passed:
        logger.warning("%s: certification failed", config.command)
        return EXIT_FAILED
    return EXIT_OK


def _threads(ctx, param, value):
    if value == "auto":
        return -1
    try:
        threads = int(value)
    except ValueError:
        raise click.BadParameter("expected a positive integer or 'auto'")
    if threads < 1:
        raise click.BadParameter("expected a positive integer or 'auto'")
    return threads


def _configure_logging(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(asctime)s %(name)s %(levelname)s: %(message)s",
    )
    for name in loggers_to_shut_up:
        logging.getLogger(name).setLevel(logging.ERROR)


def _run_config(ctx, command, params=None, config_file=None, extra=None):
    document = load_params(params, config_file)
    document.update({k: v for k, v in (extra or {}).items() if v is not None})
    settings = ctx.obj
    return dispatch(
        RunConfig(
            command,
            document,
            output=settings["out"],
            fmt=settings["fmt"],
            seed=settings["seed"],
            threads=settings["threads"],
        )
    )


params_option = click.option("--params", default=None, help="JSON parameter document.")
config_option = click.option(
    "--config", "config_file", default=None, type=click.Path(exists=True, dir_okay=False),
    help="File holding the JSON parameter document.",
)


@click.group()
@click.option("--seed", default=simulation.seed, type=int, show_default=True)
@click.option("--threads", default="1", callback=_threads, help="Worker count or 'auto'.")
@click.option("--out", default=None, type=click.Path(dir_okay=False), help="Output file (stdout if omitted).")
@click.option("--format", "fmt", default="json", type=click.Choice(FORMATS), show_default=True)
@click.option("-v", "--verbose", is_flag=True, default=False)
@click.pass_context
def cli(ctx, seed, threads, out, fmt, verbose):
    """Concentration bounds: evaluation, norms and Monte-Carlo certification."""
    _configure_logging(verbose)
    ctx.obj = {"seed": seed, "threads": threads, "out": out, "fmt": fmt}


@cli.group()
def bound():
    """Evaluate catalog bounds."""


@bound.command("eval")
@params_option
@config_option
@click.pass_context
def bound_eval(ctx, params, config_file):
    """Raw and clamped bound values on a t grid."""
    return _run_config(ctx, "bound.eval", params, config_file)


@bound.command("radius")
@params_option
@config_option
@click.pass_context
def bound_radius(ctx, params, config_file):
    """Deviation at which the bound equals delta."""
    return _run_config(ctx, "bound.radius", params, config_file)


@cli.command()
@params_option
@config_option
@click.pass_context
def norm(ctx, params, config_file):
    """psi_theta norm of a law."""
    return _run_config(ctx, "norm", params, config_file)


@cli.command()
@params_option
@config_option
@click.option("--family", default=None)
@click.option("--experiment", "experiment_file", default=None, type=click.Path(exists=True, dir_okay=False))
@click.option("--suite", is_flag=True, default=False, help="Certify every certified catalog family.")
@click.option("--replications", default=None, type=int)
@click.option("--shrink", default=None, type=float, help="Multiply the bounds by this factor.")
@click.pass_context
def verify(ctx, params, config_file, family, experiment_file, suite, replications, shrink):
    """Monte-Carlo certification of one family or the whole catalog."""
    extra = {"family": family, "replications": replications, "shrink": shrink, "suite": suite or None}
    if experiment_file is not None:
        with open(experiment_file) as f:
            extra["experiment"] = parse_json(f.read(), experiment_file)
    return _run_config(ctx, "verify", params, config_file, extra)


@cli.command("maxima")
@params_option
@config_option
@click.pass_context
def maxima_command(ctx, params, config_file):
    """Maximal inequalities."""
    return _run_config(ctx, "maxima", params, config_file)


@cli.group()
def matrix():
    """Quadratic forms and eigenvalue tools."""


def _matrix_command(name, help_text):
    @params_option
    @config_option
    @click.pass_context
    def command(ctx, params, config_file):
        return _run_config(ctx, f"matrix.{name}", params, config_file)

    command.__doc__ = help_text
    return matrix.command(name)(command)


_matrix_command("hw", "Diagonal-free Hanson-Wright tail.")
_matrix_command("chaos", "Gaussian chaos threshold.")
_matrix_command("quadform", "Quadratic form of a sub-Gaussian vector.")
_matrix_command("baiyin", "Non-asymptotic Bai-Yin window.")


@cli.group()
def hdreg():
    """High-dimensional regression studies."""


@hdreg.command("simulate")
@params_option
@config_option
@click.option("--family", type=click.Choice(["gaussian", "poisson", "ols"]), default=None)
@click.option("--n", type=int, default=None)
@click.option("--p", type=int, default=None)
@click.option("--s", type=int, default=None)
@click.option("--A", "A", type=float, default=None)
@click.option("--reps", type=int, default=None)
@click.pass_context
def hdreg_simulate_command(ctx, params, config_file, family, n, p, s, A, reps):
    """Replication study of least squares, the Lasso or the Poisson Lasso."""
    extra = {"family": family, "n": n, "p": p, "s": s, "A": A, "reps": reps}
    return _run_config(ctx, "hdreg.simulate", params, config_file, extra)


@cli.command("catalog")
@click.option("--family", default=None)
@click.pass_context
def catalog_command(ctx, family):
    """List the bound families with their schemas and anchors."""
    return _run_config(ctx, "catalog", extra={"family": family})


def run(args):
    """Invoke the command line with ``args`` and return the exit code."""
    try:
        code = cli.main(args=list(args), prog_name="conc-toolbox", standalone_mode=False)
    except click.ClickException as e:
        e.show()
        return EXIT_CONFIG
    except click.Abort:
        return EXIT_CONFIG
    except ValueError as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_CONFIG
    return EXIT_OK if code is None else int(code)


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
