"""
Monte-Carlo certification of tail bounds.

An Experiment simulates a statistic in fixed-size blocks, block b drawn from
counter position b of the experiment's stream, and counts exceedances of every
grid point. A grid point passes when the bound is at least the exact
(Clopper-Pearson) lower confidence limit of the exceedance probability at the
configured level, so a failure means the bound is violated beyond Monte-Carlo
noise.
"""
import json
import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np
import pandas as pd
from joblib import Parallel, delayed
from statsmodels.stats.proportion import proportion_confint

from conc_toolbox.bounds.tail_bound import RIGHT, TWO_SIDED
from conc_toolbox.global_vars import simulation
from conc_toolbox.utils.errors import IncompatibleExperimentError, require
from conc_toolbox.utils.rng import RngStream
from conc_toolbox.verification import models

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Experiment:
    model: dict
    t_grid: tuple
    replications: int = 100000
    seed: int = simulation.seed
    side: str = TWO_SIDED
    block_size: int = simulation.block_size
    stream_id: int = 0

    def __post_init__(self):
        models.validate(self.model)
        require(
            self.replications >= simulation.min_replications,
            f"need at least {simulation.min_replications} replications, got {self.replications}",
            IncompatibleExperimentError,
        )
        grid = tuple(float(t) for t in self.t_grid)
        require(len(grid) >= 1, "t_grid must not be empty", IncompatibleExperimentError)
        require(
            all(b > a for a, b in zip(grid, grid[1:])),
            "t_grid must be strictly increasing",
            IncompatibleExperimentError,
        )
        require(self.side in (TWO_SIDED, RIGHT), f"unknown side {self.side!r}", IncompatibleExperimentError)
        require(self.block_size >= 1, "block size must be >= 1")
        object.__setattr__(self, "t_grid", grid)

    @property
    def statistic(self):
        return self.model["statistic"]

    @property
    def stream(self):
        return RngStream(self.seed, self.stream_id)

    def blocks(self):
        """(block index, size) pairs covering all replications."""
        full, rest = divmod(self.replications, self.block_size)
        sizes = [self.block_size] * full + ([rest] if rest else [])
        return list(enumerate(sizes))

    def to_dict(self):
        return {
            "model": self.model,
            "t_grid": list(self.t_grid),
            "replications": self.replications,
            "seed": self.seed,
            "side": self.side,
            "block_size": self.block_size,
            "stream_id": self.stream_id,
        }

    @classmethod
    def from_dict(cls, data):
        allowed = {"model", "t_grid", "replications", "seed", "side", "block_size", "stream_id"}
        unknown = set(data) - allowed
        require(not unknown, f"unknown experiment keys {sorted(unknown)}", IncompatibleExperimentError)
        return cls(**{**data, "t_grid": tuple(data["t_grid"])})


@dataclass
class CoverageReport:
    rows: pd.DataFrame
    passed: bool
    seed: int
    replications: int
    family: str = ""
    runtime: float = field(default=0.0, compare=False)

    @property
    def failures(self):
        return int((~self.rows["verdict"]).sum())

    def to_dict(self):
        return {
            "family": self.family,
            "passed": self.passed,
            "seed": self.seed,
            "replications": self.replications,
            "rows": self.rows.to_dict(orient="records"),
        }

    def to_json(self, path=None):
        text = json.dumps(self.to_dict(), indent=2, sort_keys=True)
        if path is not None:
            with open(path, "w") as f:
                f.write(text)
        return text

    def to_csv(self, path=None):
        frame = self.rows.assign(family=self.family, seed=self.seed)
        return frame.to_csv(path, index=False, float_format="%.17g")


def binomial_upper(k, R, level=None):
    """Exact one-sided upper confidence limit for a binomial proportion."""
    level = simulation.binomial_level if level is None else level
    require(0 <= k <= R and R >= 1, f"need 0 <= k <= R, got k={k}, R={R}")
    if k == R:
        return 1.0
    return float(proportion_confint(k, R, alpha=2.0 * level, method="beta")[1])


def binomial_lower(k, R, level=None):
    """Exact one-sided lower confidence limit for a binomial proportion."""
    level = simulation.binomial_level if level is None else level
    require(0 <= k <= R and R >= 1, f"need 0 <= k <= R, got k={k}, R={R}")
    if k == 0:
        return 0.0
    return float(proportion_confint(k, R, alpha=2.0 * level, method="beta")[0])


def check_compatible(experiment, bound):
    if experiment.side == TWO_SIDED and bound.side == RIGHT:
        raise IncompatibleExperimentError(
            f"{bound.family} bounds a right tail; it cannot certify |S| exceedances"
        )
    for t in experiment.t_grid:
        lo, hi = bound.domain
        if not lo <= t <= hi:
            raise IncompatibleExperimentError(f"t={t} lies outside the domain of {bound.family}")


def _count_block(model, stream, block, size, t_grid, absolute):
    values = models.simulate(model, stream.generator(block), size)
    if absolute:
        values = np.abs(values)
    values = np.sort(values)
    # number of values >= t
    return size - np.searchsorted(values, np.asarray(t_grid), side="left")


def exceedance_counts(experiment, threads=1):
    absolute = experiment.side == TWO_SIDED and experiment.statistic in models.SIGNED
    stream = experiment.stream
    logger.debug("simulating %d blocks of %s", len(experiment.blocks()), experiment.statistic)
    counts = Parallel(n_jobs=threads)(
        delayed(_count_block)(experiment.model, stream, block, size, experiment.t_grid, absolute)
        for block, size in experiment.blocks()
    )
    return np.sum(counts, axis=0).astype(int)


def run(experiment, bound, threads=1, level=None):
    """Certify ``bound`` on ``experiment``; deterministic in the seed, independent of threads."""
    level = simulation.binomial_level if level is None else level
    check_compatible(experiment, bound)
    start = time.time()
    counts = exceedance_counts(experiment, threads)
    R = experiment.replications
    rows = []
    for t, k in zip(experiment.t_grid, counts):
        value = bound(t)
        lower = binomial_lower(int(k), R, level)
        rows.append(
            {
                "t": t,
                "bound": value,
                "raw_bound": bound.raw(t),
                "exceedances": int(k),
                "empirical_freq": k / R,
                "binomial_lower": lower,
                "binomial_upper": binomial_upper(int(k), R, level),
                "verdict": bool(value >= lower),
            }
        )
    frame = pd.DataFrame(rows)
    passed = bool(frame["verdict"].all())
    runtime = time.time() - start
    logger.info(
        "%s: %d of %d grid points failed (%.2fs)", bound.family, int((~frame["verdict"]).sum()), len(frame), runtime
    )
    return CoverageReport(frame, passed, experiment.seed, R, bound.family, runtime)


def falsify(experiment, bound, shrink_factor, threads=1):
    """Run the same experiment against the bound multiplied by ``shrink_factor``."""
    require(shrink_factor >= 0, f"shrink factor must be >= 0, got {shrink_factor}")
    return run(experiment, bound.scaled(shrink_factor), threads)


@dataclass(frozen=True)
class ExpectationCheck:
    mean: float
    se: float
    bound: float
    passed: bool

    def to_dict(self):
        return {"mean": self.mean, "se": self.se, "bound": self.bound, "passed": self.passed}


def expectation_check(model, bound, replications=10000, seed=None, slack=None, threads=1):
    """
    Compare the Monte-Carlo mean of the statistic with an expectation bound,
    allowing ``slack`` standard errors.
    """
    models.validate(model)
    seed = simulation.seed if seed is None else seed
    slack = simulation.expectation_se_slack if slack is None else slack
    experiment = Experiment(model, (0.0,), replications, seed)
    stream = experiment.stream
    blocks = Parallel(n_jobs=threads)(
        delayed(models.simulate)(model, stream.generator(block), size)
        for block, size in experiment.blocks()
    )
    values = np.concatenate(blocks)
    mean = float(np.mean(values))
    se = float(np.std(values, ddof=1) / math.sqrt(len(values)))
    return ExpectationCheck(mean, se, bound, bool(mean <= bound + slack * se))


def suite(entries, replications=100000, seed=None, threads=1, shrink_factor=None):
    """
    Certify a list of (family, bound, experiment) triples and combine the reports.

    Returns (combined DataFrame, overall pass flag, list of reports).
    """
    seed = simulation.seed if seed is None else seed
    reports = []
    for index, (family, bound, experiment) in enumerate(entries):
        experiment = replace(experiment, replications=replications, seed=seed, stream_id=index)
        if shrink_factor is None:
            report = run(experiment, bound, threads)
        else:
            report = falsify(experiment, bound, shrink_factor, threads)
        report.family = family
        reports.append(report)
    frame = pd.concat([r.rows.assign(family=r.family) for r in reports], ignore_index=True)
    return frame, all(r.passed for r in reports), reports


def shrink_expected_to_fail(report):
    """Whether some grid point saw more than 10 exceedances, enough for a shrunk bound to be caught."""
    return bool((report.rows["exceedances"] > 10).any())
