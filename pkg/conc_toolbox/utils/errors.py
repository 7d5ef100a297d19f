"""Exceptions raised by the toolbox. All derive from ValueError."""


class ParameterDomainError(ValueError):
    """A parameter lies outside the range a law or a bound is defined on."""


class MGFDomainError(ValueError):
    """An exponential moment is requested outside its convergence domain."""


class InfiniteNormError(ValueError):
    """The requested Orlicz-type norm is infinite for this law."""


class NoSolutionError(ValueError):
    """A fixed-point or inversion problem has no admissible solution."""


class IncompatibleExperimentError(ValueError):
    """A simulated statistic cannot certify the given bound."""


class RankDeficientError(ValueError):
    pass


class ConfigError(ValueError):
    pass


def require(condition, message, error=ParameterDomainError):
    if not condition:
        raise error(message)
