"""Exception types shared across the toolkit."""


class AmtError(Exception):
    """Base class for all toolkit errors."""


class SingularDensityError(AmtError, ValueError):
    """The density is at or below the floor where the virtual valuation is undefined."""


class DivergentMomentError(AmtError, ArithmeticError):
    """A moment integral did not converge to a finite value."""


class DegenerateCorrelationError(AmtError, ArithmeticError):
    """The virtual valuation and the transform are perfectly correlated."""


class PivotalValueError(AmtError, ArithmeticError):
    """Bisection could not bracket a pivotal value."""


class UnsupportedParityError(AmtError, ValueError):
    """The pairwise transfer scheme needs an even number of agents."""


class UnsupportedUtilityError(AmtError, ValueError):
    """The utility is not monotone in the valuation at the chosen quantity."""


class UnboundedSupportError(AmtError, ValueError):
    """The operation needs bounded valuation supports."""


class SimulationError(AmtError, RuntimeError):
    """Too many replications failed during a Monte Carlo run."""


class ConfigError(AmtError, ValueError):
    """An experiment configuration is invalid."""
