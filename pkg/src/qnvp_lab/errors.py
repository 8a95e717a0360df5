"""Exception hierarchy shared by all modules."""


class QnvpError(Exception):
    """Base class for every error raised by the library."""


class NumericInputError(QnvpError, ValueError):
    """An input array contains NaN or infinite entries."""


class QuasineutralSingularityError(QnvpError, ValueError):
    """A Debye-scale operation was requested with ``delta == 0``."""


class DensityFloorError(QnvpError, ValueError):
    """The electron density dropped below the configured floor."""


class UsageError(QnvpError, ValueError):
    """An operation was called with arguments outside its contract."""


class ParameterError(QnvpError, ValueError):
    """A physical parameter is outside its admissible range."""


class ResourceError(QnvpError, ValueError):
    """The request would need an infeasible amount of memory or time."""


class ConfigError(QnvpError, ValueError):
    """An experiment configuration failed validation."""


class DivergenceError(QnvpError, ArithmeticError):
    """Time integration produced non-finite values.

    Attributes:
        step: index of the step that produced the first non-finite value.
        series: diagnostics recorded before the failure, if any.
    """

    def __init__(self, message, step=None, series=None):
        super().__init__(message)
        self.step = step
        self.series = series
