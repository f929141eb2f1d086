"""Exception hierarchy shared by every module."""


class HslError(Exception):
    """Base class for all errors raised by hslab."""


class DomainError(HslError, ValueError):
    """A point or parameter lies outside the domain of an operation."""


class ParameterError(HslError, ValueError):
    """Invalid or inconsistent parameters."""


class CapacityError(HslError):
    """A request would be unbounded or exceeds the supported size."""


class UnsupportedError(HslError):
    """The requested mode is not implemented for this object."""


class EvaluationError(HslError, ArithmeticError):
    """An integrand produced a non-finite value at a quadrature node."""

    def __init__(self, message, node=None):
        super().__init__(message)
        self.node = node


class DivergenceError(HslError, ArithmeticError):
    """An integral does not converge under refinement."""

    def __init__(self, message, levels=()):
        super().__init__(message)
        self.levels = tuple(levels)


class TruncationError(HslError, ArithmeticError):
    """A truncated series cannot meet the requested tolerance."""

    def __init__(self, message, tail_bound=None):
        super().__init__(message)
        self.tail_bound = tail_bound
