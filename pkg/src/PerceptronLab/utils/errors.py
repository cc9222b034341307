class PerceptronLabError(Exception):
    """Base class for every error raised by the library."""


class DomainError(PerceptronLabError, ValueError):
    """An argument lies outside the domain an operation is defined on."""


class DimensionError(PerceptronLabError, ValueError):
    """An instance is too large (or malformed) for exact enumeration."""


class SampleError(PerceptronLabError, ValueError):
    """A Monte Carlo sample budget is not usable."""


class BracketError(PerceptronLabError):
    """Root bracket endpoints do not straddle zero."""

    def __init__(self, message, lower=None, upper=None, f_lower=None, f_upper=None):
        super().__init__(message)
        self.lower = lower
        self.upper = upper
        self.f_lower = f_lower
        self.f_upper = f_upper


class NonConvergence(PerceptronLabError):
    """A quadrature rule could not reach its tolerance within its budget."""

    def __init__(self, message, best_value=None, achieved_error=None, nodes_used=None):
        super().__init__(message)
        self.best_value = best_value
        self.achieved_error = achieved_error
        self.nodes_used = nodes_used


class ConeEmpty(PerceptronLabError):
    """No feasible starting direction was found inside a constraint cone."""

    def __init__(self, message, constraint_index=None):
        super().__init__(message)
        self.constraint_index = constraint_index


# Exit codes used by the command line tools.
EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_IO = 3
EXIT_NUMERICAL = 4


def exit_code_for(exc):
    if isinstance(exc, (DomainError, DimensionError, SampleError)):
        return EXIT_DOMAIN
    if isinstance(exc, OSError):
        return EXIT_IO
    if isinstance(exc, (NonConvergence, BracketError, ConeEmpty)):
        return EXIT_NUMERICAL
    return 1
