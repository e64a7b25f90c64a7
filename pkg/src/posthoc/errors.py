"""Exception hierarchy.

Every error raised on purpose by the package derives from `PosthocError`, so
the CLI can report a domain failure by class name and exit with status 1.
"""


class PosthocError(Exception):
    """Base class for domain errors."""


class DomainError(PosthocError, ValueError):
    """An argument lies outside the domain of a formula."""


class BracketError(PosthocError):
    """The root-finding bracket does not straddle a sign change."""


class MaxIterationsError(PosthocError):
    """An iterative solver did not converge within its iteration budget."""


class NoRootError(PosthocError):
    """An implicit equation has no solution for the given inputs."""


class EmptySummaryError(PosthocError):
    """A statistic was requested from a summary with no observations."""


class InsufficientSamplesError(PosthocError):
    """Too few observations for the requested quantity."""


class DegenerateSampleError(PosthocError):
    """A self-normalized ratio has a zero denominator and nonzero numerator."""


class InvalidGridError(PosthocError, ValueError):
    """A discretized mixing distribution is not a probability vector."""


class EmptyIntervalError(PosthocError):
    """The e-value minimum already exceeds the rejection threshold."""


class NonNestedError(PosthocError):
    """A confidence family rejected at a smaller alpha but not a larger one."""


class DataParseError(PosthocError, ValueError):
    """Input data could not be parsed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
