"""Exception types shared across the package.

The CLI maps these onto exit codes, so each class carries the code it
should produce.
"""


class SchurCodeError(Exception):
    exit_code = 1


class PreconditionError(SchurCodeError, ValueError):
    """An input violates an operation's precondition."""

    exit_code = 3


class SpectrumError(PreconditionError):
    """Invalid probability vector (non-positive entries, bad sum, ties where
    a strict order is required)."""


class SizeCapError(PreconditionError):
    """A brute-force oracle was asked for an instance above its size cap."""


class DivergenceError(PreconditionError):
    """A relative entropy is infinite: the reference state misses part of
    the support."""


class KraftError(PreconditionError):
    """Codeword lengths violate the Kraft inequality."""


class RankAmbiguityError(SchurCodeError, ArithmeticError):
    """Singular values too close to the numerical-rank threshold to decide."""

    exit_code = 3


class BudgetError(SchurCodeError, RuntimeError):
    """Numerical integration did not reach the requested tolerance."""

    exit_code = 4

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BoundViolation(SchurCodeError, AssertionError):
    """A verified inequality failed beyond its numerical tolerance."""

    exit_code = 1
