"""Exception types shared across the package."""


class KlearnError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(KlearnError, ValueError):
    """Raised when an argument violates an operation's precondition."""


class DimacsError(KlearnError, ValueError):
    """Malformed DIMACS input."""


class UnsatisfiedError(KlearnError):
    """An assignment does not satisfy the formula it is paired with."""


class UnsatisfiableError(KlearnError):
    """The formula has no satisfying assignment, so the Gibbs law is undefined."""


class CapExceededError(KlearnError):
    """Exhaustive enumeration was requested above the variable cap."""


class BudgetExhaustedError(KlearnError):
    """A randomized procedure ran out of attempts."""

    def __init__(self, message, attempts=None):
        super().__init__(message)
        self.attempts = attempts
