"""Exception types shared across the package."""


class RobustMenuError(Exception):
    """Base class for all package errors."""


class DomainError(RobustMenuError):
    """An input is outside the domain an operation is defined on."""


class InconsistentAmbiguityError(RobustMenuError):
    """No probability distribution satisfies the ambiguity constraints."""


class NumericError(RobustMenuError):
    """A numerical routine failed to converge or stalled."""
