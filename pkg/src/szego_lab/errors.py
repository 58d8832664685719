"""Exception types shared across the package."""


class SzegoLabError(Exception):
    """Base class for all errors raised by szego_lab."""


class CapacityError(SzegoLabError):
    """A size limit (prime table, matrix dimension, enumeration cap) was hit.

    ``required`` carries the limit that would have been needed, when known.
    """

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class DomainError(SzegoLabError, ValueError):
    """A pointwise map or functional was applied outside its domain."""


class ConfigError(SzegoLabError, ValueError):
    """Malformed experiment configuration or input file."""
