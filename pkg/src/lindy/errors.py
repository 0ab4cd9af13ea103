"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: ``ConfigError`` -> 2,
``CapacityExceeded`` -> 3, ``InvariantViolation`` -> 1.
"""


class LindyError(Exception):
    pass


class ConfigError(LindyError, ValueError):
    """Malformed user input (delta grammar, p, m grid, ...)."""


class CapacityExceeded(LindyError):
    """A query reached past the precomputed index horizon."""


class DomainError(LindyError, ValueError):
    pass


class InvalidMilestones(LindyError, ValueError):
    pass


class SearchFailure(LindyError):
    pass


class InvariantViolation(LindyError):
    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness
