"""Exception types shared across the package."""


class RuleboundsError(Exception):
    """Base class for errors raised by this package."""


class ConfigError(RuleboundsError):
    """A configuration file or model declaration is invalid."""


class DataError(RuleboundsError):
    """A data file or record table is malformed or out of domain."""


class InfeasibleModelError(RuleboundsError):
    """The observed distribution is incompatible with the assumed structure.

    Carries the most-violated constraint and the minimal total violation
    found while trying to fit the response-type mixture.
    """

    def __init__(self, message, *, worst_constraint=None, violation=None):
        super().__init__(message)
        self.worst_constraint = worst_constraint
        self.violation = violation


class EnumerationCapError(RuleboundsError):
    """A response-type space is too large to materialize.

    ``count`` is the exact class count computed before enumeration,
    ``cap`` the configured limit it exceeded.
    """

    def __init__(self, message, *, count, cap):
        super().__init__(message)
        self.count = count
        self.cap = cap


class SolverError(RuleboundsError):
    """The linear-program solver failed in a way that indicates a bug."""
