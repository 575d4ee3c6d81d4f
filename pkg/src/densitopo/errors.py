"""Exception hierarchy shared across the package.

Each class maps to a distinct process exit code so shell callers can
tell misconfiguration apart from bad data and from internal bugs.
"""


class ConfigError(ValueError):
    """Invalid configuration or option combination. CLI exit code 2."""


class DataError(ValueError):
    """Malformed, inconsistent, or unusable input data. CLI exit code 3."""


class DegenerateDataError(DataError):
    """Data that is formally valid but breaks an estimator assumption."""


class InternalInvariantError(RuntimeError):
    """A postcondition the pipeline guarantees was violated. CLI exit code 4."""


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_INTERNAL = 4
