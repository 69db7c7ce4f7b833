"""Exception types shared across the package."""


class EdgeSchedError(Exception):
    """Base class for package-specific errors."""


class InvalidCapacityError(EdgeSchedError, ValueError):
    """A scheduler was given a nonpositive CPU capacity."""


class PreconditionError(EdgeSchedError, ValueError):
    """An operation was called with inputs violating its documented contract."""


class InstanceTooLargeError(EdgeSchedError, ValueError):
    """Exhaustive search was requested above the enforced size cap."""


class DegenerateGeometryError(EdgeSchedError, ValueError):
    """Channel geometry is singular (zero transmitter-receiver distance)."""


class UnreachableServerError(EdgeSchedError, ValueError):
    """A zero link rate makes the transmission delay undefined."""


class NoCoverageError(EdgeSchedError, RuntimeError):
    """A user has no candidate servers to offload to."""


class ConfigError(EdgeSchedError, ValueError):
    """A configuration file failed to parse or validate."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field
