"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A scenario or panel configuration is malformed or inconsistent."""


class EmptySectorError(ValueError):
    """No basis configuration satisfies the requested sector constraint."""


class CapacityError(RuntimeError):
    """A requested object would exceed a configured size guard."""


class BasisMismatchError(ValueError):
    """Operands were built over different bases."""


class ConvergenceError(RuntimeError):
    """An iterative routine failed to reach its tolerance within its budget."""
