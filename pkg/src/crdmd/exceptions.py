"""Exception types shared across the package."""


class CrdmdError(Exception):
    """Base class for all package errors."""


class DimensionError(CrdmdError, ValueError):
    """Array or field dimensions do not match what an operation requires."""


class FormatError(CrdmdError, ValueError):
    """A file on disk does not conform to its declared binary/CSV format."""


class ConfigError(CrdmdError, ValueError):
    """Invalid configuration: bad key, bad value, or inconsistent settings."""


class NumericalError(CrdmdError, RuntimeError):
    """An iterative numerical routine failed to converge within its cap."""


class DivergenceError(NumericalError):
    """A solver iterate became non-finite.

    Carries the offending block name and the iteration at which the
    non-finite value first appeared.
    """

    def __init__(self, block: str, iteration: int):
        self.block = block
        self.iteration = iteration
        super().__init__(
            f"non-finite values in block {block!r} at iteration {iteration}"
        )
