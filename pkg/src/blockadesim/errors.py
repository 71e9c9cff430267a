"""Exception taxonomy.

Everything raised on purpose derives from BlockadeSimError so callers can
catch package errors without swallowing genuine bugs. The CLI maps these
onto exit codes (input problems 2, non-convergence 3, resource caps 4).
"""


class BlockadeSimError(Exception):
    """Base class for all errors raised by blockadesim."""


class InvalidParameterError(BlockadeSimError, ValueError):
    """A numeric argument is outside its documented domain."""


class GeometryError(BlockadeSimError, ValueError):
    """Atom positions are unusable (coincident atoms, bad shape, non-finite)."""


class SizeCapError(BlockadeSimError):
    """A problem size exceeds its configured cap (basis atoms, grid cells)."""


class BasisMismatchError(BlockadeSimError, ValueError):
    """A state and an operator were built over different bases."""


class DegenerateDataError(BlockadeSimError, ValueError):
    """Data carries no usable signal (all zeros, empty ensemble)."""


class DomainError(BlockadeSimError, ValueError):
    """Data violates a transform's domain (non-positive values under log)."""


class RankDeficiencyError(BlockadeSimError, ValueError):
    """A regression design matrix has no usable rank (all x identical)."""


class InputFileError(BlockadeSimError):
    """A positions or CSV file failed to parse; message cites file and line."""


class ConfigError(BlockadeSimError):
    """A run configuration is malformed or inconsistent."""
