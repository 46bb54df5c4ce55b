"""Exception types shared across the package."""


class DslError(Exception):
    """Base class for every error this package raises on purpose."""


class ConfigError(DslError):
    """Invalid run configuration (unknown keys, out-of-domain values)."""


class NonNormalizableError(DslError):
    """Parameter set does not define a normalizable joint density."""


class SingularProductivityError(DslError):
    """The productivity reparametrization degenerates (size exponent at 1)."""


class DomainError(DslError, ValueError):
    """Density argument outside its domain (nonpositive sales/labor)."""


class DataError(DslError):
    """Problem with an input data table."""


class MalformedHeaderError(DataError):
    """CSV header does not match the firm-table schema."""


class EmptySourceError(DataError):
    """CSV contains no data rows."""


class AllRowsRejectedError(DataError):
    """Every CSV row failed validation."""


class EmptyTableError(DataError):
    """Operation needs more records than the table holds."""


class InsufficientDataError(DataError):
    """Too few observations for the requested fit."""


class DegenerateXError(DataError):
    """Conditioning variable has zero variance."""


class NoBinsSurviveError(DataError):
    """No conditioning bin met the minimum occupancy."""


class NegativeCurvatureError(DataError):
    """Fitted log-density curvature has the wrong sign for a lognormal."""


class DomainExhaustedError(DslError):
    """Every evaluation point fell outside the supplied function domains."""
