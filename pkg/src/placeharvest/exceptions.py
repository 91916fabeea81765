"""Exception hierarchy shared by the pipeline stages."""


class PlaceHarvestError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3


class ConfigError(PlaceHarvestError, ValueError):
    """Invalid configuration or command-line usage."""

    exit_code = 1


class DataError(PlaceHarvestError, ValueError):
    """Input data could not be read or does not match its declared format."""

    exit_code = 2


class InvariantError(PlaceHarvestError, AssertionError):
    """An internal consistency check failed."""

    exit_code = 3


class DegenerateGeometryError(PlaceHarvestError, ValueError):
    """Too few, coincident or collinear points to build a polygon."""

    exit_code = 2
