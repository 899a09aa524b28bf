"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class PoleError(DomainError):
    """Smooth-coordinate formula evaluated where a collapsing facet vanishes."""


class MalformedPolygonError(ValueError):
    """Vertices and facet data of a polygon are inconsistent."""


class ConfigError(ValueError):
    """Invalid run configuration (grid sizes, tolerances, parameter values)."""
