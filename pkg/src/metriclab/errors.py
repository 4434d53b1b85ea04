"""Exception types shared across the laboratory modules."""


class MetricLabError(Exception):
    """Base class for all metriclab errors."""


class DomainError(MetricLabError, ValueError):
    """A point lies outside the domain it was required to be in."""


class GridError(MetricLabError, RuntimeError):
    """Quadrature grid construction failed (e.g. no node falls inside the domain)."""


class FactorizationError(MetricLabError, RuntimeError):
    """Gram matrix factorization hit a non-positive pivot.

    Carries the degree at which positivity failed; this usually signals a
    polynomial degree too large for the grid resolution.
    """

    def __init__(self, degree: int, pivot: float):
        self.degree = degree
        self.pivot = pivot
        super().__init__(
            f"non-positive Cholesky pivot {pivot:.3e} at degree {degree}; "
            f"degree too large for the grid resolution"
        )


class KernelInstabilityError(MetricLabError, RuntimeError):
    """Kernel-derived quantity became numerically untrustworthy.

    Raised instead of clamping: a negative curvature radicand or a kernel
    value below the positivity floor means the degree or grid is too coarse
    at the queried point.
    """


class InvalidPathError(MetricLabError, ValueError):
    """A polyline leaves the domain."""


class ResolutionTooCoarseError(MetricLabError, RuntimeError):
    """The grid graph at the requested resolution does not connect the endpoints."""


class DivergentDistanceError(MetricLabError, RuntimeError):
    """Weighted distance diverges: an endpoint is on (or within one
    resolution step of) the boundary while the density blows up there."""


class DivergentValueError(MetricLabError, RuntimeError):
    """A mean or modulus evaluated to a non-finite value (divergent report)."""


class InsufficientDataError(MetricLabError, ValueError):
    """Not enough usable points for a power-law fit."""


class ConfigError(MetricLabError, ValueError):
    """Experiment configuration is malformed or inconsistent."""
