"""metriclab: weighted metrics and boundary-growth equivalence experiments
on bounded plane domains."""

__version__ = "0.1.0"

from . import bergman, geometry, growth, maps, metrics  # noqa: F401
from . import experiments  # noqa: F401  (imports maps/metrics, keep last)
from .errors import (  # noqa: F401
    ConfigError,
    DivergentDistanceError,
    DivergentValueError,
    DomainError,
    FactorizationError,
    GridError,
    InsufficientDataError,
    InvalidPathError,
    KernelInstabilityError,
    MetricLabError,
    ResolutionTooCoarseError,
)
