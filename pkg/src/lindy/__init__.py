"""Block-mixing bases of l_p (0 < p <= 1): construction, greedy
approximation and certified bounds for their conditionality constants."""

from .errors import (
    CapacityExceeded,
    ConfigError,
    DomainError,
    InvalidMilestones,
    InvariantViolation,
    LindyError,
    SearchFailure,
)
from .indexing import DeltaSpec, IndexTables, parse_delta
from .sparse import Enclosure, PContext, SparseVector

__version__ = "0.1.0"
