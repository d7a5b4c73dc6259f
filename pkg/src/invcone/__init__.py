"""Periodic orbits of mechanical systems with a one-sided unilateral spring,
computed through invariant cones of the equivalent homogeneous system."""

from .errors import (  # noqa: F401
    ConfigError,
    ContinuationStall,
    ConvergenceError,
    GrazingError,
    InvconeError,
    NoReturnError,
    NotSettledError,
    RankDeficientError,
    SingularJacobianError,
)
from .model import (  # noqa: F401
    MechanicalSystem,
    augment_autonomous,
    augment_forced,
    jiang_system,
    to_lure,
)

__version__ = "0.1.0"
