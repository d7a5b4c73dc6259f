"""Exception hierarchy shared by the solvers and the CLI."""


class InvconeError(Exception):
    """Base class; ``category`` is the machine-readable tag used by the CLI."""

    category = "error"


class ConfigError(InvconeError, ValueError):
    """Invalid system definition or run configuration."""

    category = "config"

    def __init__(self, message, field=None):
        self.field = field
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)


class ConvergenceError(InvconeError, RuntimeError):
    """Newton iteration failed to reach the residual tolerance."""

    category = "convergence"

    def __init__(self, message, iterations=None, residual=None):
        self.iterations = iterations
        self.residual = residual
        super().__init__(message)


class SingularJacobianError(ConvergenceError):
    category = "singular-jacobian"

    def __init__(self, message, condition=None):
        self.condition = condition
        super().__init__(message)


class RankDeficientError(InvconeError, ValueError):
    category = "rank-deficient"

    def __init__(self, message, rank):
        self.rank = rank
        super().__init__(message)


class NoReturnError(InvconeError, RuntimeError):
    """A trajectory did not return to the switching plane within the horizon."""

    category = "no-return"


class GrazingError(InvconeError, RuntimeError):
    """A periodic orbit degenerated into a tangency with the switching plane."""

    category = "grazing"


class ContinuationStall(InvconeError, RuntimeError):
    """Step size fell below the minimum during path following."""

    category = "stall"


class CrossingAccumulation(InvconeError, RuntimeError):
    category = "crossing-accumulation"


class NotSettledError(InvconeError, RuntimeError):
    """Brute-force integration did not reach steady state."""

    category = "not-settled"

    def __init__(self, message, drift):
        self.drift = drift
        super().__init__(message)
