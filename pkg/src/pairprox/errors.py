"""Exception hierarchy shared by every pairprox module."""


class PairProxError(Exception):
    """Base class for all errors raised by pairprox."""


class DimensionMismatch(PairProxError, ValueError):
    pass


class NonFinite(PairProxError, ValueError):
    pass


class NotSymmetric(PairProxError, ValueError):
    pass


class SingularMatrix(PairProxError):
    """A pivot fell below the relative singularity threshold."""

    def __init__(self, message, pivot_index=None):
        super().__init__(message)
        self.pivot_index = pivot_index


class NoConvergence(PairProxError):
    """An iterative routine hit its iteration cap.

    ``trace`` carries the partial iterate trace when one exists.
    """

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class HypothesisViolated(PairProxError):
    """The perturbation ``A1`` does not make ``A1^T A`` monotone."""

    def __init__(self, message, witness, value):
        super().__init__(message)
        self.witness = witness
        self.value = value


class SingularJacobian(PairProxError):
    """Jacobian not invertible; ``index`` is the iterate index, if any."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ResolventError(PairProxError):
    pass


class InnerSingular(ResolventError):
    pass


class InnerNoConvergence(ResolventError):
    pass


class ResolventFailure(PairProxError):
    """The warped resolvent could not be evaluated at outer iteration ``n``."""

    def __init__(self, message, n, trace=None):
        super().__init__(message)
        self.n = n
        self.trace = trace


class ScheduleInvalid(PairProxError, ValueError):
    pass


class LeftNeighborhood(PairProxError):
    def __init__(self, message, index=None, trace=None):
        super().__init__(message)
        self.index = index
        self.trace = trace


class MissingReference(PairProxError, ValueError):
    pass


class NonPositive(PairProxError, ValueError):
    pass


class ConfigError(PairProxError, ValueError):
    pass


class ScheduleWarning(UserWarning):
    """Schedules fall outside the range covered by the convergence theory."""
