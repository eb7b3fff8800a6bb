"""Exception hierarchy shared by all modules."""


class DyadrepError(Exception):
    """Base class for every error raised by the package."""


class RankError(DyadrepError, ValueError):
    """A rank argument is out of range or would exceed the configured cap."""


class PreconditionError(DyadrepError, ValueError):
    """An input violates an operation's precondition (e.g. zero mean generator)."""


class UnsupportedDualError(DyadrepError):
    """No closed-form Koethe dual norm is implemented for this space."""


class NoContractionError(DyadrepError):
    """The greedy engine found no contraction factor below one."""

    def __init__(self, message, lam=None, theta=None):
        super().__init__(message)
        self.lam = lam
        self.theta = theta


class ContractionViolation(DyadrepError):
    """A greedy round expanded the residual beyond the certified factor."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])
