"""Exception types shared across the package.

Everything derives from TsError so callers can catch library failures with a
single except clause while still being able to tell domain errors apart.
"""


class TsError(Exception):
    """Base class for all tsdecay errors."""


class NotInTimeScale(TsError):
    """A point was required to belong to the time scale but does not."""


class EmptyWindow(TsError):
    """An operation was asked to work over a window containing no points."""


class AccumulationPoint(TsError):
    """Forward jump / graininess requested at an accumulation point (e.g. 0 in q^Z u {0})."""


class NotDifferentiablePoint(TsError):
    """Delta derivative requested where it is not defined (left-scattered maximum)."""


class QuadratureFailure(TsError):
    """Dense-segment quadrature failed to reach the requested tolerance."""


class IncompatibleFamily(TsError):
    """A built-in shift family cannot be instantiated on the given time scale."""


class OutOfDomain(TsError):
    """A shift or delay evaluation left the admissible domain T*."""


class NotRegressive(TsError):
    """1 + mu(t) p(t) vanished (to tolerance) at a right-scattered point."""


class NegativeOneplus(TsError):
    """1 + mu(t) p(t) went negative at a right-scattered point."""


class PreconditionViolated(TsError):
    """An operation's documented precondition does not hold for the inputs."""


class OutsideS(TsError):
    """Characteristic polynomial evaluated at k outside the admissible window S(t)."""


class NoSignChange(TsError):
    """Root scan found no sign change inside the admissible window."""


class NotBracketed(TsError):
    """Refinement was asked to run on an interval that does not bracket a root."""


class FieldGap(TsError):
    """A root field lookup fell outside the field's grid coverage."""


class HistoryGap(TsError):
    """A delayed evaluation needed a state value that no history covers."""


class NegativeBaseFractionalPower(TsError):
    """x**ell requested for x < 0 with fractional ell."""


class NonpositiveTail(TsError):
    """Decay-rate fit requested on a trajectory tail that is not strictly positive."""


class WindowMismatch(TsError):
    """Trajectory window and root-field grid do not cover each other."""


class ConfigError(TsError):
    """Configuration document rejected; message carries a JSON pointer to the offender."""

    def __init__(self, pointer: str, message: str):
        self.pointer = pointer
        super().__init__(f"{pointer}: {message}")
