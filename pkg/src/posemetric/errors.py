"""Exception and warning types raised across the package."""


class PoseError(ValueError):
    """Base class for data errors (bad input values, malformed files)."""


class GimbalLockWarning(RuntimeWarning):
    """Emitted when an Euler chart is evaluated at |pitch| = pi/2."""


class GimbalLock(PoseError):
    pass


class GimbalLockTarget(GimbalLock):
    """A loss target has no canonical Euler chart."""


class NotSkew(PoseError):
    pass


class NotRotation(PoseError):
    pass


class ZeroQuaternion(PoseError):
    pass


class NearPiRotation(PoseError):
    pass


class NearPiEstimate(PoseError):
    pass


class DivergedLoss(PoseError):
    pass


class ParseError(PoseError):
    def __init__(self, line, reason):
        self.line = line
        self.reason = reason
        super().__init__(f"line {line}: {reason}")


class InvalidRotation(PoseError):
    pass


class LengthMismatch(PoseError):
    pass


class DeltaTooLarge(PoseError):
    pass
