"""Exception types shared across the package."""


class RenewkitError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveBeta(RenewkitError):
    """Tail index must be strictly positive."""


class TruncationTooCoarse(RenewkitError):
    """Truncated law would carry more than half of its mass in the remainder."""


class NotNormalized(RenewkitError):
    """Masses do not form a probability vector."""


class PeriodicLaw(RenewkitError):
    """Support lies on a strict arithmetic progression (gcd > 1)."""


class POutOfRange(RenewkitError):
    """Survival probability must lie strictly inside (0, 1)."""


class CapacityExceeded(RenewkitError):
    """Requested horizon exceeds the configured memory bound."""


class MissingTailIndex(RenewkitError):
    """Operation needs a law with a known tail index and tail constant."""


class OutOfDomain(RenewkitError):
    """Argument outside the validated domain of a special function."""


class BetaOutOfRange(RenewkitError):
    """Tail index outside the interval this operation is defined on."""


class HypothesisViolated(RenewkitError):
    """Input series do not satisfy the vanishing-at-one hypothesis."""


class ZeroCoefficientInWindow(RenewkitError):
    """Log-log fit window contains a zero coefficient."""


class QOutOfRange(RenewkitError):
    """Grid exponent q must lie strictly inside (0, 1)."""
