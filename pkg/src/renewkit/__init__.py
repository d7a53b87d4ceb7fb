"""Verification laboratory for terminating renewal chains.

Exact renewal sequences and occupation statistics, reproducible Monte Carlo
over terminating paths, and numeric audits of the asymptotic laws that govern
heavy-tailed return times: tail-equivalence of the renewal sequence, the
arcsine law of the last visit, Mittag-Leffler moments and stable scaling.
"""

from . import distributions, experiments, montecarlo, occupation, series
from .errors import (
    BetaOutOfRange,
    CapacityExceeded,
    HypothesisViolated,
    MissingTailIndex,
    NonPositiveBeta,
    NotNormalized,
    OutOfDomain,
    PeriodicLaw,
    POutOfRange,
    QOutOfRange,
    RenewkitError,
    TruncationTooCoarse,
    ZeroCoefficientInWindow,
)
from .montecarlo import SimConfig, TerminatingPath
from .laws import (
    ReturnLaw,
    TransientLaw,
    custom_return,
    defective_tail,
    power_law_return,
    puncture,
)
from .renewal import (
    RenewalSequence,
    diag_pointwise,
    diag_tailsum,
    renewal_direct,
    renewal_fast,
    total_mass,
)

__all__ = [
    "ReturnLaw",
    "TransientLaw",
    "custom_return",
    "power_law_return",
    "puncture",
    "defective_tail",
    "RenewalSequence",
    "renewal_direct",
    "renewal_fast",
    "total_mass",
    "diag_pointwise",
    "diag_tailsum",
    "RenewkitError",
    "NonPositiveBeta",
    "TruncationTooCoarse",
    "NotNormalized",
    "PeriodicLaw",
    "POutOfRange",
    "CapacityExceeded",
    "MissingTailIndex",
    "OutOfDomain",
    "BetaOutOfRange",
    "HypothesisViolated",
    "ZeroCoefficientInWindow",
    "QOutOfRange",
]

__version__ = "0.1.0"
