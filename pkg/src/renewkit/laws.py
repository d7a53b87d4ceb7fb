"""Return-time laws and their punctured (defective) versions.

A recurrent law assigns mass a_n to each return time n >= 1. Pure power laws
a_n proportional to n^-(beta+1) are stored truncated at n_max with the missing
mass kept as an analytic remainder instead of being renormalized away, so the
tail index beta and the tail constant stay exact. Puncturing scales every mass
by a survival probability p < 1; the deficit 1 - p is the per-return death
probability that makes the chain transient.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from .errors import (
    NonPositiveBeta,
    NotNormalized,
    PeriodicLaw,
    POutOfRange,
    TruncationTooCoarse,
)

NORMALIZATION_TOL = 1e-12


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=np.float64)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class ReturnLaw:
    """Recurrent return-time distribution on {1, 2, ...}.

    masses[i] is the probability of a first return at time i + 1.
    tail_masses[m] = P(return time > m) for m = 0..n_max, remainder included.
    beta and c_tail are set only for laws with a known power tail
    P(return > n) = c_tail * n^-beta * (1 + o(1)).
    """

    masses: np.ndarray
    truncation_remainder: float = 0.0
    beta: float | None = None
    c_tail: float | None = None
    tail_masses: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        m = np.asarray(self.masses, dtype=np.float64)
        if m.ndim != 1 or m.size == 0:
            raise NotNormalized("masses must be a nonempty 1-d vector")
        if not np.all(np.isfinite(m)) or np.any(m < 0):
            raise NotNormalized("masses must be finite and nonnegative")
        total = math.fsum(m.tolist()) + self.truncation_remainder
        if abs(total - 1.0) > NORMALIZATION_TOL:
            raise NotNormalized(f"masses sum to {total!r}, expected 1")
        support = np.flatnonzero(m > 0.0) + 1
        if support.size == 0:
            raise NotNormalized("law has empty support")
        if int(np.gcd.reduce(support)) > 1:
            raise PeriodicLaw(f"support gcd is {int(np.gcd.reduce(support))}, law is periodic")
        object.__setattr__(self, "masses", _frozen(m))
        if self.tail_masses is None:
            # reversed cumulative sum in extended precision keeps deep tails
            # accurate relative to their own size
            rev = np.cumsum(m[::-1].astype(np.longdouble))
            tails = np.empty(m.size + 1, dtype=np.longdouble)
            tails[-1] = self.truncation_remainder
            tails[:-1] = rev[::-1] + self.truncation_remainder
            object.__setattr__(self, "tail_masses", _frozen(tails.astype(np.float64)))
        else:
            object.__setattr__(self, "tail_masses", _frozen(self.tail_masses))

    @property
    def n_max(self) -> int:
        return self.masses.size

    def mass(self, n: int) -> float:
        """P(return time = n); zero beyond the stored support."""
        if n < 1:
            return 0.0
        if n <= self.n_max:
            return float(self.masses[n - 1])
        return 0.0

    def tail(self, m: int) -> float:
        """P(return time > m), analytic remainder included, any m >= 0."""
        if m < 0:
            raise ValueError("tail argument must be >= 0")
        if m <= self.n_max:
            return float(self.tail_masses[m])
        if self.beta is not None:
            # beyond the stored support only the power tail remains
            s = self.beta + 1.0
            z = zeta(s)
            return float(zeta(s, m + 1) / z)
        return 0.0

    def is_power_law(self) -> bool:
        return self.beta is not None and self.c_tail is not None


@dataclass(frozen=True)
class TransientLaw:
    """Punctured law g_n = p * a_n with survival probability p in (0, 1)."""

    base: ReturnLaw
    p: float
    g: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        if not (0.0 < self.p < 1.0):
            raise POutOfRange("p must lie in (0,1)")
        object.__setattr__(self, "g", _frozen(self.p * self.base.masses))

    @property
    def n_max(self) -> int:
        return self.base.n_max

    @property
    def beta(self) -> float | None:
        return self.base.beta

    def defective_tail(self, m: int) -> float:
        """Defective tail sum_{j > m} g_j = p * P(base return > m)."""
        return self.p * self.base.tail(m)

    def defective_tail_array(self, n_last: int) -> np.ndarray:
        """Vector of defective tails at m = 0..n_last (n_last <= n_max)."""
        if n_last > self.n_max:
            raise ValueError("defective_tail_array limited to the stored support")
        return self.p * self.base.tail_masses[: n_last + 1]

    def lag_masses(self, n_last: int) -> np.ndarray:
        """Dense lag vector g[0..n_last] with g[0] = 0, zero beyond support."""
        g = np.zeros(n_last + 1)
        k = min(n_last, self.n_max)
        g[1 : k + 1] = self.g[:k]
        return g


def power_law_return(beta: float, n_max: int) -> ReturnLaw:
    """Pure power law a_n = n^-(beta+1) / Z(beta+1), truncated at n_max.

    The normalizer Z is the full series sum, so the stored masses plus the
    analytic remainder add to one exactly and the tail constant is
    c_tail = 1 / (beta * Z(beta+1)).
    """
    if not (beta > 0.0) or not math.isfinite(beta):
        raise NonPositiveBeta(f"beta must be > 0, got {beta}")
    if n_max < 2:
        raise ValueError("n_max must be >= 2")
    s = beta + 1.0
    z = float(zeta(s))
    n = np.arange(1, n_max + 1, dtype=np.float64)
    masses = np.power(n, -s) / z
    remainder = float(zeta(s, n_max + 1) / z)
    if remainder > 0.5:
        raise TruncationTooCoarse(
            f"remainder {remainder:.3g} beyond n_max={n_max} exceeds 0.5"
        )
    return ReturnLaw(
        masses=masses,
        truncation_remainder=remainder,
        beta=beta,
        c_tail=1.0 / (beta * z),
    )


def custom_return(masses) -> ReturnLaw:
    """Finite-support law from an explicit mass vector (index 0 is time 1)."""
    m = np.asarray(list(masses), dtype=np.float64)
    if m.size == 0:
        raise NotNormalized("masses must be nonempty")
    if not np.all(np.isfinite(m)) or np.any(m < 0):
        raise NotNormalized("masses must be finite and nonnegative")
    total = math.fsum(m.tolist())
    if abs(total - 1.0) > NORMALIZATION_TOL:
        raise NotNormalized(f"masses sum to {total!r}, expected 1")
    support = np.flatnonzero(m > 0.0) + 1
    if int(np.gcd.reduce(support)) > 1:
        raise PeriodicLaw(f"support gcd is {int(np.gcd.reduce(support))}")
    return ReturnLaw(masses=m, truncation_remainder=0.0)


def puncture(law: ReturnLaw, p: float) -> TransientLaw:
    """Attach a survival probability: g_n = p * a_n for every n."""
    return TransientLaw(base=law, p=p)


def defective_tail(tl: TransientLaw, m: int) -> float:
    """Defective tail sum_{j > m} g_j of a punctured law."""
    if m < 0:
        raise ValueError("m must be >= 0")
    return tl.defective_tail(m)


def write_law_csv(tl: TransientLaw, path) -> None:
    """Dump n, a_n, g_n, tail_a, tail_g with 17 significant digits."""
    base = tl.base
    with open(path, "w") as fh:
        fh.write("n,a_n,g_n,tail_a,tail_g\n")
        for i in range(base.n_max):
            n = i + 1
            fh.write(
                f"{n},{base.masses[i]:.17g},{tl.g[i]:.17g},"
                f"{base.tail_masses[n]:.17g},{tl.p * base.tail_masses[n]:.17g}\n"
            )
