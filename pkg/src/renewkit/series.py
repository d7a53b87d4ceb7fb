"""Finite power-series coefficient algebra and the tail-product decay checker.

Coefficients live in plain vectors (c[n] multiplies z^n). The decay checker
forms C(z) = (1-z)^(-1) A(z) B(z) for series vanishing at z = 1; because
A(1) = B(1) = 0, the running sums defining C equal negated tail sums of the
product, which is how they are accumulated (backwards), keeping the small
late coefficients accurate in the presence of the large early ones.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import HypothesisViolated, ZeroCoefficientInWindow

_DIRECT_CONV_LIMIT = 1 << 22
_VANISH_TOL = 1e-10


@dataclass(frozen=True)
class CoeffSeries:
    """Finite coefficient vector of a power series."""

    c: np.ndarray

    def __post_init__(self):
        c = np.ascontiguousarray(self.c, dtype=np.float64)
        if c.ndim != 1 or c.size == 0:
            raise ValueError("coefficients must form a nonempty 1-d vector")
        if not np.all(np.isfinite(c)):
            raise ValueError("coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "c", c)

    def __len__(self) -> int:
        return self.c.size

    def value_at_one(self) -> float:
        return math.fsum(self.c.tolist())


def _convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.size * b.size <= _DIRECT_CONV_LIMIT:
        return np.convolve(a, b)
    return fftconvolve(a, b)


def cauchy_product(a: CoeffSeries, b: CoeffSeries, n_last: int) -> CoeffSeries:
    """Coefficients of A(z)B(z) up to degree n_last."""
    if n_last > len(a) + len(b) - 2:
        raise ValueError("n_last exceeds the degree of the product")
    full = _convolve(a.c, b.c)
    return CoeffSeries(full[: n_last + 1])


def inv_one_minus_z(a: CoeffSeries) -> CoeffSeries:
    """Coefficients of (1-z)^(-1) A(z): running cumulative sums of a."""
    return CoeffSeries(np.cumsum(a.c))


def differentiate(a: CoeffSeries) -> CoeffSeries:
    """Coefficients of A'(z): c_n = (n+1) a_{n+1}."""
    if len(a) == 1:
        return CoeffSeries(np.zeros(1))
    n = np.arange(1, len(a), dtype=np.float64)
    return CoeffSeries(n * a.c[1:])


@dataclass(frozen=True)
class DecayFit:
    """Least-squares log-log decay fit over a window."""

    slope: float
    curvature: float
    curved: bool


def decay_exponent_fit(c: CoeffSeries, window: tuple[int, int]) -> DecayFit:
    """Slope of log|c_n| against log n over window = (lo, hi), hi exclusive.

    A quadratic term is fitted alongside; its coefficient is reported as
    curvature and flagged when it clearly exceeds the pure power-law level
    (a logarithmic factor shows up this way).
    """
    lo, hi = window
    if not (0 < lo < hi <= len(c)):
        raise ValueError("window must satisfy 0 < lo < hi <= len(c)")
    vals = c.c[lo:hi]
    if np.any(vals == 0.0):
        raise ZeroCoefficientInWindow(f"zero coefficient inside window [{lo},{hi})")
    x = np.log(np.arange(lo, hi, dtype=np.float64))
    x = x - x.mean()  # center for conditioning; slope and curvature unchanged
    y = np.log(np.abs(vals))
    slope = float(np.polyfit(x, y, 1)[0])
    curvature = float(np.polyfit(x, y, 2)[0])
    # pure power laws fit with |curvature| near rounding level; a log factor
    # leaves roughly 1/(2 log^2 n), well above 1.5e-3 on any usable window
    return DecayFit(slope=slope, curvature=curvature, curved=bool(abs(curvature) > 1.5e-3))


@dataclass(frozen=True)
class RegimeReport:
    """Observed vs predicted decay of the coefficients of (1-z)^(-1) A B."""

    beta: float
    fitted_exponent: float | None
    predicted_exponent: float | None
    regime: str
    matches_prediction: bool | None
    curvature: float | None
    log_ratio_spread: float | None
    window: tuple[int, int]


def _product_tail_coeffs(a: CoeffSeries, b: CoeffSeries) -> np.ndarray:
    """C_n = sum_{k<=n} (AB)_k, accumulated as negated tail sums.

    Valid whenever A(1) = B(1) = 0: the full product sums to zero, so the
    forward running sums equal minus the backward tails, which lose no
    precision at large n.
    """
    prod = _convolve(a.c, b.c)
    rev = np.cumsum(prod[::-1].astype(np.longdouble))[::-1]
    tail_excl = np.empty_like(prod)
    tail_excl[:-1] = (rev[1:]).astype(np.float64)
    tail_excl[-1] = 0.0
    return -tail_excl


def regime_check(a: CoeffSeries, b: CoeffSeries, beta: float) -> RegimeReport:
    """Classify the decay of C(z) = (1-z)^(-1) A(z) B(z) against beta.

    Requires A(1) and B(1) to vanish (within 1e-10). For beta < 1 the
    coefficients decay like n^(-2 beta); for beta > 1 like n^(-(beta+1)); at
    beta = 1 like log(n) n^-2, which is checked through the spread of
    C_n n^2 / log n over the window instead of a pure exponent.
    """
    if abs(a.value_at_one()) > _VANISH_TOL or abs(b.value_at_one()) > _VANISH_TOL:
        raise HypothesisViolated("series must vanish at z = 1 (within 1e-10)")
    c = _product_tail_coeffs(a, b)
    n_deg = min(len(a), len(b)) - 1
    lo, hi = max(2, n_deg // 10), n_deg + 1
    window = (lo, hi)
    vals = c[max(1, n_deg // 2) :]
    if np.all(vals == 0.0) or np.max(np.abs(vals)) < 1e-300:
        return RegimeReport(
            beta=beta,
            fitted_exponent=None,
            predicted_exponent=None,
            regime="super-polynomial",
            matches_prediction=None,
            curvature=None,
            log_ratio_spread=None,
            window=window,
        )
    if beta == 1.0:
        n_idx = np.arange(lo, hi, dtype=np.float64)
        ratio = np.abs(vals) * n_idx**2 / np.log(n_idx)
        positive = ratio[ratio > 0]
        spread = float(np.max(positive) / np.min(positive))
        fit = decay_exponent_fit(CoeffSeries(c), window)
        return RegimeReport(
            beta=beta,
            fitted_exponent=-fit.slope,
            predicted_exponent=2.0,
            regime="log-corrected",
            matches_prediction=bool(spread < 4.0),
            curvature=fit.curvature,
            log_ratio_spread=spread,
            window=window,
        )
    fit = decay_exponent_fit(CoeffSeries(c), window)
    predicted = 2.0 * beta if beta < 1.0 else beta + 1.0
    regime = "slow" if beta < 1.0 else "integrable"
    return RegimeReport(
        beta=beta,
        fitted_exponent=-fit.slope,
        predicted_exponent=predicted,
        regime=regime,
        matches_prediction=bool(abs(-fit.slope - predicted) <= 0.15),
        curvature=fit.curvature,
        log_ratio_spread=None,
        window=window,
    )


def power_tail_series(beta: float, n_last: int) -> CoeffSeries:
    """Series with a_n = n^-(beta+1) for n >= 1 and a_0 chosen so A(1) = 0."""
    n = np.arange(1, n_last + 1, dtype=np.float64)
    c = np.empty(n_last + 1)
    c[1:] = np.power(n, -(beta + 1.0))
    c[0] = -math.fsum(c[1:].tolist())
    return CoeffSeries(c)


def write_series_csv(series: CoeffSeries, path) -> None:
    """Dump n, c_n with 17 significant digits."""
    with open(path, "w") as fh:
        fh.write("n,c_n\n")
        for n, v in enumerate(series.c):
            fh.write(f"{n},{v:.17g}\n")
