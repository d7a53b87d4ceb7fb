"""Renewal sequences of terminating renewal chains.

u_n is the probability that time n is a renewal epoch; it satisfies u_0 = 1
and the self-referential convolution u_n = sum_{j=1..n} g_j u_{n-j}. Two
engines compute it: a direct quadratic recursion with compensated inner sums,
and a divide-and-conquer FFT engine that adds cross-block contributions with
cached transforms. The head of the sequence (where u is order one) is always
handled by the direct recursion and by per-target dot products, which keeps
the FFT rounding noise far below the local magnitude of u even deep in a
power-law tail.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .errors import CapacityExceeded, MissingTailIndex
from .laws import TransientLaw

CAPACITY_LIMIT = 1 << 26

_HEAD = 512
_LEAF = 256


@dataclass(frozen=True)
class RenewalSequence:
    """Computed renewal probabilities u_0..u_N plus derived tail sums.

    tail_sums[n] = sum_{j > n} u_j, obtained as (1-p)^-1 minus the running
    partial sum (the total mass of the sequence is (1-p)^-1 exactly).
    """

    u: np.ndarray
    p: float
    law: TransientLaw
    tail_sums: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        u.setflags(write=False)
        object.__setattr__(self, "u", u)
        if self.tail_sums is None:
            total = 1.0 / (1.0 - self.p)
            partial = np.cumsum(u.astype(np.longdouble))
            tails = (total - partial).astype(np.float64)
            tails.setflags(write=False)
            object.__setattr__(self, "tail_sums", tails)

    @property
    def n_last(self) -> int:
        return self.u.size - 1


def total_mass(tl: TransientLaw) -> float:
    """Total mass sum_n u_n = (1 - p)^-1 of the defective renewal sequence."""
    return 1.0 / (1.0 - tl.p)


def _check_capacity(n_last: int) -> None:
    if n_last < 0:
        raise ValueError("N must be >= 0")
    if n_last > CAPACITY_LIMIT:
        raise CapacityExceeded(f"N={n_last} exceeds capacity limit {CAPACITY_LIMIT}")


def renewal_direct(tl: TransientLaw, n_last: int) -> RenewalSequence:
    """Direct O(N^2) recursion with Kahan-compensated accumulation."""
    _check_capacity(n_last)
    g = tl.lag_masses(n_last)
    u = _kernels.direct_renewal(g, n_last)
    return RenewalSequence(u=u, p=tl.p, law=tl)


def _next_pow2(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def _cdq(u, g, lo, size, limit, cache):
    """Divide and conquer over [lo, lo+size): cross contributions via FFT."""
    if lo >= limit:
        return
    if size <= _LEAF:
        _kernels.finalize_block(u, g, lo, min(lo + size, limit))
        return
    half = size >> 1
    _cdq(u, g, lo, half, limit, cache)
    mid = lo + half
    if mid < limit:
        fft_size, g_hat = cache[size]
        block_hat = np.fft.rfft(u[lo:mid], fft_size)
        conv = np.fft.irfft(block_hat * g_hat, fft_size)
        hi = min(lo + size, limit)
        u[mid:hi] += conv[half : half + (hi - mid)]
    _cdq(u, g, mid, half, limit, cache)


def renewal_fast(tl: TransientLaw, n_last: int) -> RenewalSequence:
    """Same contract as renewal_direct, O(N log^2 N) via online convolution.

    The first _HEAD values are computed by the direct recursion; their
    contributions to every later index are added by exact dot products. The
    remaining self-referential part is resolved block-recursively, with the
    lag-mass FFT cached once per block size. Operation order is fixed, so the
    output is bit-stable for a given N.
    """
    _check_capacity(n_last)
    g = tl.lag_masses(n_last)
    if n_last + 1 <= 2 * _HEAD:
        u = _kernels.direct_renewal(g, n_last)
        return RenewalSequence(u=u, p=tl.p, law=tl)

    head = _kernels.direct_renewal(g[:_HEAD], _HEAD - 1)
    u = np.zeros(n_last + 1)
    u[:_HEAD] = head
    _kernels.add_head_contributions(head, g, u, _HEAD)

    span = _next_pow2(n_last + 1 - _HEAD)
    g_pad = np.zeros(span)
    g_pad[: min(g.size, span)] = g[:span]
    cache = {}
    size = span
    while size > _LEAF:
        fft_size = _next_pow2(size + (size >> 1))
        cache[size] = (fft_size, np.fft.rfft(g_pad[:size], fft_size))
        size >>= 1
    _cdq(u, g_pad, _HEAD, span, n_last + 1, cache)
    return RenewalSequence(u=u, p=tl.p, law=tl)


def _require_power_law(rs: RenewalSequence) -> None:
    base = rs.law.base
    if not base.is_power_law():
        raise MissingTailIndex("diagnostic needs a law with known beta and c_tail")
    if base.n_max < rs.n_last:
        raise ValueError(
            f"law support n_max={base.n_max} shorter than sequence N={rs.n_last}"
        )


def diag_tailsum(rs: RenewalSequence) -> np.ndarray:
    """Ratios R_n = tail_u(n) / ((1-p)^-2 tail_g(n)) for n = 0..N.

    R_n -> 1 for power-law return times; how fast is not guaranteed, so
    callers sample log-spaced checkpoints.
    """
    _require_power_law(rs)
    tl = rs.law
    scale = (1.0 - rs.p) ** -2
    tail_g = tl.defective_tail_array(rs.n_last)
    return rs.tail_sums / (scale * tail_g)


def diag_pointwise(rs: RenewalSequence) -> np.ndarray:
    """Ratios r_n = u_n / ((1-p)^-2 g_n) for n = 1..N (index 0 is r_1)."""
    _require_power_law(rs)
    tl = rs.law
    scale = (1.0 - rs.p) ** -2
    g = tl.lag_masses(rs.n_last)
    return rs.u[1:] / (scale * g[1:])


def write_renewal_csv(rs: RenewalSequence, path) -> None:
    """Dump n, u_n, tail_u, ratio_pointwise, ratio_tailsum (17 digits)."""
    has_diag = rs.law.base.is_power_law() and rs.law.base.n_max >= rs.n_last
    r_point = diag_pointwise(rs) if has_diag else None
    r_tail = diag_tailsum(rs) if has_diag else None
    with open(path, "w") as fh:
        fh.write("n,u_n,tail_u,ratio_pointwise,ratio_tailsum\n")
        for n in range(rs.n_last + 1):
            rp = "" if (r_point is None or n == 0) else f"{r_point[n - 1]:.17g}"
            rt = "" if r_tail is None else f"{r_tail[n]:.17g}"
            fh.write(f"{n},{rs.u[n]:.17g},{rs.tail_sums[n]:.17g},{rp},{rt}\n")
