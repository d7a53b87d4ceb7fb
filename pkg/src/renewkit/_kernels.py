"""Compiled inner loops for the renewal engines.

All kernels run single-threaded with a fixed operation order, so results are
bit-stable across runs. fastmath stays off: reassociation would break the
compensated sums and the determinism contract.
"""

import numba
import numpy as np


@numba.njit(cache=True)
def direct_renewal(g, n_last):
    """Quadratic renewal recursion with Kahan-compensated inner sums.

    g[j] is the defective mass at lag j (g[0] must be 0). Returns the array
    u[0..n_last] with u[0] = 1 and u[n] = sum_{j=1..n} g[j] * u[n-j].

    The inner sum runs eight independent Kahan lanes over a reversed copy of
    u (contiguous loads, SIMD-friendly) and folds the lanes in a fixed order,
    so the result is bit-stable while staying compensated.
    """
    u = np.zeros(n_last + 1)
    ur = np.zeros(n_last + 1)  # ur[n_last - k] = u[k]
    u[0] = 1.0
    ur[n_last] = 1.0
    s = np.zeros(8)
    c = np.zeros(8)
    for n in range(1, n_last + 1):
        for i in range(8):
            s[i] = 0.0
            c[i] = 0.0
        base = n_last - n + 1  # ur[base + (j-1)] = u[n - j]
        m8 = (n // 8) * 8
        for j0 in range(0, m8, 8):
            for i in range(8):
                y = g[j0 + 1 + i] * ur[base + j0 + i] - c[i]
                t = s[i] + y
                c[i] = (t - s[i]) - y
                s[i] = t
        acc = 0.0
        cc = 0.0
        for j in range(m8 + 1, n + 1):
            y = g[j] * ur[base + j - 1] - cc
            t = acc + y
            cc = (t - acc) - y
            acc = t
        for i in range(8):
            y = s[i] - cc
            t = acc + y
            cc = (t - acc) - y
            acc = t
            y = -c[i] - cc
            t = acc + y
            cc = (t - acc) - y
            acc = t
        u[n] = acc
        ur[n_last - n] = acc
    return u


@numba.njit(cache=True)
def add_head_contributions(u_head, g, out, start):
    """Add sum_{k < H} u_head[k] * g[n-k] to out[n] for every n >= start.

    start must be >= len(u_head) so the g index never goes negative. The
    output range is swept in tiles to keep the working set in cache; the
    k-loop order inside a tile is fixed.
    """
    h = u_head.shape[0]
    n_total = out.shape[0]
    tile = 4096
    t0 = start
    while t0 < n_total:
        t1 = min(t0 + tile, n_total)
        for k in range(h):
            uk = u_head[k]
            if uk != 0.0:
                for n in range(t0, t1):
                    out[n] += uk * g[n - k]
        t0 = t1


@numba.njit(cache=True)
def finalize_block(u, g, lo, hi):
    """Sequentially absorb within-block contributions u[k] * g[n-k], lo <= k < n.

    On entry u[lo..hi) already holds every contribution from indices below lo;
    on exit the block is final.
    """
    for n in range(lo + 1, hi):
        s = 0.0
        for k in range(lo, n):
            s += u[k] * g[n - k]
        u[n] += s
