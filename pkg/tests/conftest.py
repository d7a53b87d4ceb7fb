"""Shared fixtures and independent oracles for the test suite.

The oracles here recompute module outputs by brute force (composition
enumeration, path-and-mark enumeration) so the tests never trust the code
path they are checking.
"""

import itertools

import numpy as np
import pytest

from renewkit import laws


@pytest.fixture(scope="session")
def ten_law_corpus():
    """Mixed finite and power-law corpus used by the duality checks."""
    return [
        laws.custom_return([1.0]),
        laws.custom_return([0.5, 0.5]),
        laws.custom_return([0.2, 0.3, 0.5]),
        laws.custom_return([0.1, 0.0, 0.4, 0.0, 0.5]),
        laws.custom_return([0.3, 0.3, 0.2, 0.1, 0.1]),
        laws.custom_return(np.ones(7) / 7),
        laws.power_law_return(0.4, 64),
        laws.power_law_return(0.7, 64),
        laws.power_law_return(1.5, 64),
        laws.power_law_return(2.5, 64),
    ]


def renewal_by_composition(tl, n):
    """u_n by exhaustive enumeration over excursion compositions of n.

    Walks every sequence of lags summing to n (no memoization) and adds the
    product of defective masses along the way.
    """
    support = [
        (j + 1, float(tl.g[j])) for j in np.flatnonzero(tl.g > 0.0) if j + 1 <= n
    ]
    if n == 0:
        return 1.0
    total = 0.0
    stack = [(n, 1.0)]
    while stack:
        rem, prob = stack.pop()
        for lag, mass in support:
            if lag < rem:
                stack.append((rem - lag, prob * mass))
            elif lag == rem:
                total += prob * mass
    return total


def enumerate_marked_events(law, p, n, m):
    """Exhaustive path-and-mark enumeration up to horizon n.

    Lengths longer than the remaining horizon are lumped through the exact
    tail, so laws with an analytic remainder are handled exactly. Returns the
    occupation pmf plus the three survivor-set probabilities the audits use:
    P(tau_m >= n), P(tau_m >= n and first m marks alive), and
    P(S_n <= m and no failed mark before time n).
    """
    out = {
        "s_pmf": np.zeros(n + 2),
        "tau_m_ge_n": 0.0,
        "lhs": 0.0,
        "joint": 0.0,
    }
    support = [
        (j + 1, float(law.masses[j]))
        for j in np.flatnonzero(law.masses > 0.0)
        if j + 1 <= n
    ]

    def marks_phase(times, prob):
        before = [t for t in times if t <= n - 1]
        k = len(before)
        s_n = 1 + k
        tau_ge = times[m - 1] >= n if len(times) >= m else True
        n_marks = max(m, k)
        for bits in itertools.product((0, 1), repeat=n_marks):
            pb = prob
            for b in bits:
                pb *= p if b else (1.0 - p)
            alive_first_m = all(bits[:m])
            alive_window = all(bits[:k])
            out["s_pmf"][s_n] += pb
            if tau_ge and alive_first_m:
                out["lhs"] += pb
            if s_n <= m and alive_window:
                out["joint"] += pb
        if tau_ge:
            out["tau_m_ge_n"] += prob

    def lengths_phase(times, t, prob):
        if t >= n:
            marks_phase(times, prob)
            return
        lump = law.tail(n - t)  # any longer excursion overshoots the horizon
        if lump > 0.0:
            marks_phase(times + [n + 1 + t], prob * lump)
        for lag, mass in support:
            if lag <= n - t:
                lengths_phase(times + [t + lag], t + lag, prob * mass)

    lengths_phase([], 0, 1.0)
    return out
