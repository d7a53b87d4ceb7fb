"""Reproducible Monte Carlo over terminating renewal paths.

Randomness comes from counter-based Philox streams keyed by (seed, block),
where a block is a fixed-size slice of the sample index range. The shards
setting (and its environment override) only schedules blocks across worker
threads; every statistic is merged blockwise in index order from integer
counts or per-block partial sums, so results are bit-identical for any shard
count. Excursion lengths are drawn by inverse CDF over the stored masses plus
an explicit tail bucket carrying the analytic remainder; inside the bucket an
exact rejection sampler reproduces the discrete power tail.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import MissingTailIndex, QOutOfRange
from .laws import ReturnLaw, TransientLaw

BLOCK_SIZE = 4096

_SHARDS_ENV = "RENEWKIT_SHARDS"


@dataclass(frozen=True)
class SimConfig:
    """Reproducible simulation configuration.

    Results are a pure function of (seed, samples, law, parameters); shards
    only selects how many worker threads consume the fixed block schedule.
    """

    seed: int
    shards: int = 1
    samples: int = 10_000
    horizon: int | None = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("samples must be >= 1")
        if self.shards < 1:
            raise ValueError("shards must be >= 1")


@dataclass(frozen=True)
class TerminatingPath:
    """Sampled surviving renewal epochs plus how the path ended.

    epochs always starts at 0 (time zero is alive by convention). death_epoch
    is the time of the return whose survival mark failed, or None if no death
    was observed before the horizon; truncation is flagged, never absorbed.
    """

    epochs: np.ndarray
    death_epoch: int | None
    alive_at_horizon: bool

    def __post_init__(self):
        e = np.asarray(self.epochs, dtype=np.int64)
        if e.size == 0 or e[0] != 0 or np.any(np.diff(e) <= 0):
            raise ValueError("epochs must start at 0 and increase strictly")
        e.setflags(write=False)
        object.__setattr__(self, "epochs", e)


def _stream(seed: int, block: int) -> np.random.Generator:
    key = np.array([np.uint64(seed & 0xFFFFFFFFFFFFFFFF), np.uint64(block)], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _blocks(samples: int, offset: int = 0):
    out = []
    start = 0
    index = offset
    while start < samples:
        count = min(BLOCK_SIZE, samples - start)
        out.append((index, count))
        start += count
        index += 1
    return out


def _worker_count(shards: int) -> int:
    env = os.environ.get(_SHARDS_ENV)
    if env is not None:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, shards)


def _map_blocks(fn, samples: int, shards: int, offset: int = 0):
    """Run fn(block_index, count) per block; return results in block order."""
    blocks = _blocks(samples, offset)
    workers = _worker_count(shards)
    if workers == 1 or len(blocks) == 1:
        return [fn(b, c) for b, c in blocks]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(fn, b, c) for b, c in blocks]
    return [f.result() for f in futures]


class LawSampler:
    """Inverse-CDF sampler for a return law with an exact power-tail bucket."""

    def __init__(self, law: ReturnLaw):
        self.law = law
        self.cdf = np.cumsum(law.masses)
        self.bucket_mass = law.truncation_remainder
        if self.bucket_mass > 0.0 and law.beta is None:
            raise MissingTailIndex("truncated law without tail index cannot be sampled")
        support = np.flatnonzero(law.masses > 0.0)
        self._last_support = int(support[-1])

    def draw(self, gen: np.random.Generator, size: int) -> np.ndarray:
        u = gen.random(size)
        idx = np.searchsorted(self.cdf, u, side="right")
        out = (idx + 1).astype(np.int64)
        over = idx >= self.law.n_max
        if self.bucket_mass > 0.0:
            for i in np.flatnonzero(over):
                out[i] = self._draw_tail(gen)
        elif np.any(over):
            # float roundoff pushed u past cdf[-1]; snap to the last atom
            out[over] = self._last_support + 1
        return out

    def _draw_tail(self, gen) -> int:
        """Exact rejection sampler for the conditional tail n > n_max.

        The proposal floor(x0 * V^(-1/beta)) has pmf proportional to
        n^-beta - (n+1)^-beta; accepting with the exact ratio leaves the
        target n^-(beta+1) restricted to n > n_max.
        """
        beta = self.law.beta
        s = beta + 1.0
        x0 = self.law.n_max + 1
        bound = (1.0 + 1.0 / x0) ** s
        while True:
            v = gen.random()
            x = x0 * v ** (-1.0 / beta)
            if not math.isfinite(x) or x >= 2**62:
                continue
            n = int(x)
            # n^-beta - (n+1)^-beta without cancellation at large n
            step = n**-beta * -math.expm1(-beta * math.log1p(1.0 / n))
            accept = beta * n**-s / (step * bound)
            if gen.random() < accept:
                return n


def sample_excursions(law: ReturnLaw, count: int, seed: int) -> np.ndarray:
    """Draw `count` return times, block-deterministically."""
    sampler = LawSampler(law)

    def one(block, k):
        return sampler.draw(_stream(seed, block), k)

    return np.concatenate(_map_blocks(one, count, 1))


def sample_excursion_sums(
    law: ReturnLaw, m: int, samples: int, seed: int, stream_offset: int = 0
) -> np.ndarray:
    """Sums of m independent return times, one sum per sample."""
    sampler = LawSampler(law)

    def one(block, k):
        gen = _stream(seed, block)
        total = np.zeros(k, dtype=np.float64)
        done = 0
        chunk = max(1, min(m, (1 << 22) // k))
        while done < m:
            step = min(chunk, m - done)
            draws = sampler.draw(gen, k * step).reshape(k, step)
            total += draws.sum(axis=1, dtype=np.float64)
            done += step
        return total

    return np.concatenate(_map_blocks(one, samples, 1, offset=stream_offset))


def sample_path(tl: TransientLaw, cfg: SimConfig, horizon: int) -> TerminatingPath:
    """Sample one terminating path up to the horizon (stream block 0).

    For every excursion the length is drawn first and its survival mark
    second, in that fixed order, so paths are bit-identical for a seed.
    """
    if horizon < 1:
        raise ValueError("horizon must be >= 1")
    sampler = LawSampler(tl.base)
    gen = _stream(cfg.seed, 0)
    epochs = [0]
    t = 0
    while True:
        gap = int(sampler.draw(gen, 1)[0])
        mark = gen.random() < tl.p
        t2 = t + gap
        if t2 > horizon:
            return TerminatingPath(np.array(epochs), None, True)
        if not mark:
            return TerminatingPath(np.array(epochs), t2, False)
        epochs.append(t2)
        t = t2


def simulate_return_counts(tl: TransientLaw, cfg: SimConfig, horizon: int) -> np.ndarray:
    """Number of completed (surviving) returns per path before death/horizon."""
    sampler = LawSampler(tl.base)
    p = tl.p

    def one(block, k):
        gen = _stream(cfg.seed, block)
        counts = np.zeros(k, dtype=np.int64)
        t = np.zeros(k, dtype=np.int64)
        active = np.ones(k, dtype=bool)
        while True:
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            gaps = sampler.draw(gen, idx.size)
            marks = gen.random(idx.size) < p
            t2 = t[idx] + gaps
            over = t2 > horizon
            live = marks & ~over
            sel = idx[live]
            counts[sel] += 1
            t[sel] = t2[live]
            active[idx[~live]] = False
        return counts

    return np.concatenate(_map_blocks(one, cfg.samples, cfg.shards))


def _last_surviving_epochs(tl: TransientLaw, window: int, cfg: SimConfig) -> np.ndarray:
    """Per path, the last surviving renewal epoch <= window."""
    sampler = LawSampler(tl.base)
    p = tl.p

    def one(block, k):
        gen = _stream(cfg.seed, block)
        last = np.zeros(k, dtype=np.int64)
        t = np.zeros(k, dtype=np.int64)
        active = np.ones(k, dtype=bool)
        while True:
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            gaps = sampler.draw(gen, idx.size)
            marks = gen.random(idx.size) < p
            t2 = t[idx] + gaps
            ok = marks & (t2 <= window)
            sel = idx[ok]
            last[sel] = t2[ok]
            t[sel] = t2[ok]
            active[idx[~ok]] = False
        return last

    return np.concatenate(_map_blocks(one, cfg.samples, cfg.shards))


@dataclass(frozen=True)
class LastVisitGrid:
    """Grid and plain last-visit statistics of one path."""

    z_hat: int
    z_ring: int
    discrepancy: float


def last_visit_grid(path: TerminatingPath, n: int, q: float) -> LastVisitGrid:
    """Last visit on the floor(j^q) grid versus the plain last visit.

    z_ring is the last surviving epoch <= floor(n^q); z_hat is the largest
    j <= n whose grid time floor(j^q) is a surviving epoch. The reported
    discrepancy |z_hat - z_ring^(1/q)| audits how faithfully the grid
    identity transports one statistic into the other at finite n.
    """
    if not (0.0 < q < 1.0):
        raise QOutOfRange(f"q must lie in (0,1), got {q}")
    if n < 1:
        raise ValueError("n must be >= 1")
    window = int(math.floor(n**q * (1 + 1e-12)))
    epochs = path.epochs[path.epochs <= window]
    z_ring = int(epochs[-1])
    # widest j with floor(j^q) == z_ring, capped at n
    hi = int(math.ceil((z_ring + 1) ** (1.0 / q) * (1 - 1e-13))) - 1
    z_hat = min(n, hi)
    return LastVisitGrid(
        z_hat=z_hat,
        z_ring=z_ring,
        discrepancy=abs(z_hat - z_ring ** (1.0 / q)),
    )


@dataclass(frozen=True)
class ArcsineMC:
    """Empirical CDF of the rescaled grid last-visit statistic."""

    t_grid: np.ndarray
    counts: np.ndarray
    cdf: np.ndarray
    stderr: np.ndarray
    n: int
    q: float
    samples: int
    seed: int
    shards: int


def mc_arcsine_cdf(tl: TransientLaw, n: int, t_grid, cfg: SimConfig) -> ArcsineMC:
    """Empirical law of ((last surviving epoch <= floor(n^q)) / n)^(1/q).

    q = 1/(1+2 beta) from the law's tail index. Counts are accumulated as
    integers per t bin and merged across blocks by addition.
    """
    if tl.beta is None:
        raise MissingTailIndex("arcsine experiment needs a power-law return time")
    q = 1.0 / (1.0 + 2.0 * tl.beta)
    window = int(math.floor(n**q * (1 + 1e-12)))
    t = np.asarray(t_grid, dtype=np.float64)
    z = _last_surviving_epochs(tl, window, cfg)
    v = (z.astype(np.float64) / n) ** (1.0 / q)
    counts = np.array([int(np.sum(v <= ti)) for ti in t], dtype=np.int64)
    cdf = counts / cfg.samples
    stderr = np.sqrt(np.maximum(cdf * (1.0 - cdf), 0.0) / cfg.samples)
    return ArcsineMC(
        t_grid=t,
        counts=counts,
        cdf=cdf,
        stderr=stderr,
        n=int(n),
        q=q,
        samples=cfg.samples,
        seed=cfg.seed,
        shards=cfg.shards,
    )


@dataclass(frozen=True)
class DarlingKacReport:
    """Empirical moments of the normalized occupation count, recurrent case."""

    mean: float
    mean_se: float
    second_moment: float
    second_se: float
    samples: int
    n: int
    seed: int


def darling_kac_scale(law: ReturnLaw, n: int) -> float:
    """Normalizer a_n with S_n / a_n -> Mittag-Leffler.

    a_n = n^beta / (c_tail * Gamma(1-beta) * Gamma(1+beta)): the Gamma
    factors complete the bare tail constant so that E[S_n / a_n] -> 1, which
    is forced by the Tauberian asymptotics of sum u_n = 1/(1 - f(e^-s)).
    """
    if not law.is_power_law():
        raise MissingTailIndex("normalizer needs a power-law return time")
    beta = law.beta
    gamma_completion = math.gamma(1.0 - beta) * math.gamma(1.0 + beta)
    return n**beta / (law.c_tail * gamma_completion)


def mc_darling_kac_baseline(law: ReturnLaw, n: int, cfg: SimConfig) -> DarlingKacReport:
    """Moments of S_n / a_n for the unpunctured chain (a_n = darling_kac_scale).

    S_n counts visits in [0, n-1] including time 0. First and second moments
    come with standard errors for comparison against the Mittag-Leffler
    moment formula.
    """
    if not law.is_power_law():
        raise MissingTailIndex("baseline needs a power-law return time")
    sampler = LawSampler(law)
    scale = 1.0 / darling_kac_scale(law, n)

    def one(block, k):
        gen = _stream(cfg.seed, block)
        counts = np.ones(k, dtype=np.int64)  # the visit at time 0
        t = np.zeros(k, dtype=np.int64)
        active = np.ones(k, dtype=bool)
        while True:
            idx = np.flatnonzero(active)
            if idx.size == 0:
                break
            gaps = sampler.draw(gen, idx.size)
            t2 = t[idx] + gaps
            ok = t2 <= n - 1
            sel = idx[ok]
            counts[sel] += 1
            t[sel] = t2[ok]
            active[idx[~ok]] = False
        x = counts * scale
        return (
            float(np.sum(x)),
            float(np.sum(x**2)),
            float(np.sum(x**4)),
        )

    parts = _map_blocks(one, cfg.samples, cfg.shards)
    s1 = math.fsum(p[0] for p in parts)
    s2 = math.fsum(p[1] for p in parts)
    s4 = math.fsum(p[2] for p in parts)
    n_samp = cfg.samples
    mean = s1 / n_samp
    m2 = s2 / n_samp
    m4 = s4 / n_samp
    return DarlingKacReport(
        mean=mean,
        mean_se=math.sqrt(max(m2 - mean**2, 0.0) / n_samp),
        second_moment=m2,
        second_se=math.sqrt(max(m4 - m2**2, 0.0) / n_samp),
        samples=n_samp,
        n=int(n),
        seed=cfg.seed,
    )


@dataclass(frozen=True)
class SurvivorMC:
    """Conditioned Monte Carlo estimate of P(tau_m >= n | first m marks survive)."""

    estimate: float
    stderr: float
    survivors: int
    total_paths: int
    seed: int


def survivor_conditioned_mc(
    law: ReturnLaw, p: float, n: int, m: int, seed: int, min_survivors: int
) -> SurvivorMC:
    """Estimate the survivor-conditioned tail by simulating marked paths.

    Blocks are consumed until at least min_survivors paths have all of their
    first m survival marks succeed; the estimate is the surviving fraction
    with tau_m >= n.
    """
    sampler = LawSampler(law)
    survivors = 0
    hits = 0
    total = 0
    block = 0
    max_blocks = max(64, int(200 * min_survivors / (p**m * BLOCK_SIZE)) + 1)
    while survivors < min_survivors and block < max_blocks:
        gen = _stream(seed, block)
        gaps = sampler.draw(gen, BLOCK_SIZE * m).reshape(BLOCK_SIZE, m)
        marks = gen.random((BLOCK_SIZE, m)) < p
        alive = marks.all(axis=1)
        tau_m = gaps.sum(axis=1)
        survivors += int(np.sum(alive))
        hits += int(np.sum(alive & (tau_m >= n)))
        total += BLOCK_SIZE
        block += 1
    est = hits / survivors if survivors else float("nan")
    se = math.sqrt(max(est * (1.0 - est), 0.0) / survivors) if survivors else float("nan")
    return SurvivorMC(
        estimate=est, stderr=se, survivors=survivors, total_paths=total, seed=seed
    )
