"""Seeded Monte Carlo estimation of first-passage functionals.

Batches draw from independent Philox streams keyed by (seed, batch index),
so an estimate depends only on the configuration, never on how many workers
executed the batches.  Merging sums per-batch sufficient statistics in batch
order, which keeps results bit-identical under any schedule.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .increments import IncrementModel

__all__ = ["McConfig", "McEstimate", "mc_tail", "mc_stopping"]

_Z95 = 1.959963984540054
# Wilson interval kicks in when either success count is this small; plain
# normal intervals are fine elsewhere.
_WILSON_COUNT = 5.0


@dataclass(frozen=True)
class McConfig:
    seed: int
    batches: int = 16
    paths_per_batch: int = 10_000
    horizon: int = 1_000

    def __post_init__(self):
        if self.batches < 2:
            raise ValueError("need at least 2 batches for batch-means errors")
        if self.paths_per_batch < 1:
            raise ValueError("paths_per_batch must be >= 1")


@dataclass(frozen=True)
class McEstimate:
    mean: float
    stderr: float
    ci95: tuple
    n_paths: int


def _batch_rng(seed: int, batch: int) -> np.random.Generator:
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(batch,))
    return np.random.Generator(np.random.Philox(seq))


def _wilson(successes: float, n: int) -> tuple:
    p = successes / n
    z2 = _Z95 * _Z95
    denom = 1.0 + z2 / n
    center = (p + z2 / (2 * n)) / denom
    half = _Z95 * math.sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom
    return (max(0.0, center - half), min(1.0, center + half))


def _estimate_from_batches(batch_means, n_paths: int,
                           successes: float | None = None) -> McEstimate:
    means = np.asarray(batch_means)
    mean = float(np.mean(means))
    stderr = float(np.std(means, ddof=1) / math.sqrt(len(means)))
    if successes is not None and (successes <= _WILSON_COUNT
                                  or n_paths - successes <= _WILSON_COUNT):
        lo, hi = _wilson(successes, n_paths)
        lo, hi = min(lo, mean), max(hi, mean)
    else:
        lo, hi = mean - _Z95 * stderr, mean + _Z95 * stderr
    return McEstimate(mean=mean, stderr=stderr, ci95=(lo, hi), n_paths=n_paths)


def _run_batch(dist: IncrementModel, x: float, n: int, paths: int,
               rng: np.random.Generator):
    """Step `paths` walks for n steps; kill on first position <= 0.

    Returns (alive mask, final positions, overshoot sum over killed paths,
    killed count).  Positions are floats so lattice and continuous samplers
    share the kernel; lattice steps are exact small integers in double
    precision.
    """
    pos = np.full(paths, float(x))
    alive = np.ones(paths, dtype=bool)
    overshoot_sum = 0.0
    killed = 0
    for _ in range(n):
        idx = np.nonzero(alive)[0]
        if idx.size == 0:
            break
        steps = dist.sample(rng, idx.size)
        pos[idx] += steps
        dead = idx[pos[idx] <= 0.0]
        if dead.size:
            overshoot_sum += float(-np.sum(pos[dead]))
            killed += dead.size
            alive[dead] = False
    return alive, pos, overshoot_sum, killed


def _tail_batch(dist, x, y, n, paths, seed, batch):
    rng = _batch_rng(seed, batch)
    alive, pos, _, _ = _run_batch(dist, x, n, paths, rng)
    hits = int(np.count_nonzero(alive & (pos >= y)))
    return hits


def _stopping_batch(dist, x, horizon, paths, seed, batch):
    rng = _batch_rng(seed, batch)
    alive, _, overshoot_sum, killed = _run_batch(dist, x, horizon, paths, rng)
    return overshoot_sum, int(np.count_nonzero(alive)), killed


def _map_batches(fn, batches: int, workers: int):
    if workers <= 1:
        return [fn(b) for b in range(batches)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, range(batches)))


def mc_tail(dist: IncrementModel, x: float, y: float, n: int, cfg: McConfig,
            workers: int = 1) -> McEstimate:
    """Unbiased estimate of P(x + S_n >= y, tau_x > n)."""
    if x < 0:
        raise ValueError("start point must be nonnegative")
    ppb = cfg.paths_per_batch
    hits = _map_batches(
        lambda b: _tail_batch(dist, x, y, n, ppb, cfg.seed, b),
        cfg.batches, workers)
    total = cfg.batches * ppb
    return _estimate_from_batches([h / ppb for h in hits], total,
                                  successes=float(sum(hits)))


def mc_stopping(dist: IncrementModel, x: float, horizon: int, cfg: McConfig,
                workers: int = 1):
    """Estimates of E[|x + S_tau|; tau <= horizon] and P(tau_x > horizon).

    Paths still alive at the horizon contribute zero overshoot and are
    reported through the second estimate; the truncation is never folded
    silently into the overshoot mean.
    """
    if x < 0:
        raise ValueError("start point must be nonnegative")
    ppb = cfg.paths_per_batch
    rows = _map_batches(
        lambda b: _stopping_batch(dist, x, horizon, ppb, cfg.seed, b),
        cfg.batches, workers)
    total = cfg.batches * ppb
    over_est = _estimate_from_batches([r[0] / ppb for r in rows], total)
    surv_count = float(sum(r[1] for r in rows))
    surv_est = _estimate_from_batches([r[1] / ppb for r in rows], total,
                                      successes=surv_count)
    return over_est, surv_est
