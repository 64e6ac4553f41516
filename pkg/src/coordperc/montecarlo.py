"""Event-probability estimation with Wilson intervals and seed fan-out.

Trials are cut into fixed batches of ``batch_size``.  Batch ``b`` draws from
``default_rng(SeedSequence(master_seed, spawn_key=(b,)))`` whichever worker
runs it, and the merge only adds counts, so results do not depend on the
number of workers.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from joblib import Parallel, delayed

from . import model, reachability

Z95 = 1.959963984540054
BATCH_SIZE = 256


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int
    point: float
    ci_low: float
    ci_high: float
    master_seed: int

    @classmethod
    def from_counts(cls, successes: int, trials: int, master_seed: int, z: float = Z95):
        lo, hi = wilson(successes, trials, z)
        return cls(successes, trials, successes / trials, lo, hi, master_seed)

    @property
    def half_width(self) -> float:
        return (self.ci_high - self.ci_low) / 2

    def verdict(self, threshold: float, force_point: bool = False):
        """True/False against ``point >= threshold``; None if the CI straddles it."""
        if force_point:
            return self.point >= threshold
        if self.ci_low >= threshold:
            return True
        if self.ci_high < threshold:
            return False
        return None

    def to_dict(self) -> dict:
        return {"successes": self.successes, "trials": self.trials, "point": self.point,
                "ci_low": self.ci_low, "ci_high": self.ci_high, "seed": self.master_seed}


def wilson(successes: int, trials: int, z: float = Z95) -> tuple[float, float]:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if not 0 <= successes <= trials:
        raise ValueError("successes outside [0, trials]")
    p = successes / trials
    z2 = z * z
    denom = 1 + z2 / trials
    centre = (p + z2 / (2 * trials)) / denom
    half = z * math.sqrt(p * (1 - p) / trials + z2 / (4 * trials * trials)) / denom
    # clamp rounding so that lo <= p <= hi always holds
    return max(0.0, min(p, centre - half)), min(1.0, max(p, centre + half))


def required_trials(threshold: float, z: float = Z95) -> float:
    """Trials needed before an all-success run can certify ``p >= threshold``."""
    gap = 1.0 - threshold
    if gap <= 0:
        return math.inf
    return z * z * threshold / gap


def batch_rng(master_seed: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master_seed, spawn_key=(batch,)))


def _run_batch(sampler, k: int, master_seed: int, batch: int, n: int) -> np.ndarray:
    rng = batch_rng(master_seed, batch)
    counts = np.zeros(k, dtype=np.int64)
    for _ in range(n):
        out = sampler(rng)
        counts += np.asarray(out, dtype=bool).reshape(k)
    return counts


def _batches(trials: int, batch_size: int):
    full, rest = divmod(trials, batch_size)
    sizes = [batch_size] * full + ([rest] if rest else [])
    return list(enumerate(sizes))


def count_many(sampler: Callable, k: int, trials: int, master_seed: int,
               workers: int = 1, batch_size: int = BATCH_SIZE) -> np.ndarray:
    if trials < 1:
        raise ValueError("trials must be >= 1")
    jobs = _batches(trials, batch_size)
    if workers <= 1 or len(jobs) == 1:
        parts = [_run_batch(sampler, k, master_seed, b, n) for b, n in jobs]
    else:
        parts = Parallel(n_jobs=workers)(
            delayed(_run_batch)(sampler, k, master_seed, b, n) for b, n in jobs)
    return np.sum(parts, axis=0)


def estimate_many(sampler: Callable, k: int, trials: int, master_seed: int,
                  workers: int = 1, batch_size: int = BATCH_SIZE) -> list[Estimate]:
    """Estimates for ``k`` events observed jointly per trial.

    ``sampler(rng)`` returns a length-``k`` sequence of booleans.
    """
    counts = count_many(sampler, k, trials, master_seed, workers, batch_size)
    return [Estimate.from_counts(int(c), trials, master_seed) for c in counts]


def estimate(sampler: Callable, trials: int, master_seed: int, workers: int = 1,
             batch_size: int = BATCH_SIZE) -> Estimate:
    """``sampler(rng) -> bool``; see :func:`estimate_many`."""
    return estimate_many(lambda rng: (sampler(rng),), 1, trials, master_seed,
                         workers, batch_size)[0]


# -- survival curves ------------------------------------------------------------

class DepthSampler:
    """Draws a fresh sequence pair and records the survival depth per depth."""

    def __init__(self, M: int, depths, x_symbols=None, y_symbols=None):
        self.M = M
        self.depths = tuple(depths)
        self.n = max(self.depths)
        self.x_symbols = None if x_symbols is None else np.asarray(x_symbols, dtype=np.int32)
        self.y_symbols = None if y_symbols is None else np.asarray(y_symbols, dtype=np.int32)

    def _draw(self, rng, symbols):
        if symbols is None:
            return model.random_symbols(rng, self.M, self.n)
        return rng.choice(symbols, size=self.n)

    def __call__(self, rng):
        x = model.Sequence(self.M, self._draw(rng, self.x_symbols), "X")
        y = model.Sequence(self.M, self._draw(rng, self.y_symbols), "Y")
        d = reachability.survival_depth(x, y, self.n)
        return [d >= n for n in self.depths]


def survival_curve(M: int, depths, trials: int, seed: int, workers: int = 1,
                   x_symbols=None, y_symbols=None) -> list[tuple[int, Estimate]]:
    """``P(survival_depth >= n)`` for each ``n``; one DP per trial serves all depths."""
    depths = list(depths)
    if depths != sorted(depths) or not depths or depths[0] < 1:
        raise ValueError("depths must be positive and sorted ascending")
    sampler = DepthSampler(M, depths, x_symbols, y_symbols)
    ests = estimate_many(sampler, len(depths), trials, seed, workers)
    return list(zip(depths, ests))


class CoupledDepthSampler:
    """One pair over ``max(Ms)`` symbols, coarsened to every alphabet in ``Ms``.

    Coarsening merges symbols, so a site open at a small alphabet is open
    at every larger one and survival is monotone in ``M`` per instance.
    """

    def __init__(self, Ms, depth: int):
        self.Ms = tuple(Ms)
        self.top = max(self.Ms)
        if any(self.top % M for M in self.Ms):
            raise ValueError("every alphabet must divide the largest one")
        self.depth = depth

    def __call__(self, rng):
        x = model.Sequence(self.top, model.random_symbols(rng, self.top, self.depth), "X")
        y = model.Sequence(self.top, model.random_symbols(rng, self.top, self.depth), "Y")
        return [reachability.survival_depth(x.coarsen(M), y.coarsen(M), self.depth) >= self.depth
                for M in self.Ms]


def coupled_survival(Ms, depth: int, trials: int, seed: int,
                     workers: int = 1) -> list[tuple[int, Estimate]]:
    ests = estimate_many(CoupledDepthSampler(Ms, depth), len(tuple(Ms)), trials, seed, workers)
    return list(zip(Ms, ests))


class NonOrientedSampler:
    def __init__(self, M: int, n: int):
        self.M, self.n = M, n

    def __call__(self, rng):
        x = model.Sequence(self.M, model.random_symbols(rng, self.M, self.n), "X")
        y = model.Sequence(self.M, model.random_symbols(rng, self.M, self.n), "Y")
        return (reachability.non_oriented_reaches(x, y, self.n),)


def non_oriented_estimate(M: int, n: int, trials: int, seed: int, workers: int = 1) -> Estimate:
    return estimate_many(NonOrientedSampler(M, n), 1, trials, seed, workers)[0]
