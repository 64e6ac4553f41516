"""Multi-scale block structure: partitions, sampling, goodness and diagnostics.

Level-1 blocks cut the sequence at a two-symbol pattern (X: ``1, 0`` mod 4,
Y: ``3, 2`` mod 4), so every block after the first begins with a symbol of
the pattern's second class.  Level ``j + 1`` blocks group level-``j``
sub-blocks: a minimum of ``L**p_run + L**p_len`` sub-blocks, a geometric
padding ``W`` on ``{0, 1, ...}`` with rate ``L**-p_geom``, then a wait for
``2 L**p_run`` consecutive good sub-blocks whose midpoint ends the block.

Goodness of a level ``j + 1`` block mixes structural checks with Monte Carlo
estimates over random partner blocks.  Verdicts are memoised by block
content and the Monte Carlo seed is derived from that content, so a verdict
never depends on evaluation order.
"""
from __future__ import annotations

import math
import zlib
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable

import numpy as np

from . import kernels, montecarlo
from .model import DomainError, Sequence
from .params import Params
from .reachability import BlockPair, Segment

CLASSES = {"X": (1, 0), "Y": (3, 2)}
OTHER = {"X": "Y", "Y": "X"}

FIRST, MU, MU_GOOD = "first", "mu", "mu_good"


class SamplingBudgetError(RuntimeError):
    """Rejection sampling gave up; carries the observed acceptance rate."""

    def __init__(self, attempts: int, accepted: int):
        self.attempts, self.accepted = attempts, accepted
        super().__init__(f"rejection budget exhausted: {accepted}/{attempts} accepted")


class MeaninglessRunError(ValueError):
    """A threshold cannot be resolved by any feasible number of samples."""


@dataclass(frozen=True, eq=False)
class Block:
    level: int
    role: str
    start: int
    symbols: np.ndarray
    T: int
    sub_lengths: np.ndarray | None = None  # None: level-0 sub-blocks of length 1
    W: int | None = None
    sub_good: tuple | None = None  # True/False/None (not evaluated) per sub-block
    law: str = MU
    sub_blocks: tuple = ()

    @property
    def length(self) -> int:
        return int(self.symbols.size)

    @property
    def end(self) -> int:
        return self.start + self.length - 1

    @property
    def n_sub(self) -> int:
        return self.length if self.sub_lengths is None else int(self.sub_lengths.size)

    @cached_property
    def sub_bounds(self) -> list[tuple[int, int]]:
        if self.sub_lengths is None:
            return [(i, i) for i in range(self.start, self.end + 1)]
        ends = self.start - 1 + np.cumsum(self.sub_lengths)
        starts = np.concatenate([[self.start], ends[:-1] + 1])
        return list(zip(starts.tolist(), ends.tolist()))

    @property
    def bad_positions(self) -> tuple[int, ...]:
        """1-based positions of sub-blocks known to be bad."""
        if self.sub_good is None:
            return ()
        return tuple(i for i, g in enumerate(self.sub_good, 1) if g is False)

    def segment(self, t1: int, t2: int) -> Segment:
        """Sub-blocks ``t1..t2`` (1-based, inclusive)."""
        if not 1 <= t1 <= t2 <= self.n_sub:
            raise IndexError(f"segment [{t1}, {t2}] outside [1, {self.n_sub}]")
        bounds = self.sub_bounds[t1 - 1:t2]
        lo, hi = bounds[0][0], bounds[-1][1]
        return Segment(lo, self.symbols[lo - self.start:hi - self.start + 1], bounds)

    def key(self) -> tuple:
        return (self.level, self.role, self.symbols.tobytes(),
                None if self.sub_lengths is None else self.sub_lengths.tobytes())

    def to_dict(self) -> dict:
        out = {"level": self.level, "role": self.role, "start": self.start,
               "end": self.end, "length": self.length, "n_sub": self.n_sub,
               "T": self.T, "W": self.W, "law": self.law,
               "bad_positions": list(self.bad_positions)}
        if self.sub_lengths is not None:
            out["sub_lengths"] = self.sub_lengths.tolist()
        return out


@dataclass
class BlockPartition:
    level: int
    role: str
    blocks: list[Block]
    sequence: Sequence | None = None
    consumed: int = 0  # level-0 symbols covered by the blocks
    incomplete: bool = False  # the scan ran out of input before the next cut

    def tiles(self) -> bool:
        """Blocks are contiguous from position 1 and their symbols match the sequence."""
        pos = 1
        for b in self.blocks:
            if b.start != pos:
                return False
            if self.sequence is not None and not np.array_equal(
                    b.symbols, self.sequence.window(b.start, b.end)):
                return False
            if b.sub_lengths is not None and int(b.sub_lengths.sum()) != b.length:
                return False
            pos = b.end + 1
        return pos - 1 == self.consumed

    def to_dict(self) -> dict:
        return {"level": self.level, "role": self.role, "consumed": self.consumed,
                "incomplete": self.incomplete, "blocks": [b.to_dict() for b in self.blocks]}


# -- level 1 ----------------------------------------------------------------------

def _check_alphabet(M: int):
    if M % 4:
        raise DomainError(f"block construction needs M divisible by 4, got {M}")


def level1_cuts(items: np.ndarray, min_length: int, role: str) -> np.ndarray:
    """0-based inclusive ends of the level-1 blocks of a symbol stream."""
    c1, c2 = CLASSES[role]
    return kernels.level1_cuts(np.ascontiguousarray(items, dtype=np.int32), min_length, c1, c2)


def level1_lengths(seq: Sequence, min_length: int, role: str | None = None) -> np.ndarray:
    _check_alphabet(seq.M)
    ends = level1_cuts(seq.items, min_length, role or seq.role)
    return np.diff(np.concatenate([[-1], ends]))


def build_level1(seq: Sequence, params: Params, role: str | None = None,
                 min_length: int | None = None) -> BlockPartition:
    """Greedy level-1 cuts; ``min_length`` defaults to ``L_1``."""
    role = role or seq.role
    _check_alphabet(seq.M)
    L1 = params.scale(1) if min_length is None else min_length
    ends = level1_cuts(seq.items, L1, role)
    blocks, start = [], 0
    for k, e in enumerate(ends.tolist()):
        blocks.append(Block(1, role, start + 1, seq.items[start:e + 1], T=e + 1 - start - L1,
                            law=FIRST if k == 0 else MU))
        start = e + 1
    return BlockPartition(1, role, blocks, seq, consumed=start, incomplete=start < len(seq))


# -- level j + 1 from level j -----------------------------------------------------------

def draw_padding(rng: np.random.Generator, rate: float) -> int:
    """``Geom(rate)`` on ``{0, 1, ...}``."""
    return int(rng.geometric(rate)) - 1


class _Lazy:
    """Goodness of a growing list of sub-blocks, evaluated on first use."""

    def __init__(self, blocks, goodness):
        self.blocks = blocks
        self.fn = goodness if callable(goodness) else None
        self.known = {} if callable(goodness) else dict(enumerate(goodness))

    def __call__(self, i: int) -> bool:
        if i not in self.known:
            self.known[i] = bool(self.fn(self.blocks[i]))
        return self.known[i]

    def get(self, i: int):
        return self.known.get(i)


def _find_run(good: Callable[[int], bool], start: int, run: int, available: Callable[[int], bool]):
    """Least ``i >= start`` with sub-blocks ``i .. i + run - 1`` all good (0-based)."""
    i = start
    while True:
        for k in range(i, i + run):
            if not available(k):
                return None
            if not good(k):
                i = k + 1
                break
        else:
            return i


def _assemble(level: int, role: str, subs: list[Block], lazy: _Lazy, lo: int, hi: int,
              T: int, W: int, law: str, start: int) -> Block:
    chosen = subs[lo:hi]
    symbols = np.concatenate([b.symbols for b in chosen])
    lengths = np.array([b.length for b in chosen], dtype=np.int64)
    good = tuple(lazy.get(i) for i in range(lo, hi))
    return Block(level, role, start, symbols, T=T, sub_lengths=lengths, W=W,
                 sub_good=good, law=law, sub_blocks=tuple(chosen))


def build_next_level(partition: BlockPartition, goodness, params: Params, rng_seed,
                     W_values=None) -> BlockPartition:
    """Group level-``j`` blocks into level ``j + 1`` blocks.

    ``goodness`` is a sequence of verdicts (one per block of ``partition``)
    or a callable ``Block -> bool`` evaluated lazily.  ``W_values`` replaces
    the geometric draws, one per block in order.
    """
    j = partition.level
    run, base = params.run_length(j), params.min_length(j)
    rate = params.geom_rate(j)
    rng = np.random.default_rng(rng_seed)
    forced = iter(W_values) if W_values is not None else None
    subs = partition.blocks
    lazy = _Lazy(subs, goodness)
    n = len(subs) if callable(goodness) else min(len(subs), len(goodness))
    blocks, m, pos = [], 0, 1
    incomplete = False
    while True:
        W = next(forced) if forced is not None else draw_padding(rng, rate)
        i = _find_run(lazy, m + run + base + W, 2 * run, lambda k: k < n)
        if i is None:
            incomplete = m < len(subs)
            break
        l = i - m
        b = _assemble(j + 1, partition.role, subs, lazy, m, m + l + run, T=l - run - base, W=W,
                      law=FIRST if not blocks else MU, start=pos)
        blocks.append(b)
        pos = b.end + 1
        m += l + run
    return BlockPartition(j + 1, partition.role, blocks, partition.sequence,
                          consumed=pos - 1, incomplete=incomplete)


# -- sampling -------------------------------------------------------------------------

def _rng(seed) -> np.random.Generator:
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def sample_level1(rng: np.random.Generator, M: int, min_length: int, role: str,
                  law: str = MU) -> Block:
    """A level-1 block with law ``mu`` (or the first-block law)."""
    _check_alphabet(M)
    c1, c2 = CLASSES[role]
    parts = []
    if law == MU:
        # the previous block's stopping pattern fixes the class of our first
        # symbol: uniform over {s <= M : s = c2 mod 4}
        parts.append(np.array([4 * int(rng.integers(0, M // 4)) + (c2 or 4)], dtype=np.int32))
    chunk = max(4 * min_length, 64)
    while True:
        parts.append(rng.integers(1, M + 1, size=chunk, dtype=np.int32))
        buf = np.concatenate(parts)
        ends = kernels.level1_cuts(buf, min_length, c1, c2)
        if ends.size:
            e = int(ends[0])
            return Block(1, role, 1, buf[:e + 1], T=e + 1 - min_length, law=law)


def sample_block(j: int, law: str, params: Params, seed, *, M: int, role: str = "X",
                 goodness: Callable[[Block], bool] | None = None, W_values=None,
                 min_length: int | None = None, budget: int = 1000) -> Block:
    """A level-``j`` block drawn from ``mu_j`` (``law="mu"``) or ``mu_{j,G}``.

    Levels above 1 follow the stream-free recipe: ``L**p_run`` sub-blocks from
    the good law, the rest from ``mu_{j-1}``, independent padding ``W``.
    Goodness of sub-blocks is evaluated only while scanning for the run.
    """
    rng = _rng(seed)
    if law == MU_GOOD:
        if goodness is None:
            raise ValueError("mu_good sampling needs a goodness oracle")
        for attempt in range(1, budget + 1):
            b = sample_block(j, MU, params, rng, M=M, role=role, goodness=goodness,
                             W_values=W_values, min_length=min_length)
            if goodness(b):
                return Block(b.level, b.role, b.start, b.symbols, b.T, b.sub_lengths, b.W,
                             b.sub_good, MU_GOOD, b.sub_blocks)
        raise SamplingBudgetError(budget, 0)
    if law != MU:
        raise ValueError(f"unknown law {law!r}")
    if j < 1:
        raise ValueError("blocks have level >= 1")
    if j == 1:
        L1 = params.scale(1) if min_length is None else min_length
        return sample_level1(rng, M, L1, role)
    if goodness is None:
        raise ValueError("levels above 1 need a goodness oracle")
    k = j - 1
    run, base = params.run_length(k), params.min_length(k)
    W = W_values[0] if W_values else draw_padding(rng, params.geom_rate(k))
    inner_W = W_values[1:] if W_values else None
    subs: list[Block] = []

    def available(i: int) -> bool:
        while len(subs) <= i:
            sub_law = MU_GOOD if len(subs) < run else MU
            subs.append(sample_block(k, sub_law, params, rng, M=M, role=role, goodness=goodness,
                                     W_values=inner_W, min_length=min_length, budget=budget))
        return True

    lazy = _Lazy(subs, goodness)
    for i in range(run):
        lazy.known[i] = True
    i = _find_run(lambda t: available(t) and lazy(t), run + base + W, 2 * run, available)
    return _assemble(j, role, subs, lazy, 0, i + run, T=i - run - base, W=W, law=MU, start=1)


# -- goodness -----------------------------------------------------------------------

@dataclass(frozen=True)
class MCConfig:
    samples: int = 200
    seed: int = 0
    force_point_estimate: bool = False
    workers: int = 1
    max_trials: float = 1e8


def thresholds(j: int, params: Params) -> dict[str, float]:
    """Thresholds for a level ``j + 1`` block (sub-block level ``j``)."""
    L_next = params.scale(j + 1)
    return {
        "ii": 1.0 - float(L_next) ** (-2.0 * params.beta),
        "iii_cs": 0.9 + 2.0 ** -(j + 4),
        "iii_sc": 0.9 + 2.0 ** -(j + 4),
        "iv": 0.75 + 2.0 ** -(j + 4),
    }


@dataclass
class GoodnessVerdict:
    level: int
    role: str
    conditions: dict  # name -> True / False / None (undecided)
    skipped: tuple = ()
    estimates: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    samples: int = 0
    seed: int | None = None

    @property
    def overall(self) -> str:
        values = list(self.conditions.values())
        if any(v is False for v in values):
            return "bad"
        if any(v is None for v in values):
            return "undecided"
        return "good"

    @property
    def good(self) -> bool:
        return self.overall == "good"

    def to_dict(self) -> dict:
        return {"level": self.level, "role": self.role, "overall": self.overall,
                "conditions": self.conditions, "skipped": list(self.skipped),
                "estimates": {k: e.to_dict() for k, e in self.estimates.items()},
                "thresholds": self.thresholds, "samples": self.samples, "seed": self.seed}


def content_seed(block: Block, base_seed: int) -> int:
    digest = zlib.crc32(repr(block.key()).encode())
    ss = np.random.SeedSequence([base_seed % 2**63, block.level, "XY".index(block.role), digest])
    return int(ss.generate_state(1, np.uint64)[0] >> np.uint64(1))


class PairEvents:
    """``(ss, cs, sc, cc)`` for a fixed block against a freshly drawn partner."""

    def __init__(self, block: Block, partner: Callable, params: Params):
        self.block, self.partner, self.params = block, partner, params

    def __call__(self, rng):
        other = self.partner(rng)
        x, y = (self.block, other) if self.block.role == "X" else (other, self.block)
        pair = BlockPair(x, y, self.params)
        return (pair.ss(), pair.cs(), pair.sc(), pair.cc())


class PartnerSampler:
    def __init__(self, level: int, role: str, params: Params, M: int,
                 goodness=None, min_length: int | None = None):
        self.level, self.role, self.params, self.M = level, role, params, M
        self.goodness, self.min_length = goodness, min_length

    def __call__(self, rng):
        return sample_block(self.level, MU, self.params, rng, M=self.M, role=self.role,
                            goodness=self.goodness, min_length=self.min_length)


def structural_conditions(block: Block, params: Params, sub_goodness=None) -> tuple[dict, tuple]:
    """Conditions (i) and (v); both only apply above level 1."""
    j = block.level - 1
    if j == 0:
        return {}, ("i", "v")
    run = params.run_length(j)
    good = list(block.sub_good or [None] * block.n_sub)
    for i in range(min(run, block.n_sub)):
        if good[i] is None:
            if sub_goodness is None:
                raise ValueError("sub-block goodness unknown and no oracle given")
            good[i] = bool(sub_goodness(block.sub_blocks[i]))
    cond_i = block.n_sub >= run and all(good[:run])
    cond_v = block.n_sub <= params.min_length(j) + params.power(j, params.p_run + 2)
    return {"i": cond_i, "v": cond_v}, ()


def classify_good(block: Block, j: int | None, mc: MCConfig, params: Params, *,
                  M: int | None = None, partner_sampler: Callable | None = None,
                  sub_goodness=None, min_length: int | None = None) -> GoodnessVerdict:
    """Goodness of a level ``j + 1`` block.

    Structural conditions come first; a structural failure spends no
    samples.  Condition (ii)-(iv) verdicts are "undecided" (None) when the
    Wilson interval straddles the threshold, unless ``force_point_estimate``.
    """
    if j is None:
        j = block.level - 1
    if block.level != j + 1:
        raise ValueError(f"block level {block.level} does not match j + 1 = {j + 1}")
    conds, skipped = structural_conditions(block, params, sub_goodness)
    th = thresholds(j, params)
    if not all(conds.values()):
        return GoodnessVerdict(block.level, block.role, conds, skipped, thresholds=th)
    for name, t in th.items():
        need = montecarlo.required_trials(t)
        if need > mc.max_trials:
            raise MeaninglessRunError(
                f"condition {name} threshold {t!r} needs about {need:.3g} samples")
    if partner_sampler is None:
        if M is None:
            raise ValueError("need M or a partner sampler")
        partner_sampler = PartnerSampler(block.level, OTHER[block.role], params, M,
                                         sub_goodness, min_length)
    seed = content_seed(block, mc.seed)
    ests = montecarlo.estimate_many(PairEvents(block, partner_sampler, params), 4,
                                    mc.samples, seed, mc.workers)
    named = dict(zip(("ii", "iii_cs", "iii_sc", "iv"), ests))
    for name, est in named.items():
        conds[name] = est.verdict(th[name], mc.force_point_estimate)
    return GoodnessVerdict(block.level, block.role, conds, skipped, named, th, mc.samples, seed)


class GoodnessOracle:
    """Memoised goodness for blocks of any level; a callable ``Block -> bool``.

    Undecided verdicts count as not good.
    """

    def __init__(self, params: Params, mc: MCConfig, M: int, min_length: int | None = None,
                 partner_sampler: Callable | None = None):
        self.params, self.mc, self.M, self.min_length = params, mc, M, min_length
        self.partner_sampler = partner_sampler
        self.cache: dict[tuple, GoodnessVerdict] = {}

    def verdict(self, block: Block) -> GoodnessVerdict:
        key = block.key()
        if key not in self.cache:
            self.cache[key] = classify_good(
                block, block.level - 1, self.mc, self.params, M=self.M,
                partner_sampler=self.partner_sampler, sub_goodness=self,
                min_length=self.min_length)
        return self.cache[key]

    def __call__(self, block: Block) -> bool:
        return self.verdict(block).good


# -- case diagnostics ----------------------------------------------------------------

def case_of(T: int, K: int, product: float, L_j: int, params: Params, R_plus=None) -> int:
    """First matching case 1..5 for excess ``T``, bad count ``K`` and S-product."""
    R_plus = Fraction(params.R if R_plus is None else R_plus)
    span = L_j ** params.p_len
    short = 2 * T <= params.R * span
    few = 10 * R_plus * K <= span + T
    if short and K <= params.k0:
        return 1 if product ** 3 * L_j > 1 else 2
    if short and params.k0 <= K and few:
        return 3
    if not short and few:
        return 4
    return 5


def classify_case(block: Block, j: int, S_estimates, params: Params, R_plus=None) -> int:
    """Case index of a level ``j + 1`` block; ``S_estimates`` are per bad sub-block."""
    K = len(block.bad_positions)
    product = float(np.prod(np.asarray(list(S_estimates), dtype=float))) if K else 1.0
    return case_of(block.T, K, product, params.scale(j), params, R_plus)


# -- recursive estimates ------------------------------------------------------------

def tail_bound_level1(l: int) -> float:
    return (15 / 16) ** ((l - 1) / 2)


def tail_check(T: np.ndarray, ls, sigmas: float = 3.0) -> list[dict]:
    """Empirical ``P(T >= l)`` against the level-1 bound plus ``sigmas`` standard errors."""
    T = np.asarray(T)
    rows = []
    for l in ls:
        bound = tail_bound_level1(l)
        emp = float(np.mean(T >= l))
        sigma = math.sqrt(bound * (1 - bound) / T.size)
        rows.append({"l": l, "empirical": emp, "bound": bound, "sigma": sigma,
                     "ok": emp <= bound + sigmas * sigma})
    return rows


def length_mgf(lengths: np.ndarray, L_prev: float, L_j: float, j: int) -> float:
    """Sample mean of ``exp(L_prev**-6 (|X| - (2 - 2**-j) L_j))``."""
    lengths = np.asarray(lengths, dtype=float)
    return float(np.mean(np.exp((lengths - (2 - 2.0 ** -j) * L_j) / L_prev ** 6)))


def tail_estimate_bound(p: float, j: int, params: Params) -> float:
    return p ** float(params.m_j(j)) * float(params.scale(j)) ** -params.beta


def check_recursive_estimates(j: int, ensemble: int, params: Params, *, M: int, mc: MCConfig,
                              seed: int = 0, p_grid=(0.0, 0.25, 0.5, 0.75),
                              mgf_tolerance: float = 0.05, role: str = "X",
                              min_length: int | None = None) -> dict:
    """Empirical versions of the tail, length and good-fraction estimates at level ``j``."""
    if ensemble < 2:
        raise ValueError("ensemble too small")
    oracle = GoodnessOracle(params, mc, M, min_length)
    rng = np.random.default_rng(seed)
    blocks = [sample_block(j, MU, params, rng, M=M, role=role, goodness=oracle,
                           min_length=min_length) for _ in range(ensemble)]
    verdicts = [oracle.verdict(b) for b in blocks]
    S = []
    for b, v in zip(blocks, verdicts):
        if "iv" in v.estimates:
            S.append(v.estimates["iv"].point)
        else:
            seed_b = content_seed(b, mc.seed)
            partner = PartnerSampler(j, OTHER[role], params, M, oracle, min_length)
            est = montecarlo.estimate(lambda r, b=b: _cc(b, partner(r), params),
                                      mc.samples, seed_b)
            S.append(est.point)
    S = np.asarray(S)
    p_max = 0.75 + 2.0 ** -(j + 3)
    tail_rows = []
    for p in p_grid:
        if p > p_max:
            continue
        bound = tail_estimate_bound(p, j, params)
        if p == 0:
            tail_rows.append({"p": p, "bound": bound, "ok": True, "note": "trivial"})
            continue
        est = montecarlo.Estimate.from_counts(int((S <= p).sum()), ensemble, seed)
        # fails only when the whole interval sits above the bound
        tail_rows.append({"p": p, "bound": bound, "estimate": est.to_dict(),
                          "ok": est.ci_low <= bound})
    L_prev = params.scale(j - 1)
    L_j = params.scale(j) if min_length is None or j > 1 else min_length
    mgf = length_mgf([b.length for b in blocks], L_prev, L_j, j)
    good = montecarlo.Estimate.from_counts(sum(v.good for v in verdicts), ensemble, seed)
    target = 1 - float(params.scale(j)) ** -params.delta
    good_ok = good.verdict(target, mc.force_point_estimate)
    return {
        "level": j, "ensemble": ensemble,
        "I": {"rows": tail_rows,
              "ok": all(r["ok"] for r in tail_rows)},
        "II": {"mgf": mgf, "limit": 1 + mgf_tolerance, "ok": mgf <= 1 + mgf_tolerance},
        "III": {"estimate": good.to_dict(), "target": target, "ok": good_ok},
    }


def _cc(x_like: Block, other: Block, params: Params) -> bool:
    x, y = (x_like, other) if x_like.role == "X" else (other, x_like)
    return BlockPair(x, y, params).cc()
