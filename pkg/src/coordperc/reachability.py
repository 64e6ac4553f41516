"""Oriented path existence in lattice rectangles and the block-level events.

Paths use right ``(+1, 0)`` and up ``(0, +1)`` steps only.  All coordinates
at this module's interface are 1-based and absolute (positions in the X and
Y sequences); kernels work on 0-based windows.

Density thresholds are compared as ``count >= ceil(threshold * size)`` with
the threshold evaluated in binary floating point.  The dyadic thresholds
``3/4 + 2**-(j+5)`` are exact in floating point.  The starred thresholds
``3/4 + 2**-(j+7/2)`` are correctly rounded doubles, so verdicts are the
same on every IEEE-754 platform.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Protocol

import numpy as np

from . import kernels
from .model import Sequence
from .params import Params

RIGHT_UP = ((1, 0), (0, 1))

BOTTOM, LEFT, TOP, RIGHT = "bottom", "left", "top", "right"


class BoundsError(IndexError):
    """A rectangle or site lies outside the sequences."""


class ChunkError(ValueError):
    """A block is too short to hold one full chunk."""


@dataclass(frozen=True)
class Rect:
    a1: int
    a2: int
    b1: int
    b2: int

    def __post_init__(self):
        if self.a1 < 1 or self.b1 < 1 or self.a1 > self.a2 or self.b1 > self.b2:
            raise BoundsError(f"invalid rectangle {self}")

    @property
    def width(self) -> int:
        return self.a2 - self.a1 + 1

    @property
    def height(self) -> int:
        return self.b2 - self.b1 + 1

    @classmethod
    def parse(cls, text: str) -> "Rect":
        a1, a2, b1, b2 = (int(v) for v in text.split(","))
        return cls(a1, a2, b1, b2)

    def check_within(self, x: Sequence, y: Sequence) -> None:
        if self.a2 > len(x) or self.b2 > len(y):
            raise BoundsError(f"{self} exceeds sequence lengths ({len(x)}, {len(y)})")


def _windows(x: Sequence, y: Sequence, rect: Rect):
    rect.check_within(x, y)
    return x.window(rect.a1, rect.a2), y.window(rect.b1, rect.b2)


@dataclass(frozen=True, eq=False)
class ReachResult:
    """Sites reachable from ``(a1, b1)`` inside ``rect``, one packed column each."""

    rect: Rect
    packed: np.ndarray  # uint64[width, nwords]

    def marked(self, i1: int, i2: int) -> bool:
        r = self.rect
        if not (r.a1 <= i1 <= r.a2 and r.b1 <= i2 <= r.b2):
            raise BoundsError(f"site ({i1}, {i2}) outside {r}")
        row = i2 - r.b1
        return bool((int(self.packed[i1 - r.a1, row // 64]) >> (row % 64)) & 1)

    @cached_property
    def grid(self) -> np.ndarray:
        """Boolean array indexed ``[i1 - a1, i2 - b1]``."""
        bits = np.unpackbits(self.packed.view(np.uint8), axis=1, bitorder="little")
        return bits[:, : self.rect.height].astype(bool)

    def sites(self) -> set[tuple[int, int]]:
        cols, rows = np.nonzero(self.grid)
        return {(int(c) + self.rect.a1, int(r) + self.rect.b1) for c, r in zip(cols, rows)}

    def top_row(self) -> np.ndarray:
        return self.grid[:, -1].copy()

    def right_column(self) -> np.ndarray:
        return self.grid[-1, :].copy()


def reach(x: Sequence, y: Sequence, rect: Rect, step_set=RIGHT_UP) -> ReachResult:
    """All sites reachable by open oriented paths from the rectangle's corner."""
    if tuple(map(tuple, step_set)) != RIGHT_UP:
        raise ValueError("only right/up steps are supported")
    xs, ys = _windows(x, y, rect)
    return ReachResult(rect, kernels.reach_grid(xs, ys))


def cc_connected(x: Sequence, y: Sequence, rect: Rect) -> bool:
    xs, ys = _windows(x, y, rect)
    return bool(kernels.reach_corner(xs, ys))


def survival_depth(x: Sequence, y: Sequence, n_max: int) -> int:
    """Number of anti-diagonals ``i1 + i2 - 1 = 1..n`` reached from ``(1, 1)``.

    Returns 0 when the origin is closed and at most ``n_max``.
    """
    if n_max < 1:
        return 0
    if len(x) < n_max or len(y) < n_max:
        raise BoundsError(f"sequences shorter than n_max={n_max}")
    depth = kernels.reach_depth(x.window(1, n_max), y.window(1, n_max))
    return min(int(depth), n_max)


def non_oriented_reaches(x: Sequence, y: Sequence, n: int) -> bool:
    """Does the 4-connected open cluster of ``(1, 1)`` touch ``i1 = n`` or ``i2 = n``?"""
    if len(x) < n or len(y) < n:
        raise BoundsError(f"sequences shorter than n={n}")
    return bool(kernels.nonoriented_reaches(x.window(1, n), y.window(1, n)))


# -- blocks, chunks, entry/exit chunks -----------------------------------------

class BlockLike(Protocol):
    level: int
    role: str
    start: int
    symbols: np.ndarray
    sub_bounds: list  # [(lo, hi)] absolute 1-based inclusive

    @property
    def end(self) -> int: ...


@dataclass(frozen=True)
class Chunk:
    role: str
    k: int
    lo: int
    hi: int
    n_sub: int

    @property
    def size(self) -> int:
        return self.hi - self.lo + 1


def chunk_counts(n_sub: int, size: int) -> list[int]:
    """Sub-block counts per chunk; the last chunk absorbs the remainder."""
    n = n_sub // size
    if n == 0:
        raise ChunkError(f"no full chunk: {n_sub} sub-blocks, chunk size {size}")
    return [size] * (n - 1) + [n_sub - (n - 1) * size]


def chunks(block: BlockLike, params: Params) -> list[Chunk]:
    """Chunk partition of a level >= 1 block into groups of sub-blocks."""
    if block.level < 1:
        raise ChunkError("chunks need a block of level >= 1")
    counts = chunk_counts(len(block.sub_bounds), params.chunk_size(block.level - 1))
    out, t = [], 0
    for k, c in enumerate(counts, 1):
        lo, hi = block.sub_bounds[t][0], block.sub_bounds[t + c - 1][1]
        out.append(Chunk(block.role, k, lo, hi, c))
        t += c
    return out


@dataclass(frozen=True)
class EntryExit:
    side: str
    k: int
    j: int

    def point(self, n_x: int, n_y: int) -> tuple[int, int]:
        """Chunk-grid coordinates used by the slope conditions."""
        return {BOTTOM: (self.k, 1), LEFT: (1, self.k),
                TOP: (self.k, n_y), RIGHT: (n_x, self.k)}[self.side]


def slope_within(dy: int, dx: int, R: int, e2: int) -> bool:
    """Exact test of ``(1 - eps)/R <= dy/dx <= R (1 + eps)`` with ``eps = 2**(-e2/2)``.

    Half-integer exponents make ``eps`` irrational, so each side is
    rearranged to ``gap <= eps`` and squared; only integers are compared.
    ``0/0`` counts as inside, any other zero denominator as outside.
    """
    if dx == 0:
        return dy == 0
    if dx < 0 or dy < 0:
        return False
    low = dx - R * dy  # lower bound: low / dx <= eps
    if low > 0 and (low * low << e2) > dx * dx:
        return False
    high = dy - R * dx  # upper bound: high / (R dx) <= eps
    return not (high > 0 and (high * high << e2) > R * R * dx * dx)


def slope_bounds(R: int, e2: int) -> tuple[float, float]:
    """Floating-point bounds for display only; verdicts use :func:`slope_within`."""
    eps = 2.0 ** (-e2 / 2)
    return (1 - eps) / R, R * (1 + eps)


@dataclass(frozen=True)
class EntryExitSet:
    entries: tuple[EntryExit, ...]
    exits: tuple[EntryExit, ...]
    pairs: tuple[tuple[EntryExit, EntryExit], ...]
    n_x: int
    n_y: int
    warning: str | None = None


def _window_ok(k: int, n: int, Lj: int) -> bool:
    return Lj <= k <= n - Lj


def entry_exit_sets(n_x: int, n_y: int, j: int, params: Params) -> EntryExitSet:
    """Entry chunks, exit chunks and admissible entry-exit pairs for chunk counts."""
    return _entry_exit_sets(n_x, n_y, j, params.scale(j), params.R)


@lru_cache(maxsize=4096)
def _entry_exit_sets(n_x: int, n_y: int, j: int, Lj: int, R: int) -> EntryExitSet:
    e2 = 2 * (j + 4)
    warning = None
    if n_x <= 2 * Lj or n_y <= 2 * Lj:
        warning = f"too few chunks ({n_x}, {n_y}) for margin L_{j}={Lj}"
    corner_in, corner_out = (1, 1), (n_x, n_y)

    def ok(p, q):
        return q[0] - p[0] > 0 and slope_within(q[1] - p[1], q[0] - p[0], R, e2)

    cands_in = [EntryExit(BOTTOM, k, j) for k in range(1, n_x + 1) if _window_ok(k, n_x, Lj)]
    cands_in += [EntryExit(LEFT, k, j) for k in range(1, n_y + 1) if _window_ok(k, n_y, Lj)]
    cands_out = [EntryExit(TOP, k, j) for k in range(1, n_x + 1) if _window_ok(k, n_x, Lj)]
    cands_out += [EntryExit(RIGHT, k, j) for k in range(1, n_y + 1) if _window_ok(k, n_y, Lj)]

    entries = tuple(e for e in cands_in if ok(e.point(n_x, n_y), corner_out))
    exits = tuple(e for e in cands_out if ok(corner_in, e.point(n_x, n_y)))
    pairs = tuple((e1, e2) for e1 in cands_in for e2 in cands_out
                  if ok(e1.point(n_x, n_y), e2.point(n_x, n_y)))
    return EntryExitSet(entries, exits, pairs, n_x, n_y, warning)


def entry_exit_pairs(x_block: BlockLike, y_block: BlockLike, j: int,
                     params: Params) -> EntryExitSet:
    return entry_exit_sets(len(chunks(x_block, params)), len(chunks(y_block, params)),
                           j, params)


# -- density helpers -----------------------------------------------------------

def side_density(j: int) -> float:
    return 0.75 + 2.0 ** -(j + 5)


def starred_density(j: int) -> float:
    return 0.75 + 2.0 ** -(j + 3.5)


def required(threshold: float, size: int) -> int:
    return max(0, math.ceil(threshold * size))


# -- block rectangle events ----------------------------------------------------

class BlockPair:
    """Reachability data for the rectangle of an X block and a Y block.

    Relative coordinates: column ``c = a - a1``, row ``r = b - b1``.
    """

    def __init__(self, x_block: BlockLike, y_block: BlockLike, params: Params, j: int | None = None):
        self.x_block, self.y_block, self.params = x_block, y_block, params
        self.j = x_block.level - 1 if j is None else j
        self.xs = np.ascontiguousarray(x_block.symbols, dtype=np.int32)
        self.ys = np.ascontiguousarray(y_block.symbols, dtype=np.int32)
        self.a1, self.b1 = x_block.start, y_block.start
        self.cx = chunks(x_block, params)
        self.cy = chunks(y_block, params)
        self.ee = entry_exit_sets(len(self.cx), len(self.cy), self.j, params)
        self._src_cache: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}

    def chunk_of(self, e: EntryExit) -> Chunk:
        return (self.cx if e.side in (BOTTOM, TOP) else self.cy)[e.k - 1]

    @cached_property
    def forward(self):
        return kernels.reach_boundary(self.xs, self.ys)

    @cached_property
    def backward(self):
        top, right = kernels.reach_boundary(self.xs[::-1].copy(), self.ys[::-1].copy())
        # reversed top row is the original bottom row, reversed last column the
        # original first column
        return top[::-1], right[::-1]

    def cc(self) -> bool:
        return bool(self.forward[0][-1])

    def _count_ok(self, flags: np.ndarray, ch: Chunk, origin: int) -> bool:
        seg = flags[ch.lo - origin: ch.hi - origin + 1]
        return int(seg.sum()) >= required(side_density(self.j), ch.size)

    def cs(self) -> bool:
        top, right = self.forward
        for e in self.ee.exits:
            ch = self.chunk_of(e)
            flags, origin = (top, self.a1) if e.side == TOP else (right, self.b1)
            if not self._count_ok(flags, ch, origin):
                return False
        return True

    def sc(self) -> bool:
        bottom, left = self.backward
        for e in self.ee.entries:
            ch = self.chunk_of(e)
            flags, origin = (bottom, self.a1) if e.side == BOTTOM else (left, self.b1)
            if not self._count_ok(flags, ch, origin):
                return False
        return True

    def source_reach(self, side: str, pos: int):
        """``(top, right)`` reach flags from one lower-left boundary site.

        ``top`` is indexed by relative column and ``right`` by relative row
        over the full rectangle; sites the source cannot see are False.
        """
        key = (side, pos)
        if key not in self._src_cache:
            w, h = self.xs.size, self.ys.size
            top = np.zeros(w, dtype=bool)
            right = np.zeros(h, dtype=bool)
            if side == BOTTOM:
                c = pos - self.a1
                t, r = kernels.reach_boundary(self.xs[c:], self.ys)
                top[c:], right[:] = t, r
            else:
                r0 = pos - self.b1
                t, r = kernels.reach_boundary(self.xs, self.ys[r0:])
                top[:], right[r0:] = t, r
            self._src_cache[key] = (top, right)
        return self._src_cache[key]

    def condition_s(self, e1: EntryExit, e2: EntryExit):
        """Witness ``(A, B)`` for Condition S on the pair, or None."""
        c1, c2 = self.chunk_of(e1), self.chunk_of(e2)
        # boundary order: left side top-to-bottom, bottom side left-to-right;
        # top side left-to-right, right side top-to-bottom
        sources = list(range(c1.lo, c1.hi + 1))
        if e1.side == LEFT:
            sources.reverse()
        targets = list(range(c2.lo, c2.hi + 1))
        if e2.side == RIGHT:
            targets.reverse()
        rows = []
        for s in sources:
            top, right = self.source_reach(e1.side, s)
            flags = top[np.array(targets) - self.a1] if e2.side == TOP \
                else right[np.array(targets) - self.b1]
            rows.append(_mask(flags))
        need_a = required(side_density(self.j), c1.size)
        need_b = required(side_density(self.j), c2.size)
        hit = window_biclique(rows, [(1, need_a)], [1] * len(rows),
                              [(_full(len(targets)), need_b)])
        if hit is None:
            return None
        lo, hi, inter = hit
        live = [i for i in range(lo, hi + 1) if rows[i]]
        return ([sources[i] for i in live],
                [targets[b] for b in range(len(targets)) if (inter >> b) & 1])

    def ss(self) -> bool:
        return all(self.condition_s(e1, e2) is not None for e1, e2 in self.ee.pairs)


def _mask(flags) -> int:
    flags = np.asarray(flags, dtype=bool)
    if not flags.size:
        return 0
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


def _full(n: int) -> int:
    return (1 << n) - 1


def window_biclique(rows: list[int], src_needs, src_types: list[int], tgt_needs):
    """Search contiguous windows of live sources for a dense biclique.

    ``rows[i]`` is the target bitmask reached by source ``i`` (sources and
    targets both in boundary order).  ``src_types[i]`` is a bitmask of the
    source classes ``i`` belongs to; ``src_needs`` lists ``(class_bit,
    count)`` minima and ``tgt_needs`` lists ``(target_mask, count)`` minima.

    By planarity every live source between two sources reaches everything
    both of them reach, so a window of consecutive live sources is optimal.
    Returns ``(first, last, common_targets)`` or None.
    """
    if all(c == 0 for _, c in src_needs) or all(c == 0 for _, c in tgt_needs):
        return (0, -1, 0)
    live = [i for i, r in enumerate(rows) if r]
    n = len(live)
    for f in range(n):
        counts = [0] * len(src_needs)
        inter = -1
        for g in range(f, n):
            i = live[g]
            inter &= rows[i]
            if not inter:
                break
            for q, (bit, _) in enumerate(src_needs):
                if src_types[i] & bit:
                    counts[q] += 1
            if all(cnt >= need for cnt, (_, need) in zip(counts, src_needs)):
                if all((inter & m).bit_count() >= need for m, need in tgt_needs):
                    return (live[f], i, inter)
                break  # growing the window only shrinks the common targets
    return None


def cs_connected(x_block: BlockLike, y_block: BlockLike, j: int, params: Params) -> bool:
    return BlockPair(x_block, y_block, params, j).cs()


def sc_connected(x_block: BlockLike, y_block: BlockLike, j: int, params: Params) -> bool:
    return BlockPair(x_block, y_block, params, j).sc()


def ss_connected(x_block: BlockLike, y_block: BlockLike, j: int, params: Params) -> bool:
    return BlockPair(x_block, y_block, params, j).ss()


# -- segments and the starred events -------------------------------------------

@dataclass(frozen=True, eq=False)
class Segment:
    """Consecutive sub-blocks of a block: symbols plus sub-block extents."""

    start: int
    symbols: np.ndarray
    sub_bounds: list = field(default_factory=list)

    @property
    def first(self) -> tuple[int, int]:
        return self.sub_bounds[0]

    @property
    def last(self) -> tuple[int, int]:
        return self.sub_bounds[-1]


@dataclass(frozen=True)
class StarredEvents:
    cs: bool
    sc: bool
    ss: bool

    def to_dict(self) -> dict:
        return {"cs*": self.cs, "sc*": self.sc, "ss*": self.ss}


def starred_events(x_seg: Segment, y_seg: Segment, j: int) -> StarredEvents:
    """The three starred events on a segment rectangle.

    With first/last X sub-blocks ``[a1, a2]``, ``[a3, a4]`` and Y sub-blocks
    ``[b1, b2]``, ``[b3, b4]``, sizes are measured as ``a2 - a1`` etc.
    """
    xs = np.ascontiguousarray(x_seg.symbols, dtype=np.int32)
    ys = np.ascontiguousarray(y_seg.symbols, dtype=np.int32)
    (a1, a2), (a3, a4) = x_seg.first, x_seg.last
    (b1, b2), (b3, b4) = y_seg.first, y_seg.last
    A0, B0 = x_seg.start, y_seg.start
    d = starred_density(j)

    top, right = kernels.reach_boundary(xs, ys)
    cs = (int(right[b3 - B0: b4 - B0 + 1].sum()) >= required(d, b4 - b3)
          and int(top[a3 - A0: a4 - A0 + 1].sum()) >= required(d, a4 - a3))

    btop, bright = kernels.reach_boundary(xs[::-1].copy(), ys[::-1].copy())
    bottom, left = btop[::-1], bright[::-1]
    sc = (int(bottom[a1 - A0: a2 - A0 + 1].sum()) >= required(d, a2 - a1)
          and int(left[b1 - B0: b2 - B0 + 1].sum()) >= required(d, b2 - b1))

    ss = _starred_ss(xs, ys, (a1, a2, a3, a4), (b1, b2, b3, b4), A0, B0, d)
    return StarredEvents(cs, sc, ss)


def _starred_ss(xs, ys, acoords, bcoords, A0, B0, d) -> bool:
    a1, a2, a3, a4 = acoords
    b1, b2, b3, b4 = bcoords
    w, h = xs.size, ys.size
    # sources: left side rows b2..b1+1 (top to bottom), corner, bottom a1+1..a2
    src = [(LEFT, b) for b in range(b2, b1, -1)] + [(BOTTOM, a) for a in range(a1, a2 + 1)]
    types = [2 if side == LEFT else (3 if pos == a1 else 1) for side, pos in src]
    # targets: top a3..a4 (left to right, corner last), right b4-1..b3
    tgt_top = list(range(a3, a4 + 1))
    tgt_right = list(range(b4 - 1, b3 - 1, -1))
    n_top = len(tgt_top)
    top_mask = _full(n_top)
    right_mask = (1 << (n_top - 1)) | (_full(len(tgt_right)) << n_top)
    rows = []
    for side, pos in src:
        if side == BOTTOM:
            c = pos - A0
            t, r = kernels.reach_boundary(xs[c:], ys)
            tf = np.zeros(w, dtype=bool)
            tf[c:] = t
            rf = r
        else:
            r0 = pos - B0
            t, r = kernels.reach_boundary(xs, ys[r0:])
            tf = t
            rf = np.zeros(h, dtype=bool)
            rf[r0:] = r
        flags = np.concatenate([tf[np.array(tgt_top) - A0],
                                rf[np.array(tgt_right, dtype=int) - B0]])
        rows.append(_mask(flags))
    hit = window_biclique(rows, [(1, required(d, a2 - a1)), (2, required(d, b2 - b1))],
                          types, [(top_mask, required(d, a4 - a3)),
                                  (right_mask, required(d, b4 - b3))])
    return hit is not None
