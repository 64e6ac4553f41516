"""Pure-Python kernels (fallback for the compiled ``_ckernels`` module).

Columns are Python integers used as bitsets: bit ``r`` is row ``r`` of the
window.  The oriented sweep closes each column upward with the carry trick
``R = (O & ~(O + S)) | S`` (``S`` seeds, ``O`` open mask), so every column
costs a handful of big-integer operations.

All functions take 0-based numpy arrays of column symbols ``xs`` and row
symbols ``ys`` and treat ``(0, 0)`` as the source.
"""
from __future__ import annotations

import numpy as np

IMPLEMENTATION = "python"


def _bits_to_int(flags: np.ndarray) -> int:
    return int.from_bytes(np.packbits(flags, bitorder="little").tobytes(), "little")


def _int_to_words(value: int, nwords: int) -> np.ndarray:
    return np.frombuffer(value.to_bytes(nwords * 8, "little"), dtype="<u8")


def _open_masks(ys: np.ndarray):
    h = int(ys.size)
    full = (1 << h) - 1
    opens = {int(v): full ^ _bits_to_int(ys == v) for v in np.unique(ys)}
    return full, opens


def _columns(xs: np.ndarray, ys: np.ndarray):
    full, opens = _open_masks(ys)
    prev = 1
    for c in xs.tolist():
        o = opens.get(c, full)
        s = prev & o
        r = (o & ~(o + s)) | s
        yield r
        prev = r


def reach_grid(xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    """Every column's reachable set, packed as ``uint64[ncols, nwords]``."""
    nw = (int(ys.size) + 63) // 64
    out = np.zeros((int(xs.size), nw), dtype=np.uint64)
    for i, col in enumerate(_columns(xs, ys)):
        if col:
            out[i] = _int_to_words(col, nw)
    return out


def reach_boundary(xs: np.ndarray, ys: np.ndarray):
    """``(top, right)``: reachability of the top row and of the last column."""
    h = int(ys.size)
    top = np.zeros(int(xs.size), dtype=bool)
    last = 0
    for i, col in enumerate(_columns(xs, ys)):
        top[i] = (col >> (h - 1)) & 1
        last = col
    right = np.array([(last >> r) & 1 for r in range(h)], dtype=bool)
    return top, right


def reach_corner(xs: np.ndarray, ys: np.ndarray) -> bool:
    h = int(ys.size)
    col = 0
    for col in _columns(xs, ys):
        if not col:
            return False
    return bool((col >> (h - 1)) & 1)


def reach_depth(xs: np.ndarray, ys: np.ndarray) -> int:
    """``max(i + r + 1)`` over reachable 0-based sites ``(i, r)``; 0 if none."""
    best = 0
    for i, col in enumerate(_columns(xs, ys)):
        if not col:
            break
        best = max(best, i + col.bit_length())
    return best


def _fill_runs(o: int, s: int, h: int) -> int:
    """Bits of ``o`` lying in a run of consecutive ones that meets ``s``."""
    up, down = s, s
    pu = pd = o
    k = 1
    while k < h:
        up |= pu & (up << k)
        pu &= pu << k
        down |= pd & (down >> k)
        pd &= pd >> k
        k <<= 1
    return (up | down) & o


def nonoriented_reaches(xs: np.ndarray, ys: np.ndarray) -> bool:
    """Does the 4-connected open cluster of ``(0, 0)`` touch the far sides?

    Far sides are the last column and the top row.  Columns are relaxed by
    alternating sweeps until no column changes.
    """
    n, h = int(xs.size), int(ys.size)
    full, opens = _open_masks(ys)
    open_cols = [opens.get(c, full) for c in xs.tolist()]
    top = 1 << (h - 1)
    cols = [0] * n
    cols[0] = _fill_runs(open_cols[0], open_cols[0] & 1, h)
    if not cols[0]:
        return False
    order = list(range(n)) + list(range(n - 2, -1, -1))
    changed = True
    while changed:
        changed = False
        for i in order:
            nb = cols[i]
            if i:
                nb |= cols[i - 1]
            if i + 1 < n:
                nb |= cols[i + 1]
            seeds = nb & open_cols[i]
            if seeds == cols[i]:
                continue
            new = _fill_runs(open_cols[i], seeds, h)
            if new != cols[i]:
                cols[i] = new
                changed = True
                if new & top or (i == n - 1 and new):
                    return True
    return any(c & top for c in cols) or bool(cols[-1])


def level1_cuts(values: np.ndarray, min_len: int, first_class: int,
                second_class: int) -> np.ndarray:
    """Greedy block ends (0-based, inclusive) of the level-1 stopping rule.

    A block starting at ``s`` ends at the least ``t >= s + min_len - 1`` with
    ``values[t] % 4 == first_class`` and ``values[t + 1] % 4 == second_class``.
    """
    m4 = np.asarray(values) % 4
    hits = np.flatnonzero((m4[:-1] == first_class) & (m4[1:] == second_class))
    ends = []
    start = 0
    nh = hits.size
    while True:
        k = int(np.searchsorted(hits, start + min_len - 1))
        if k >= nh:
            break
        t = int(hits[k])
        ends.append(t)
        start = t + 1
    return np.asarray(ends, dtype=np.int64)
