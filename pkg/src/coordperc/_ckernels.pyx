# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels; same contracts as ``_kernels_py``.

Reachable rows of a column are packed into uint64 words.  Closing a column
upward from its seeds is a multi-word add with carry:
``R = (O & ~(O + S)) | S``.
"""
import numpy as np
cimport numpy as cnp
from libc.stdint cimport uint64_t, int32_t, uint8_t
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

IMPLEMENTATION = "cython"

cdef extern from *:
    int __builtin_clzll(unsigned long long) nogil


def _open_table(ys):
    """Open-row masks per distinct row symbol plus an all-open row."""
    ys = np.ascontiguousarray(ys, dtype=np.int32)
    h = ys.size
    nw = (h + 63) // 64
    uniq = np.unique(ys)
    table = np.zeros((uniq.size + 1, nw), dtype=np.uint64)
    valid = np.zeros(nw * 64, dtype=bool)
    valid[:h] = True
    full = np.packbits(valid, bitorder="little").view("<u8")
    for k in range(uniq.size):
        closed = np.zeros(nw * 64, dtype=bool)
        closed[:h] = ys == uniq[k]
        table[k] = full & ~np.packbits(closed, bitorder="little").view("<u8")
    table[uniq.size] = full
    return uniq, table


def _column_rows(xs, uniq):
    xs = np.ascontiguousarray(xs, dtype=np.int32)
    pos = np.searchsorted(uniq, xs)
    pos_c = np.minimum(pos, uniq.size - 1)
    hit = uniq[pos_c] == xs
    return np.where(hit, pos, uniq.size).astype(np.intp)


cdef inline bint _step(const uint64_t* o, const uint64_t* seed, uint64_t* out,
                       Py_ssize_t nw) nogil:
    cdef uint64_t carry = 0, s, t, t2, ow, r, anybits = 0
    cdef Py_ssize_t w
    for w in range(nw):
        ow = o[w]
        s = seed[w] & ow
        t = ow + s
        t2 = t + carry
        carry = (t < ow) | (t2 < t)
        r = (ow & ~t2) | s
        out[w] = r
        anybits |= r
    return anybits != 0


def reach_grid(xs, ys):
    cdef Py_ssize_t n = len(xs), h = len(ys)
    cdef Py_ssize_t nw = (h + 63) // 64
    uniq, table = _open_table(ys)
    rows = _column_rows(xs, uniq)
    out = np.zeros((n, nw), dtype=np.uint64)
    cdef uint64_t[:, ::1] tv = table
    cdef uint64_t[:, ::1] ov = out
    cdef Py_ssize_t[::1] rv = rows
    cdef uint64_t* seed = <uint64_t*> malloc(nw * sizeof(uint64_t))
    cdef Py_ssize_t i
    if n == 0 or h == 0:
        free(seed)
        return out
    memset(seed, 0, nw * sizeof(uint64_t))
    seed[0] = 1
    with nogil:
        _step(&tv[rv[0], 0], seed, &ov[0, 0], nw)
        for i in range(1, n):
            _step(&tv[rv[i], 0], &ov[i - 1, 0], &ov[i, 0], nw)
    free(seed)
    return out


def reach_boundary(xs, ys):
    cdef Py_ssize_t n = len(xs), h = len(ys)
    cdef Py_ssize_t nw = (h + 63) // 64
    uniq, table = _open_table(ys)
    rows = _column_rows(xs, uniq)
    top = np.zeros(n, dtype=bool)
    col = np.zeros(nw, dtype=np.uint64)
    cdef uint64_t[:, ::1] tv = table
    cdef uint64_t[::1] cv = col
    cdef Py_ssize_t[::1] rv = rows
    cdef uint8_t[::1] topv = top.view(np.uint8)
    cdef Py_ssize_t i, tw = (h - 1) // 64
    cdef int tb = (h - 1) % 64
    cv[0] = 1
    with nogil:
        for i in range(n):
            _step(&tv[rv[i], 0], &cv[0], &cv[0], nw)
            topv[i] = (cv[tw] >> tb) & 1
    right = np.unpackbits(col.view(np.uint8), bitorder="little")[:h].astype(bool)
    return top, right


def reach_corner(xs, ys):
    cdef Py_ssize_t n = len(xs), h = len(ys)
    cdef Py_ssize_t nw = (h + 63) // 64
    uniq, table = _open_table(ys)
    rows = _column_rows(xs, uniq)
    col = np.zeros(nw, dtype=np.uint64)
    cdef uint64_t[:, ::1] tv = table
    cdef uint64_t[::1] cv = col
    cdef Py_ssize_t[::1] rv = rows
    cdef Py_ssize_t i
    cdef bint alive = True
    cv[0] = 1
    with nogil:
        for i in range(n):
            if not _step(&tv[rv[i], 0], &cv[0], &cv[0], nw):
                alive = False
                break
    if not alive:
        return False
    return bool((cv[(h - 1) // 64] >> ((h - 1) % 64)) & 1)


def reach_depth(xs, ys):
    cdef Py_ssize_t n = len(xs), h = len(ys)
    cdef Py_ssize_t nw = (h + 63) // 64
    uniq, table = _open_table(ys)
    rows = _column_rows(xs, uniq)
    col = np.zeros(nw, dtype=np.uint64)
    cdef uint64_t[:, ::1] tv = table
    cdef uint64_t[::1] cv = col
    cdef Py_ssize_t[::1] rv = rows
    cdef Py_ssize_t i, w, best = 0, level
    cv[0] = 1
    with nogil:
        for i in range(n):
            if not _step(&tv[rv[i], 0], &cv[0], &cv[0], nw):
                break
            w = nw - 1
            while cv[w] == 0:
                w -= 1
            level = i + w * 64 + (64 - __builtin_clzll(cv[w]))
            if level > best:
                best = level
    return best


def nonoriented_reaches(xs, ys):
    cdef const int32_t[::1] xv = np.ascontiguousarray(xs, dtype=np.int32)
    cdef const int32_t[::1] yv = np.ascontiguousarray(ys, dtype=np.int32)
    cdef Py_ssize_t n = xv.shape[0], h = yv.shape[0]
    if n == 0 or h == 0 or xv[0] == yv[0]:
        return False
    cdef uint8_t* seen = <uint8_t*> malloc(n * h)
    cdef int32_t* stack = <int32_t*> malloc(2 * n * h * sizeof(int32_t))
    cdef Py_ssize_t top = 0
    cdef int32_t i, j, ni, nj, k
    cdef int di[4]
    cdef int dj[4]
    cdef bint found = False
    di[:] = [1, -1, 0, 0]
    dj[:] = [0, 0, 1, -1]
    memset(seen, 0, n * h)
    with nogil:
        seen[0] = 1
        stack[0] = 0
        stack[1] = 0
        top = 1
        while top > 0:
            top -= 1
            i = stack[2 * top]
            j = stack[2 * top + 1]
            if i == n - 1 or j == h - 1:
                found = True
                break
            for k in range(4):
                ni = i + di[k]
                nj = j + dj[k]
                if ni < 0 or nj < 0 or ni >= n or nj >= h:
                    continue
                if seen[ni * h + nj] or xv[ni] == yv[nj]:
                    continue
                seen[ni * h + nj] = 1
                stack[2 * top] = ni
                stack[2 * top + 1] = nj
                top += 1
    free(seen)
    free(stack)
    return found


def level1_cuts(values, Py_ssize_t min_len, int first_class, int second_class):
    cdef const int32_t[::1] v = np.ascontiguousarray(values, dtype=np.int32)
    cdef Py_ssize_t n = v.shape[0], start = 0, t, count = 0
    out = np.empty(n // max(min_len, 1) + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] ov = out
    with nogil:
        t = start + min_len - 1
        while t + 1 < n:
            if v[t] % 4 == first_class and v[t + 1] % 4 == second_class:
                ov[count] = t
                count += 1
                start = t + 1
                t = start + min_len - 1
            else:
                t += 1
    return out[:count].copy()
