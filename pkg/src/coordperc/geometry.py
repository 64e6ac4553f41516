"""Admissible assignments and routes through rectangles of rectangles.

Coordinates: the coarse grid ``A = [a+1, a+t] x [b+1, b+t']`` indexes cells;
cell ``(i1, i2)`` has ``n[i1] x n'[i2]`` sites and ports are given in its
local 1-based coordinates.  Continuous positions along a line use cell
units, column ``i`` covering ``[i-1, i]``.

Every slope verdict is exact: integer cross-multiplication through
:func:`reachability.slope_within`, with exponent ``j + 7/2`` handled by
squaring.
"""
from __future__ import annotations

import bisect
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from .params import Params, ValidationReport
from .reachability import slope_within

CORNER_TO_SIDE, SIDE_TO_CORNER, SIDE_TO_SIDE = "corner_to_side", "side_to_corner", "side_to_side"
R_A_RADIUS = 50


class InfeasibleError(ValueError):
    """Inputs violate a construction's precondition."""


class ConstructionError(RuntimeError):
    """A construction produced an object its validator rejects."""


class ExhaustionError(LookupError):
    """No member of the family avoids the forbidden set."""


def _e2_assign(j: int) -> int:
    return 2 * j + 7  # eps = 2**-(j + 7/2)


def _e2_route(j: int) -> int:
    return 2 * j + 6  # eps = 2**-(j + 3)


def _e2_ratio(j: int) -> int:
    return 2 * j + 8  # eps = 2**-(j + 4)


# -- admissible assignments -------------------------------------------------------

@dataclass(frozen=True)
class Assignment:
    a: int
    t: int
    b: int
    tp: int
    H: tuple[int, ...]
    Hp: tuple[int, ...]
    j: int

    @property
    def I1(self) -> tuple[int, int]:
        return self.a + 1, self.a + self.t

    @property
    def I2(self) -> tuple[int, int]:
        return self.b + 1, self.b + self.tp

    def tau(self, x: int) -> int:
        return self.Hp[self.H.index(x)]

    def tau_inv(self, y: int) -> int:
        return self.H[self.Hp.index(y)]

    def pairs(self) -> list[tuple[int, int]]:
        return list(zip(self.H, self.Hp))

    def to_dict(self) -> dict:
        return {"I1": list(self.I1), "I2": list(self.I2), "H": list(self.H),
                "H'": list(self.Hp), "j": self.j}


def trimmed(lo_base: int, length: int, margin: int) -> tuple[int, int]:
    """``[base + margin + 1, base + length - margin]``."""
    return lo_base + margin + 1, lo_base + length - margin


def validate_assignment(asg: Assignment, B, Bp, params: Params) -> ValidationReport:
    """Conditions (i)-(iii) of an admissible assignment, checked exactly."""
    B, Bp = sorted(set(B)), sorted(set(Bp))
    margin = params.run_length(asg.j)
    bad = []
    H, Hp = list(asg.H), list(asg.Hp)
    if len(H) != len(Hp):
        bad.append("(ii) |H| != |H'|")
    if len(H) != len(B) + len(Bp):
        bad.append("(i) |H| != |B| + |B'|")
    if any(u >= v for u, v in zip(H, H[1:])) or any(u >= v for u, v in zip(Hp, Hp[1:])):
        bad.append("(i) H and H' must be strictly increasing")
    lo1, hi1 = asg.I1
    lo2s, hi2s = trimmed(asg.b, asg.tp, margin)
    if not set(B) <= set(H):
        bad.append("(i) B not contained in H")
    if not set(Bp) <= set(Hp):
        bad.append("(i) B' not contained in H'")
    if any(not lo1 <= x <= hi1 for x in H):
        bad.append("(i) H not inside I1")
    if any(not lo2s <= y <= hi2s for y in Hp):
        bad.append("(i) H' not inside I2*")
    if len(H) == len(Hp):
        images = {y for x, y in zip(H, Hp) if x in set(B)}
        if images & set(Bp):
            bad.append("(ii) tau(B) meets B'")
        A = [asg.a] + H + [asg.a + asg.t + 1]
        Bs = [asg.b] + Hp + [asg.b + asg.tp + 1]
        for i in range(len(A) - 1):
            da, db = A[i + 1] - A[i] - 1, Bs[i + 1] - Bs[i] - 1
            if not slope_within(db, da, params.R, _e2_assign(asg.j)):
                bad.append(f"(iii) gap {i}: {db}/{da} outside slope bounds")
    return ValidationReport(not bad, tuple(bad))


def _place(events, a, t, b, tp, Hs, R, j, lo2s, hi2s):
    """Partners for ``events`` in the given order, or None if none exist.

    Unknowns are the ``h = 0`` partners ``p_k``; every gap at ``h = 0`` and
    ``h = Hs`` is affine in them, so the family is an integer program.  The
    slope window is shrunk by 1e-9 for the float solver and the result is
    re-checked exactly by the caller.  The objective keeps partners near
    the straight line through the rectangle.
    """
    K = len(events)
    if K == 0:
        return []
    eps = 2.0 ** (-(j + 3.5))
    lo, hi = (1 - eps) / R + 1e-9, R * (1 + eps) - 1e-9
    endA, endB = a + t + 1, b + tp + 1
    n_var = 2 * K  # p_k, then |p_k - target_k|
    rows, lbs = [], []

    def point(k, h):
        # (A, B) as (constant, coefficient of p_k)
        _, kind, fixed = events[k]
        if kind == 1:
            return (fixed, 0), (h, 1)
        return (-h, 1), (fixed, 0)

    for h in (0, Hs):
        pts = [(None, (a, 0), (b, 0))] + [(k, *point(k, h)) for k in range(K)] \
            + [(None, (endA, 0), (endB, 0))]
        for (k0, A0, B0), (k1, A1, B1) in zip(pts, pts[1:]):
            da, db = np.zeros(n_var), np.zeros(n_var)
            if k0 is not None:
                da[k0] -= A0[1]
                db[k0] -= B0[1]
            if k1 is not None:
                da[k1] += A1[1]
                db[k1] += B1[1]
            ca, cb = A1[0] - A0[0] - 1, B1[0] - B0[0] - 1
            for v, c in ((da, ca), (db, cb), (db - lo * da, cb - lo * ca), (hi * da - db, hi * ca - cb)):
                rows.append(v)
                lbs.append(-c)
    slope = (tp + 1) / (t + 1)
    lb, ub = np.zeros(n_var), np.full(n_var, np.inf)
    for k, (_, kind, fixed) in enumerate(events):
        if kind == 1:
            lb[k], ub[k] = lo2s, hi2s - Hs
            target = b + (fixed - a) * slope - Hs / 2
        else:
            lb[k], ub[k] = a + 1 + Hs, a + t
            target = a + (fixed - b) / slope + Hs / 2
        for sign in (1, -1):
            v = np.zeros(n_var)
            v[K + k], v[k] = 1, -sign
            rows.append(v)
            lbs.append(-sign * target)
    if np.any(lb > ub):
        return None
    res = milp(np.r_[np.zeros(K), np.ones(K)],
               constraints=LinearConstraint(np.array(rows), lbs, np.inf),
               integrality=np.r_[np.ones(K), np.zeros(K)], bounds=Bounds(lb, ub),
               options={"presolve": False})
    if res.status != 0:
        return None
    return [(kind, fixed, int(round(res.x[k]))) for k, (_, kind, fixed) in enumerate(events)]


def _member(placed, h, a, t, b, tp, j) -> Assignment:
    pairs = sorted((fixed, p + h) if kind else (p - h, fixed) for kind, fixed, p in placed)
    return Assignment(a, t, b, tp, tuple(x for x, _ in pairs), tuple(y for _, y in pairs), j)


def build_assignments(I1: tuple[int, int], I2: tuple[int, int], B, Bp, j: int,
                      params: Params, count: int | None = None,
                      max_orders: int = 256) -> list[Assignment]:
    """A shift family of ``count`` admissible assignments.

    ``count`` defaults to ``L_j**(p_run - 1)``, one factor of ``L_j`` below
    the trimming margin (``L_j**2`` against ``L_j**3`` in strict mode).

    ``I1 = (a, t)`` and ``I2 = (b, t')`` describe ``[a+1, a+t]`` and
    ``[b+1, b+t']``.  Member ``h`` maps ``x in B`` to ``tau_0(x) + h`` and
    takes ``y in B'`` back to ``tau_0^-1(y) - h``.  Every gap length is
    affine in ``h``, so checking ``h = 0`` and the last member covers the
    family.  For a fixed interleaving of ``B`` and ``B'`` the partners solve
    a small integer program; interleavings are tried from the diagonal
    order outwards, swapping close neighbours of opposite kinds.
    """
    a, t = I1
    b, tp = I2
    B, Bp = sorted(set(B)), sorted(set(Bp))
    R = params.R
    margin = params.run_length(j)
    if not slope_within(tp, t, R, _e2_ratio(j)):
        raise InfeasibleError(f"t'/t = {tp}/{t} outside the slope window")
    if len(B) > 3 * params.k0 or len(Bp) > 3 * params.k0:
        raise InfeasibleError("more than 3 k0 marked positions")
    lo1s, hi1s = trimmed(a, t, margin)
    lo2s, hi2s = trimmed(b, tp, margin)
    if any(not lo1s <= x <= hi1s for x in B) or any(not lo2s <= y <= hi2s for y in Bp):
        raise InfeasibleError("B and B' must lie in the trimmed intervals")
    if count is None:
        count = params.power(j, max(params.p_run - 1, 0))
    Hs = count - 1

    # order events along the diagonal, B' first on ties; opposite kinds
    # closer than the shift span may need to swap, so interleavings with
    # such swaps are tried in order of their number
    slope = Fraction(tp + 1, t + 1)
    events = [(Fraction(x - a), 1, x) for x in B]
    events += [(Fraction(y - b) / slope, 0, y) for y in Bp]
    events.sort()
    close = [k for k in range(len(events) - 1)
             if events[k][1] != events[k + 1][1]
             and events[k + 1][0] - events[k][0] <= 2 * (Hs + 2) * R]
    placed, tries = None, 0
    for n_swaps in range(len(close) + 1):
        for swaps in itertools.combinations(close, n_swaps):
            if any(v - u == 1 for u, v in zip(swaps, swaps[1:])):
                continue
            order = list(events)
            for k in swaps:
                order[k], order[k + 1] = order[k + 1], order[k]
            tries += 1
            placed = _place(order, a, t, b, tp, Hs, R, j, lo2s, hi2s)
            if placed is not None and all(
                    validate_assignment(_member(placed, h, a, t, b, tp, j), B, Bp, params).ok
                    for h in {0, Hs}):
                break
            placed = None
            if tries >= max_orders:
                break
        if placed is not None or tries >= max_orders:
            break
    if placed is None:
        raise ConstructionError(f"no shift family of size {count} found in {tries} interleavings")

    return [_member(placed, h, a, t, b, tp, j) for h in range(count)]


def select_avoiding(assignments: list[Assignment], S, params: Params,
                    margin: int | None = None) -> Assignment:
    """First assignment whose pairs all keep sup-norm distance ``>= margin`` from ``S``.

    ``margin`` defaults to ``2 k0 R**3 10**(j+8)``.
    """
    S = [tuple(s) for s in S]
    for asg in assignments:
        m = margin if margin is not None else 2 * params.k0 * params.R ** 3 * 10 ** (asg.j + 8)
        if all(max(abs(x - s1), abs(y - s2)) >= m for x, y in asg.pairs() for s1, s2 in S):
            return asg
    raise ExhaustionError(f"none of {len(assignments)} assignments avoids the forbidden set")


# -- routes ------------------------------------------------------------------------

@dataclass(frozen=True)
class Route:
    cells: tuple[tuple[int, int], ...]
    entries: tuple[tuple[int, int], ...]
    exits: tuple[tuple[int, int], ...]
    n: tuple[int, ...]
    np_: tuple[int, ...]
    j: int
    a: int = 0
    b: int = 0

    @property
    def t(self) -> int:
        return len(self.n)

    @property
    def tp(self) -> int:
        return len(self.np_)

    def dims(self, v: tuple[int, int]) -> tuple[int, int]:
        return self.n[v[0] - self.a - 1], self.np_[v[1] - self.b - 1]

    def section(self, k: int) -> set[int]:
        """Columns of cells in row ``k``."""
        return {v1 for v1, v2 in self.cells if v2 == k}

    def to_dict(self) -> dict:
        return {"j": self.j, "t": self.t, "t'": self.tp, "offset": [self.a, self.b],
                "steps": [{"v": list(v), "entry": list(e), "exit": list(x)}
                          for v, e, x in zip(self.cells, self.entries, self.exits)]}


def _cell_bounds(params: Params, j: int) -> tuple[int, int]:
    L = params.scale(j - 1)
    lo = params.power(j - 1, params.p_cell)
    return lo, lo + L


def _check_cells(n, np_, j: int, params: Params):
    lo, hi = _cell_bounds(params, j)
    for k, v in enumerate(list(n) + list(np_)):
        if not lo <= v <= hi:
            raise InfeasibleError(f"cell size {v} outside [{lo}, {hi}]")


def _clamp(v: int, size: int, L: int) -> int:
    if v <= L:
        return L
    if v >= size - L:
        return size - L
    return v


class _Segment:
    """A segment ``P -> Q`` over a common denominator, for exact crossings."""

    def __init__(self, P, Q):
        self.D = math.lcm(*(q.denominator for q in (*P, *Q)))
        self.X0, self.Y0, X1, Y1 = (int(q * self.D) for q in (*P, *Q))
        self.DX, self.DY = X1 - self.X0, Y1 - self.Y0

    def at_x(self, i: int) -> tuple[int, int]:
        """``Y(i)`` as ``(N, Q)`` with ``Y = N / Q``."""
        return self.Y0 * self.DX + (i * self.D - self.X0) * self.DY, self.D * self.DX

    def at_y(self, i: int) -> tuple[int, int]:
        return self.X0 * self.DY + (i * self.D - self.Y0) * self.DX, self.D * self.DY


def _trace(points, n, np_, L):
    """Cells, entry and exit ports of the route following a monotone polyline.

    ``points[0]`` lies on the lower-left boundary of cell (1, 1) and
    ``points[-1]`` on the upper-right boundary of cell (t, t'), all as
    Fractions in cell units.  Crossings are evaluated in integers.
    """
    t, tp = len(n), len(np_)
    segs = [_Segment(P, Q) for P, Q in zip(points, points[1:])]
    xs = [P[0] for P in points[1:-1]]
    ys = [P[1] for P in points[1:-1]]
    right = {}  # cells leaving through the right side -> y**
    for i in range(1, t):
        N, Q = segs[bisect.bisect_left(xs, i)].at_x(i)
        yi = N // Q + 1
        ystar = (N - (yi - 1) * Q) * np_[yi - 1] // Q + 1
        right[(i, yi)] = _clamp(ystar, np_[yi - 1], L)
    top = {}  # cells leaving through the top -> x**
    for ip in range(1, tp):
        N, Q = segs[bisect.bisect_left(ys, ip)].at_y(ip)
        xi = -(-N // Q)
        xstar = -(-(N - (xi - 1) * Q) * n[xi - 1] // Q)
        top[(xi, ip)] = _clamp(xstar, n[xi - 1], L)
    cells = sorted(set(right) | set(top) | {(t, tp)}, key=lambda v: (v[0] + v[1], v[0]))
    exits = []
    for v in cells:
        if v in right:
            exits.append((n[v[0] - 1], right[v]))
        elif v in top:
            exits.append((top[v], np_[v[1] - 1]))
        else:
            exits.append(None)
    entries = [None]
    for k in range(1, len(cells)):
        e = exits[k - 1]
        entries.append((1, e[1]) if cells[k][0] == cells[k - 1][0] + 1 else (e[0], 1))
    return cells, entries, exits


def _side_point(port, cell_n: int, cell_np: int, origin: tuple[int, int]):
    """Continuous position of a boundary port of the cell whose lower-left corner is ``origin``."""
    k1, k2 = port
    ox, oy = origin
    if k2 == 1 and k1 != 1:
        return Fraction(ox) + Fraction(k1, cell_n), Fraction(oy)
    if k1 == 1 and k2 != 1:
        return Fraction(ox), Fraction(oy) + Fraction(k2, cell_np)
    if k2 == cell_np:
        return Fraction(ox) + Fraction(k1, cell_n), Fraction(oy + 1)
    return Fraction(ox + 1), Fraction(oy) + Fraction(k2, cell_np)


def _route(n, np_, j, params, start=None, end=None, a=0, b=0, via=()) -> Route:
    t, tp = len(n), len(np_)
    L = params.scale(j - 1)
    P0 = (Fraction(0), Fraction(0)) if start is None else _side_point(start, n[0], np_[0], (0, 0))
    if end is None:
        P1 = (Fraction(t), Fraction(tp))
    else:
        k1, k2 = end
        if k2 == np_[-1]:
            P1 = (Fraction(t - 1) + Fraction(k1, n[-1]), Fraction(tp))
        else:
            P1 = (Fraction(t), Fraction(tp - 1) + Fraction(k2, np_[-1]))
    points = [P0, *via, P1]
    if any(not (Q[0] > P[0] and Q[1] > P[1]) for P, Q in zip(points, points[1:])):
        raise InfeasibleError("route polyline is not increasing")
    cells, entries, exits = _trace(points, n, np_, L)
    entries[0] = (1, 1) if start is None else tuple(start)
    exits[-1] = (n[-1], np_[-1]) if end is None else tuple(end)
    return Route(tuple((a + c1, b + c2) for c1, c2 in cells), tuple(entries), tuple(exits),
                 tuple(n), tuple(np_), j, a, b)


def build_cc_route(t: int, tp: int, n, np_, j: int, params: Params) -> Route:
    """Corner-to-corner route along the straight line from ``(0, 0)`` to ``(t, t')``."""
    if j < 1:
        raise InfeasibleError("routes need level j >= 1")
    if len(n) != t or len(np_) != tp:
        raise InfeasibleError("cell dimension lists must have lengths t and t'")
    if not slope_within(tp, t, params.R, _e2_assign(j)):
        raise InfeasibleError(f"t'/t = {tp}/{t} outside the slope window")
    _check_cells(n, np_, j, params)
    route = _route(n, np_, j, params)
    rep = validate_route(route, params)
    if not rep.ok:
        raise ConstructionError(f"route fails validation: {rep.violations[:3]}")
    return route


def build_avoiding_route(t: int, tp: int, n, np_, j: int, params: Params, forbidden,
                         tries: int = 64, seed: int = 0) -> Route:
    """Corner-to-corner route whose cells avoid ``forbidden``.

    The straight line is tried first, then ``tries`` polylines with one
    random kink displaced from the diagonal (seeded by ``seed``).  The first
    candidate that validates and misses ``forbidden`` is returned.
    """
    if len(n) != t or len(np_) != tp:
        raise InfeasibleError("cell dimension lists must have lengths t and t'")
    if not slope_within(tp, t, params.R, _e2_assign(j)):
        raise InfeasibleError(f"t'/t = {tp}/{t} outside the slope window")
    _check_cells(n, np_, j, params)
    forbidden = {tuple(v) for v in forbidden}
    rng = np.random.default_rng(seed)
    reach = max(1, min(t, tp) // 4)
    for k in range(tries + 1):
        via = ()
        if k:
            x = Fraction(int(rng.integers(1, 64)), 64)
            d = Fraction(int(rng.integers(-reach * 8, reach * 8 + 1)), 8)
            via = ((x * t - d, x * tp + d),)
            if not (0 < via[0][0] < t and 0 < via[0][1] < tp):
                continue
        try:
            r = _route(n, np_, j, params, via=via)
        except InfeasibleError:
            continue
        if forbidden.isdisjoint(r.cells) and validate_route(r, params).ok:
            return r
    raise ExhaustionError(f"no route among {tries + 1} candidates avoids the forbidden cells")


def side_ports(n_cell: int, np_cell: int, L: int, side: str) -> list[tuple[int, int]]:
    """``S_in`` (side="in", lower-left sides) or ``S_out`` (upper-right sides)."""
    if side == "in":
        return [(k, 1) for k in range(L, n_cell - L + 1)] + \
               [(1, k) for k in range(L, np_cell - L + 1)]
    return [(k, np_cell) for k in range(L, n_cell - L + 1)] + \
           [(n_cell, k) for k in range(L, np_cell - L + 1)]


def build_connection(kind: str, n, np_, j: int, params: Params,
                     min_side: int | None = None) -> dict:
    """Admissible connection: one route per required port or port pair.

    ``min_side`` defaults to ``5**(j+6) R``.  Keys are ``end`` ports
    (corner_to_side), ``start`` ports (side_to_corner) or ``(start, end)``.
    """
    t, tp = len(n), len(np_)
    threshold = 5 ** (j + 6) * params.R if min_side is None else min_side
    if t < threshold or tp < threshold:
        raise InfeasibleError(f"t, t' must be >= {threshold}")
    if not slope_within(tp, t, params.R, _e2_assign(j)):
        raise InfeasibleError(f"t'/t = {tp}/{t} outside the slope window")
    _check_cells(n, np_, j, params)
    L = params.scale(j - 1)
    s_in = side_ports(n[0], np_[0], L, "in")
    s_out = side_ports(n[-1], np_[-1], L, "out")
    if kind == CORNER_TO_SIDE:
        jobs = [(e, None, e) for e in s_out]
    elif kind == SIDE_TO_CORNER:
        jobs = [(s, s, None) for s in s_in]
    elif kind == SIDE_TO_SIDE:
        jobs = [((s, e), s, e) for s in s_in for e in s_out]
    else:
        raise ValueError(f"unknown connection kind {kind!r}")
    family = {}
    for key, start, end in jobs:
        r = _route(n, np_, j, params, start, end)
        rep = validate_route(r, params)
        if not rep.ok:
            raise ConstructionError(f"route {key} fails validation: {rep.violations[:3]}")
        family[key] = r
    return family


def validate_route(r: Route, params: Params) -> ValidationReport:
    """Conditions (i)-(iv) of a route; (iv) also checks that the shared
    coordinate lies on the side crossed by the step."""
    bad = []
    L = params.scale(r.j - 1)
    e2 = _e2_route(r.j)
    if not r.cells:
        return ValidationReport(False, ("(i) empty route",))
    if r.cells[0] != (r.a + 1, r.b + 1) or r.cells[-1] != (r.a + r.t, r.b + r.tp):
        bad.append("(i) route must run from (a+1, b+1) to (a+t, b+t')")
    for k in range(1, len(r.cells)):
        step = (r.cells[k][0] - r.cells[k - 1][0], r.cells[k][1] - r.cells[k - 1][1])
        if step not in ((1, 0), (0, 1)):
            bad.append(f"(i) step {k} is {step}")
    last = len(r.cells) - 1
    for k, (v, e, x) in enumerate(zip(r.cells, r.entries, r.exits)):
        try:
            nv, npv = r.dims(v)
        except IndexError:
            bad.append(f"(i) cell {v} outside the grid")
            continue
        on_entry = (e[1] == 1 and L <= e[0] <= nv - L) or (e[0] == 1 and L <= e[1] <= npv - L)
        if not (on_entry or (k == 0 and e == (1, 1))):
            bad.append(f"(ii) entry port {e} of cell {v}")
        on_exit = (x[1] == npv and L <= x[0] <= nv - L) or (x[0] == nv and L <= x[1] <= npv - L)
        if not (on_exit or (k == last and x == (nv, npv))):
            bad.append(f"(ii) exit port {x} of cell {v}")
        if not slope_within(x[1] - e[1], x[0] - e[0], params.R, e2):
            bad.append(f"(iii) slope {x[1] - e[1]}/{x[0] - e[0]} in cell {v}")
        if k < last:
            nxt = r.entries[k + 1]
            step = (r.cells[k + 1][0] - v[0], r.cells[k + 1][1] - v[1])
            if step == (1, 0) and not (x[0] == nv and nxt[0] == 1 and x[1] == nxt[1]):
                bad.append(f"(iv) ports across the right side of cell {v}")
            elif step == (0, 1) and not (x[1] == npv and nxt[1] == 1 and x[0] == nxt[0]):
                bad.append(f"(iv) ports across the top side of cell {v}")
    return ValidationReport(not bad, tuple(bad))


def within_band(r: Route, radius: int = R_A_RADIUS) -> bool:
    """Every cell lies within L1 distance ``radius`` of the segment ``(a,b) -> (a+t, b+t')``."""
    t, tp = r.t, r.tp
    for v1, v2 in r.cells:
        p1, p2 = v1 - r.a, v2 - r.b
        # L1 distance to the segment {(xt, xt') : x in [0, 1]} is piecewise linear
        # in x with kinks at p1/t and p2/t'; its minimum sits at one of them
        # candidates x = u / w, compared after scaling by w
        cands = [(0, 1), (1, 1), (min(p1, t), t), (min(p2, tp), tp)]
        if all(abs(p1 * w - u * t) + abs(p2 * w - u * tp) > radius * w for u, w in cands):
            return False
    return True
