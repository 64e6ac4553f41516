"""Delay schedules for two walks read off open oriented paths.

The walks start on ``x[1]`` and ``y[1]``.  A right step of the path moves
the X walk to its next vertex while Y waits, an up step does the reverse.
Moves are numbered from 1; index 0 stands for the starting configuration.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import reachability
from .model import Sequence, Site


class InvalidPathError(ValueError):
    def __init__(self, index: int, reason: str):
        self.index = index
        super().__init__(f"path site {index}: {reason}")


@dataclass(frozen=True)
class Move:
    walk: str  # "X" or "Y"
    vertex: int


@dataclass(frozen=True)
class Schedule:
    moves: tuple[Move, ...]

    def __len__(self) -> int:
        return len(self.moves)

    def counts(self) -> tuple[int, int]:
        nx = sum(m.walk == "X" for m in self.moves)
        return nx, len(self.moves) - nx

    def sites(self) -> list[tuple[int, int]]:
        """Sites visited, reconstructed from move prefix counts."""
        i1, i2 = 1, 1
        out = [(1, 1)]
        for m in self.moves:
            if m.walk == "X":
                i1 += 1
            else:
                i2 += 1
            out.append((i1, i2))
        return out

    def to_text(self) -> str:
        return "".join(f"{m.walk} {m.vertex}\n" for m in self.moves)


@dataclass(frozen=True)
class VerifyResult:
    ok: bool
    index: int | None = None
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def _as_site(s) -> tuple[int, int]:
    if isinstance(s, Site):
        return s.i1, s.i2
    return int(s[0]), int(s[1])


def extract_schedule(path, x: Sequence, y: Sequence) -> Schedule:
    """Schedule following ``path``, a list of sites starting at ``(1, 1)``."""
    sites = [_as_site(s) for s in path]
    if not sites or sites[0] != (1, 1):
        raise InvalidPathError(0, "path must start at (1, 1)")
    moves = []
    for k, (i1, i2) in enumerate(sites):
        if not (1 <= i1 <= len(x) and 1 <= i2 <= len(y)):
            raise InvalidPathError(k, f"site ({i1}, {i2}) outside the sequences")
        if x[i1] == y[i2]:
            raise InvalidPathError(k, f"site ({i1}, {i2}) is closed")
        if k == 0:
            continue
        p1, p2 = sites[k - 1]
        if (i1 - p1, i2 - p2) == (1, 0):
            moves.append(Move("X", x[i1]))
        elif (i1 - p1, i2 - p2) == (0, 1):
            moves.append(Move("Y", y[i2]))
        else:
            raise InvalidPathError(k, f"step ({p1}, {p2}) -> ({i1}, {i2}) is not right/up")
    return Schedule(tuple(moves))


def verify_schedule(s: Schedule, x: Sequence, y: Sequence) -> VerifyResult:
    """Replay the moves; report the first move that collides or disagrees with the walks."""
    i1 = i2 = 1
    if x[1] == y[1]:
        return VerifyResult(False, 0, "walks start on the same vertex")
    for k, m in enumerate(s.moves, 1):
        if m.walk == "X":
            i1 += 1
            if i1 > len(x) or m.vertex != x[i1]:
                return VerifyResult(False, k, "X move does not follow the X walk")
        elif m.walk == "Y":
            i2 += 1
            if i2 > len(y) or m.vertex != y[i2]:
                return VerifyResult(False, k, "Y move does not follow the Y walk")
        else:
            return VerifyResult(False, k, f"unknown walk {m.walk!r}")
        if x[i1] == y[i2]:
            return VerifyResult(False, k, f"collision on vertex {x[i1]}")
    return VerifyResult(True)


def find_path(x: Sequence, y: Sequence, n: int):
    """An open oriented path from ``(1, 1)`` reaching depth ``n``, or None.

    Depth is ``i1 + i2 - 1``; the search stays in the ``n x n`` window.
    """
    rect = reachability.Rect(1, n, 1, n)
    grid = reachability.reach(x, y, rect).grid
    cols, rows = np.nonzero(grid)
    hit = np.flatnonzero(cols + rows + 1 == n)
    if hit.size == 0:
        return None
    c, r = int(cols[hit[0]]), int(rows[hit[0]])
    path = [(c + 1, r + 1)]
    while (c, r) != (0, 0):
        if c > 0 and grid[c - 1, r]:
            c -= 1
        else:
            r -= 1
        path.append((c + 1, r + 1))
    return path[::-1]


def write_schedule(s: Schedule, path: str | Path) -> None:
    Path(path).write_text(s.to_text())


def read_schedule(path: str | Path) -> Schedule:
    moves = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        walk, vertex = line.split()
        if walk not in ("X", "Y"):
            raise ValueError(f"line {lineno}: unknown walk {walk!r}")
        moves.append(Move(walk, int(vertex)))
    return Schedule(tuple(moves))
