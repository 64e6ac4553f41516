"""Walk-step sequences, the open/closed site predicate and sequence I/O.

Sites are 1-based: ``(i1, i2)`` pairs the ``i1``-th step of the X walk with
the ``i2``-th step of the Y walk, and is closed when both walks would sit on
the same vertex.

Random sequences come from numpy's ``Philox4x64`` counter-based generator
keyed by ``seed + (role_id << 64)`` (role X -> 0, Y -> 1).  Each raw 64-bit
word ``u`` becomes the symbol ``1 + (((u >> 32) * M) >> 32)``.  Only the raw
bit stream is used, so the output is fixed by the Philox algorithm and not
by numpy's distribution code.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

GENERATOR_NAME = "philox4x64-raw/v1"
ROLES = ("X", "Y")


class DomainError(ValueError):
    """An argument lies outside the model's domain."""


@dataclass(frozen=True)
class Site:
    i1: int
    i2: int

    def __post_init__(self):
        if self.i1 < 1 or self.i2 < 1:
            raise DomainError(f"sites are 1-based, got ({self.i1}, {self.i2})")


@dataclass(frozen=True, eq=False)
class Sequence:
    """A finite word over ``{1..M}``; ``items`` is a read-only int32 array."""

    M: int
    items: np.ndarray
    role: str = "X"

    def __post_init__(self):
        if self.M < 3:
            raise DomainError(f"alphabet size must be >= 3, got {self.M}")
        if self.role not in ROLES:
            raise DomainError(f"role must be X or Y, got {self.role!r}")
        arr = np.asarray(self.items, dtype=np.int32)
        if arr.ndim != 1:
            raise DomainError("sequence items must be one-dimensional")
        if arr.size and (arr.min() < 1 or arr.max() > self.M):
            raise DomainError(f"items must lie in [1, {self.M}]")
        arr = arr.copy()
        arr.flags.writeable = False
        object.__setattr__(self, "items", arr)

    def __len__(self) -> int:
        return int(self.items.size)

    def __getitem__(self, i: int) -> int:
        """1-based symbol access."""
        if not 1 <= i <= self.items.size:
            raise IndexError(f"index {i} outside [1, {self.items.size}]")
        return int(self.items[i - 1])

    def __eq__(self, other) -> bool:
        if not isinstance(other, Sequence):
            return NotImplemented
        return (self.M == other.M and self.role == other.role
                and np.array_equal(self.items, other.items))

    def __hash__(self):
        return hash((self.M, self.role, self.items.tobytes()))

    def window(self, lo: int, hi: int) -> np.ndarray:
        """Symbols at 1-based positions ``lo..hi`` inclusive."""
        if lo < 1 or hi > self.items.size or lo > hi + 1:
            raise IndexError(f"window [{lo}, {hi}] outside [1, {self.items.size}]")
        return self.items[lo - 1:hi]

    def coarsen(self, M: int) -> "Sequence":
        """Map onto a smaller alphabet ``M`` dividing ``self.M``.

        Equal fine symbols stay equal, so a site that is open after
        coarsening is open at the fine alphabet too.
        """
        if self.M % M:
            raise DomainError(f"{M} does not divide {self.M}")
        factor = self.M // M
        return Sequence(M, (self.items - 1) // factor + 1, self.role)

    def to_list(self) -> list[int]:
        return self.items.tolist()


def is_open(x: Sequence, y: Sequence, s: Site) -> bool:
    """True iff ``x[s.i1] != y[s.i2]``."""
    return x[s.i1] != y[s.i2]


def _philox(seed: int, role: str) -> np.random.Philox:
    if role not in ROLES:
        raise DomainError(f"role must be X or Y, got {role!r}")
    key = (seed % 2**64) + (ROLES.index(role) << 64)
    return np.random.Philox(key=key)


def symbols_from_raw(raw: np.ndarray, M: int) -> np.ndarray:
    hi = raw >> np.uint64(32)
    return ((hi * np.uint64(M)) >> np.uint64(32)).astype(np.int32) + 1


def generate(M: int, n: int, seed: int, role: str = "X") -> Sequence:
    """``n`` i.i.d. uniform symbols on ``{1..M}``, reproducible from the seed."""
    if M < 3:
        raise DomainError(f"alphabet size must be >= 3, got {M}")
    if M >= 2**32:
        raise DomainError("alphabet size must be < 2**32")
    if n < 1:
        raise DomainError(f"length must be >= 1, got {n}")
    raw = _philox(seed, role).random_raw(n)
    return Sequence(M, symbols_from_raw(np.asarray(raw, dtype=np.uint64), M), role)


def random_symbols(rng: np.random.Generator, M: int, n: int) -> np.ndarray:
    """Uniform symbols drawn from an existing generator (Monte Carlo use)."""
    return rng.integers(1, M + 1, size=n, dtype=np.int32)


# -- file formats -------------------------------------------------------------

def write_text(seq: Sequence, path: str | Path) -> None:
    body = " ".join(map(str, seq.to_list()))
    Path(path).write_text(f"M={seq.M} n={len(seq)}\n{body}\n")


def read_text(path: str | Path, role: str = "X") -> Sequence:
    text = Path(path).read_text()
    header, _, body = text.partition("\n")
    fields = dict(part.split("=", 1) for part in header.split())
    try:
        M, n = int(fields["M"]), int(fields["n"])
    except (KeyError, ValueError) as exc:
        raise DomainError(f"bad sequence header {header!r}") from exc
    items = np.array(body.split(), dtype=np.int64)
    if items.size != n:
        raise DomainError(f"header says n={n} but found {items.size} items")
    return Sequence(M, items, role)


def write_binary(seq: Sequence, path: str | Path) -> None:
    header = struct.pack("<II", seq.M, len(seq))
    Path(path).write_bytes(header + seq.items.astype("<u4").tobytes())


def read_binary(path: str | Path, role: str = "X") -> Sequence:
    data = Path(path).read_bytes()
    if len(data) < 8:
        raise DomainError("binary sequence file too short")
    M, n = struct.unpack("<II", data[:8])
    items = np.frombuffer(data[8:], dtype="<u4")
    if items.size != n:
        raise DomainError(f"header says n={n} but found {items.size} items")
    return Sequence(M, items.astype(np.int64), role)


def read_sequence(path: str | Path, role: str = "X") -> Sequence:
    """Read either format, sniffing the text header."""
    head = Path(path).read_bytes()[:2]
    if head == b"M=":
        return read_text(path, role)
    return read_binary(path, role)
