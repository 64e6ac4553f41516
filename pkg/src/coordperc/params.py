"""Model constants, derived length scales and constraint checking.

Two modes are supported.  ``strict`` keeps the exponent structure of the
multi-scale construction tied to ``alpha`` (block length exponent
``alpha - 1``, chunks of ``L**4`` sub-blocks, good runs of ``L**3``,
geometric padding rate ``L**-4``) and enforces the full inequality system.
``relaxed`` decouples those exponents (``p_len``, ``p_chunk``, ``p_run``,
``p_geom``, ``p_cell``) so that levels 1 and 2 fit on a desk.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, fields, replace
from fractions import Fraction
from pathlib import Path

INT64_MAX = 2**63 - 1

STRICT = "strict"
RELAXED = "relaxed"


class ScaleOverflowError(OverflowError):
    """A derived length scale does not fit in a signed 64-bit integer."""


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[str, ...] = ()

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "violations": list(self.violations)}


@dataclass(frozen=True)
class Params:
    alpha: int = 10
    beta: int = 600
    delta: int = 50
    m: int = 60000
    k0: int = 300000
    R: int = 400000
    L0: int = 2
    mode: str = STRICT
    # Generalised exponents; ``None`` means "derive from alpha" (always the
    # case in strict mode).
    p_len: int | None = None
    p_chunk: int | None = None
    p_run: int | None = None
    p_geom: int | None = None
    p_cell: int | None = None

    def __post_init__(self):
        if self.mode not in (STRICT, RELAXED):
            raise ValueError(f"unknown mode {self.mode!r}")
        defaults = {
            "p_len": self.alpha - 1,
            "p_chunk": 4,
            "p_run": 3,
            "p_geom": 4,
            "p_cell": self.alpha - 5,
        }
        for name, value in defaults.items():
            if self.mode == STRICT or getattr(self, name) is None:
                object.__setattr__(self, name, value)

    # -- derived quantities -------------------------------------------------

    def scale(self, j: int) -> int:
        return scale(self, j)

    def m_j(self, j: int) -> Fraction:
        """Tail exponent ``m + 2**-j`` used at level ``j``."""
        return self.m + Fraction(1, 2**j)

    def power(self, j: int, exponent: int) -> int:
        """``L_j ** exponent`` with the same overflow policy as :func:`scale`."""
        base = self.scale(j)
        if exponent < 0:
            raise ValueError("negative exponent")
        if base > 1 and exponent * math.log2(base) >= 63:
            raise ScaleOverflowError(f"L_{j}**{exponent} exceeds int64")
        return base**exponent

    def run_length(self, j: int) -> int:
        return self.power(j, self.p_run)

    def min_length(self, j: int) -> int:
        return self.power(j, self.p_len)

    def chunk_size(self, j: int) -> int:
        return self.power(j, self.p_chunk)

    def geom_rate(self, j: int) -> float:
        return 1.0 / self.power(j, self.p_geom)

    def with_overrides(self, **kw) -> "Params":
        kw = {k: v for k, v in kw.items() if v is not None}
        return replace(self, **kw)

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


def scale(params: Params, j: int) -> int:
    """Return ``L_j = L0 ** (alpha ** j)``.

    Raises :class:`ScaleOverflowError` when the value would not fit in a
    signed 64-bit integer.
    """
    if j < 0:
        raise ValueError("level must be non-negative")
    L0, alpha = params.L0, params.alpha
    if L0 <= 1:
        return L0
    # compare exponents in log space before building the big integer
    if alpha**j * math.log2(L0) >= 63:
        raise ScaleOverflowError(f"L_{j} = {L0}**({alpha}**{j}) exceeds int64")
    value = L0 ** (alpha**j)
    if value > INT64_MAX:  # guards float rounding in the log test
        raise ScaleOverflowError(f"L_{j} exceeds int64")
    return value


def validate(params: Params) -> ValidationReport:
    """Check the parameter inequalities; never raises."""
    p = params
    bad: list[str] = []
    if p.mode == STRICT:
        checks = [
            ("alpha>6", p.alpha > 6),
            ("delta>max(2*alpha,48)", p.delta > max(2 * p.alpha, 48)),
            ("beta>alpha*(delta+1)", p.beta > p.alpha * (p.delta + 1)),
            ("m>9*alpha*beta", p.m > 9 * p.alpha * p.beta),
            ("k0>36*alpha*beta", p.k0 > 36 * p.alpha * p.beta),
            ("R>6*(m+1)", p.R > 6 * (p.m + 1)),
            ("L0>=2", p.L0 >= 2),
        ]
    else:
        checks = [("alpha>=2", p.alpha >= 2), ("L0>=2", p.L0 >= 2)]
        for name in ("beta", "delta", "m", "k0", "R",
                     "p_len", "p_chunk", "p_run", "p_geom", "p_cell"):
            checks.append((f"{name}>=1", getattr(p, name) >= 1))
        # blocks must hold at least one full chunk of sub-blocks
        checks.append(("alpha>=p_chunk", p.alpha >= p.p_chunk))
        checks.append(("p_len>=p_chunk", p.p_len >= p.p_chunk))
    bad = [name for name, holds in checks if not holds]
    return ValidationReport(ok=not bad, violations=tuple(bad))


PRESETS: dict[str, Params] = {
    "headline": Params(),
    "toy": Params(alpha=2, beta=1, delta=1, m=1, k0=2, R=2, L0=2, mode=RELAXED,
                  p_len=2, p_chunk=1, p_run=1, p_geom=2, p_cell=3),
    "relaxed": Params(alpha=3, beta=2, delta=2, m=2, k0=4, R=2, L0=2, mode=RELAXED,
                      p_len=2, p_chunk=1, p_run=1, p_geom=2, p_cell=4),
}

_INT_FIELDS = {f.name for f in fields(Params)} - {"mode"}


def parse_params_text(text: str, base: Params | None = None) -> Params:
    """Parse ``key=value`` lines (``#`` starts a comment).

    A ``preset=<name>`` line selects the starting point; other keys override it.
    """
    values: dict[str, object] = {}
    preset = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if key == "preset":
            preset = value
        elif key == "mode":
            values[key] = value
        elif key in _INT_FIELDS:
            values[key] = int(value)
        else:
            raise ValueError(f"line {lineno}: unknown parameter {key!r}")
    start = PRESETS[preset] if preset else (base or Params())
    return replace(start, **values)


def load_params(path: str | Path, base: Params | None = None) -> Params:
    return parse_params_text(Path(path).read_text(), base)


def dump_params(params: Params) -> str:
    lines = [f"{k}={v}" for k, v in params.to_dict().items()]
    return "\n".join(lines) + "\n"
