"""Command line interface.

Every subcommand writes one result payload (JSON, JSON lines or CSV) to
``--out`` or stdout.  With ``--out`` a manifest ``<out>.manifest.json``
records the resolved arguments, parameters and seeds; :func:`replay`
re-runs it and the payload comes out byte-identical.

Exit codes: 0 success, 2 domain or validation error, 3 infeasible or
undecided, 64 usage error, 1 internal fault.  Errors are reported on stderr as one JSON object.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import geometry, model, montecarlo, multiscale, reachability, scheduler
from .params import PRESETS, Params, ScaleOverflowError, load_params, validate

VERSION = "0.1.0"
EXIT_OK, EXIT_DOMAIN, EXIT_INFEASIBLE, EXIT_USAGE = 0, 2, 3, 64

_OVERRIDES = [("alpha", int), ("beta", int), ("delta", int), ("m", int), ("k0", int),
              ("R", int), ("L0", int), ("mode", str), ("p_len", int), ("p_chunk", int),
              ("p_run", int), ("p_geom", int), ("p_cell", int)]
_PATH_ARGS = ("x", "y", "seq", "cells", "params")

DOMAIN_ERRORS = (model.DomainError, reachability.BoundsError, reachability.ChunkError,
                 multiscale.MeaninglessRunError, ScaleOverflowError, ValueError,
                 FileNotFoundError)
INFEASIBLE_ERRORS = (geometry.InfeasibleError, geometry.ConstructionError,
                     geometry.ExhaustionError, multiscale.SamplingBudgetError)


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, default=_jsonable)


def _jsonable(o):
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def resolve_params(args) -> Params:
    base = PRESETS[args.preset]
    p = load_params(args.params, base) if args.params else base
    return p.with_overrides(**{name: getattr(args, name) for name, _ in _OVERRIDES})


# -- subcommands ------------------------------------------------------------------

def cmd_params_validate(args, params):
    rep = validate(params)
    scales = {}
    for j in range(0, 4):
        try:
            scales[f"L{j}"] = params.scale(j)
        except ScaleOverflowError:
            scales[f"L{j}"] = "overflow"
            break
    out = {"params": params.to_dict(), "report": rep.to_dict(), "scales": scales}
    return _dumps(out) + "\n", EXIT_OK if rep.ok else EXIT_DOMAIN


def _read_pair(args):
    return model.read_sequence(args.x, "X"), model.read_sequence(args.y, "Y")


def cmd_percolate(args, params):
    x, y = _read_pair(args)
    rect = (reachability.Rect.parse(args.rect) if args.rect
            else reachability.Rect(1, len(x), 1, len(y)))
    rect.check_within(x, y)
    out = {"query": args.query, "rect": [rect.a1, rect.a2, rect.b1, rect.b2]}
    if args.query == "cc":
        out["verdict"] = reachability.cc_connected(x, y, rect)
    elif args.query == "depth":
        n = args.n or min(len(x), len(y))
        out["n"] = n
        out["depth"] = reachability.survival_depth(x, y, n)
    elif args.query == "nonoriented":
        n = args.n or min(len(x), len(y))
        out["n"] = n
        out["verdict"] = reachability.non_oriented_reaches(x, y, n)
    else:
        # the windows are read as level-1 blocks over single-symbol sub-blocks
        xb = multiscale.Block(1, "X", rect.a1, x.window(rect.a1, rect.a2), 0)
        yb = multiscale.Block(1, "Y", rect.b1, y.window(rect.b1, rect.b2), 0)
        fn = {"cs": reachability.cs_connected, "sc": reachability.sc_connected,
              "ss": reachability.ss_connected}[args.query]
        out["j"] = 1
        out["verdict"] = fn(xb, yb, 1, params)
    return _dumps(out) + "\n", EXIT_OK


def cmd_survive(args, params):
    depths = [int(d) for d in args.depths.split(",")]
    rows = montecarlo.survival_curve(args.M, depths, args.trials, args.seed, args.workers)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "point", "ci_low", "ci_high", "trials", "seed"])
    for n, e in rows:
        w.writerow([n, repr(e.point), repr(e.ci_low), repr(e.ci_high), e.trials, e.master_seed])
    return buf.getvalue(), EXIT_OK


def _mc(args) -> multiscale.MCConfig:
    return multiscale.MCConfig(samples=args.samples, seed=args.seed,
                               force_point_estimate=args.force_point_estimate,
                               workers=args.workers)


def cmd_blocks(args, params):
    if args.seq:
        seq = model.read_sequence(args.seq, args.role)
    else:
        if args.M is None or args.n is None:
            raise ValueError("give --seq or both --M and --n")
        seq = model.generate(args.M, args.n, args.seed, args.role)
    part = multiscale.build_level1(seq, params, args.role)
    oracle = multiscale.GoodnessOracle(params, _mc(args), seq.M)
    for level in range(1, args.level):
        part = multiscale.build_next_level(part, oracle, params, [args.seed, level])
    out = part.to_dict()
    out["tiles"] = part.tiles()
    return _dumps(out) + "\n", EXIT_OK


def cmd_goodness(args, params):
    mc = _mc(args)
    oracle = multiscale.GoodnessOracle(params, mc, args.M)
    rng = np.random.default_rng(args.seed)
    lines, undecided = [], False
    for k in range(args.count):
        b = multiscale.sample_block(args.level, multiscale.MU, params, rng, M=args.M,
                                    role=args.role, goodness=oracle)
        v = oracle.verdict(b)
        undecided |= v.overall == "undecided"
        rec = {"index": k, "block": b.to_dict(), "verdict": v.to_dict()}
        lines.append(_dumps(rec))
    return "".join(line + "\n" for line in lines), EXIT_INFEASIBLE if undecided else EXIT_OK


def _read_cells(path) -> tuple[list[int], list[int]]:
    """``{"n": [...], "n'": [...]}`` or two lines of integers."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        d = json.loads(text)
        return [int(v) for v in d["n"]], [int(v) for v in d["n'"]]
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if len(lines) != 2:
        raise ValueError("cells file needs two lines: n_1..n_t and n'_1..n'_t'")
    return [int(v) for v in lines[0].split()], [int(v) for v in lines[1].split()]


def cmd_route(args, params):
    n, np_ = _read_cells(args.cells)
    if len(n) != args.t or len(np_) != args.tprime:
        raise ValueError("cells file does not match --t/--tprime")
    out = {"kind": args.kind, "j": args.j, "t": args.t, "t'": args.tprime}
    if args.kind == "cc":
        routes = [(None, geometry.build_cc_route(args.t, args.tprime, n, np_, args.j, params))]
    else:
        kind = {"cs": geometry.CORNER_TO_SIDE, "sc": geometry.SIDE_TO_CORNER,
                "ss": geometry.SIDE_TO_SIDE}[args.kind]
        routes = list(geometry.build_connection(kind, n, np_, args.j, params,
                                                args.min_side).items())
    out["routes"] = [dict(r.to_dict(), port=key) for key, r in routes]
    out["in_band"] = all(geometry.within_band(r) for _, r in routes)
    return _dumps(out) + "\n", EXIT_OK


def cmd_schedule(args, params):
    x, y = _read_pair(args)
    n = args.n
    if n > min(len(x), len(y)):
        raise ValueError(f"--n {n} exceeds the sequence lengths")
    path = scheduler.find_path(x, y, n)
    if path is None:
        return f"BLOCKED {reachability.survival_depth(x, y, n)}\n", EXIT_OK
    s = scheduler.extract_schedule(path, x, y)
    return s.to_text(), EXIT_OK


def cmd_check_estimates(args, params):
    res = multiscale.check_recursive_estimates(args.level, args.ensemble, params, M=args.M,
                                               mc=_mc(args), seed=args.seed)
    return _dumps(res) + "\n", EXIT_OK


COMMANDS = {
    "percolate": cmd_percolate, "survive": cmd_survive, "blocks": cmd_blocks,
    "goodness": cmd_goodness, "route": cmd_route, "schedule": cmd_schedule,
    "check-estimates": cmd_check_estimates, "params-validate": cmd_params_validate,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    g = common.add_argument_group("global")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--params", help="key=value parameter file")
    g.add_argument("--preset", choices=sorted(PRESETS), default="headline")
    g.add_argument("--out", help="result file (default stdout)")
    g.add_argument("--workers", type=int, default=1)
    g.add_argument("--force-point-estimate", action="store_true")
    for name, typ in _OVERRIDES:
        g.add_argument("--" + name.replace("_", "-"), dest=name, type=typ, default=None)

    p = _Parser(prog="coordperc", description="coordinate percolation toolkit")
    p.add_argument("--version", action="version", version=VERSION)
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("params-validate", parents=[common])

    s = sub.add_parser("percolate", parents=[common])
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--rect", help="a1,a2,b1,b2 (default: whole sequences)")
    s.add_argument("--query", required=True,
                   choices=["cc", "cs", "sc", "ss", "depth", "nonoriented"])
    s.add_argument("--n", type=int)

    s = sub.add_parser("survive", parents=[common])
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--depths", required=True)
    s.add_argument("--trials", type=int, required=True)

    s = sub.add_parser("blocks", parents=[common])
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--seq")
    s.add_argument("--M", type=int)
    s.add_argument("--n", type=int)
    s.add_argument("--role", choices=["X", "Y"], default="X")
    s.add_argument("--samples", type=int, default=200)

    s = sub.add_parser("goodness", parents=[common])
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--count", type=int, default=1)
    s.add_argument("--role", choices=["X", "Y"], default="X")
    s.add_argument("--samples", type=int, default=200)

    s = sub.add_parser("route", parents=[common])
    s.add_argument("--t", type=int, required=True)
    s.add_argument("--tprime", type=int, required=True)
    s.add_argument("--cells", required=True)
    s.add_argument("--j", type=int, default=1)
    s.add_argument("--kind", choices=["cc", "cs", "sc", "ss"], default="cc")
    s.add_argument("--min-side", type=int, default=None)

    s = sub.add_parser("schedule", parents=[common])
    s.add_argument("--x", required=True)
    s.add_argument("--y", required=True)
    s.add_argument("--n", type=int, required=True)

    s = sub.add_parser("check-estimates", parents=[common])
    s.add_argument("--level", type=int, default=1)
    s.add_argument("--ensemble", type=int, default=50)
    s.add_argument("--M", type=int, required=True)
    s.add_argument("--samples", type=int, default=200)
    return p


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def execute(args) -> tuple[str, int]:
    """Run a parsed command; returns the payload and exit code."""
    params = resolve_params(args)
    return COMMANDS[args.command](args, params)


def _emit(args, payload: str, started: str) -> None:
    if not args.out:
        sys.stdout.write(payload)
        return
    out = Path(args.out)
    out.write_text(payload)
    resolved = {k: v for k, v in vars(args).items() if k != "out"}
    manifest = {
        "subcommand": args.command,
        "args": resolved,
        "params": resolve_params(args).to_dict(),
        "seed": args.seed,
        "version": VERSION,
        "started": started,
        "finished": _now(),
        "result_sha256": hashlib.sha256(payload.encode()).hexdigest(),
    }
    Path(str(out) + ".manifest.json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _error(exc: BaseException, code: int) -> int:
    sys.stderr.write(json.dumps({"error": type(exc).__name__, "message": str(exc),
                                 "exit": code}) + "\n")
    return code


def run(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return _error(exc, EXIT_USAGE)
    for name in _PATH_ARGS:
        if getattr(args, name, None):
            setattr(args, name, str(Path(getattr(args, name)).resolve()))
    started = _now()
    try:
        payload, code = execute(args)
    except INFEASIBLE_ERRORS as exc:
        return _error(exc, EXIT_INFEASIBLE)
    except DOMAIN_ERRORS as exc:
        return _error(exc, EXIT_DOMAIN)
    except Exception as exc:  # internal fault; still report it as JSON
        return _error(exc, 1)
    _emit(args, payload, started)
    return code


def replay(manifest_path, out=None) -> tuple[str, bool]:
    """Re-run a manifest; returns the payload and whether its hash matches."""
    manifest = json.loads(Path(manifest_path).read_text())
    args = argparse.Namespace(**manifest["args"], out=None)
    payload, _ = execute(args)
    if out is not None:
        Path(out).write_text(payload)
    return payload, hashlib.sha256(payload.encode()).hexdigest() == manifest["result_sha256"]


def main() -> None:
    sys.exit(run())
