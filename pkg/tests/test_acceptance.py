"""The eleven acceptance criteria, each at its stated scale and tolerance.

Every criterion prints one ``PASS``/``FAIL`` line; the lines are repeated in
the pytest terminal summary.  Run as a script for the lines alone.
"""
from __future__ import annotations

import math
import os
import tempfile
import time
from pathlib import Path

import numpy as np
import pytest

import clicases
import gen
import oracles
from coordperc.cli import replay, run
from coordperc.geometry import (
    ExhaustionError,
    build_assignments,
    build_cc_route,
    select_avoiding,
    validate_assignment,
    validate_route,
    within_band,
)
from coordperc.model import generate
from coordperc.montecarlo import coupled_survival, non_oriented_estimate, survival_curve
from coordperc.multiscale import build_level1, build_next_level, length_mgf, sample_level1, tail_check
from coordperc.params import PRESETS
from coordperc.reachability import Rect, cc_connected
from coordperc.scheduler import Move, Schedule, extract_schedule, find_path, verify_schedule

WORKERS = min(8, os.cpu_count() or 1)
RESULTS: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (ok, detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


# 1 -----------------------------------------------------------------------------

def criterion_1(windows=2000):
    rng = np.random.default_rng(1)
    x, y = generate(3, 200, 11), generate(3, 200, 11, "Y")
    xs, ys = x.to_list(), y.to_list()
    mismatches, t0 = 0, time.perf_counter()
    for _ in range(windows):
        w = int(rng.integers(1, 17))
        h = int(rng.integers(1, 18 - w))  # (w - 1) + (h - 1) <= 16
        a1, b1 = (int(v) for v in rng.integers(1, 200 - 17, 2))
        got = cc_connected(x, y, Rect(a1, a1 + w - 1, b1, b1 + h - 1))
        mismatches += got != oracles.path_exists(xs[a1 - 1:a1 - 1 + w], ys[b1 - 1:b1 - 1 + h])
    dt = time.perf_counter() - t0
    return mismatches == 0 and dt < 10, f"{windows} windows, {mismatches} mismatches, {dt:.1f}s"


# 2 -----------------------------------------------------------------------------

def _replay_index(moves, xs, ys):
    i = j = 0
    for k, m in enumerate(moves, 1):
        if m.walk == "X":
            i += 1
            if i >= len(xs) or xs[i] != m.vertex:
                return k
        else:
            j += 1
            if j >= len(ys) or ys[j] != m.vertex:
                return k
        if xs[i] == ys[j]:
            return k
    return None


def criterion_2(instances=1000):
    rng = np.random.default_rng(2)
    done = seed = bad_round = bad_mutant = 0
    while done < instances:
        seed += 1
        n = int(rng.integers(2, 65))
        M = int(rng.integers(4, 12))
        x, y = generate(M, n, seed), generate(M, n, seed, "Y")
        path = find_path(x, y, n)
        if path is None:
            continue
        done += 1
        s = extract_schedule(path, x, y)
        bad_round += not verify_schedule(s, x, y)
        if not s.moves:
            continue
        moves = list(s.moves)
        k = int(rng.integers(0, len(moves)))
        kind = int(rng.integers(0, 3))
        if kind == 0:  # a wrong vertex always fails at its own index
            moves[k] = Move(moves[k].walk, 1 + moves[k].vertex % M)
            expect = k + 1
        else:
            if kind == 1 and k + 1 < len(moves):
                moves[k], moves[k + 1] = moves[k + 1], moves[k]
            else:
                moves[k] = Move("Y" if moves[k].walk == "X" else "X", moves[k].vertex)
            expect = _replay_index(moves, x.to_list(), y.to_list())
        r = verify_schedule(Schedule(tuple(moves)), x, y)
        bad_mutant += r.index != expect
    ok = bad_round == 0 and bad_mutant == 0
    return ok, f"{done} instances, {bad_round} round-trip failures, {bad_mutant} mutant disagreements"


# 3 and 4 -------------------------------------------------------------------------

_LEVEL1 = {}


def _level1_samples(n=10**5):
    if "T" not in _LEVEL1:
        t0 = time.perf_counter()
        rng = np.random.default_rng(3)
        blocks = [sample_level1(rng, 100, 10, "X") for _ in range(n)]
        _LEVEL1["T"] = np.array([b.T for b in blocks])
        _LEVEL1["len"] = np.array([b.length for b in blocks])
        _LEVEL1["seconds"] = time.perf_counter() - t0
    return _LEVEL1


def criterion_3():
    t0 = time.perf_counter()
    rows = tail_check(_level1_samples()["T"], [1, 3, 5, 9])
    dt = time.perf_counter() - t0 + _LEVEL1["seconds"]
    cells = ", ".join(f"l={r['l']}: {r['empirical']:.4f}<={r['bound']:.4f}+3s" for r in rows)
    return all(r["ok"] for r in rows) and dt < 60, f"{cells} ({dt:.1f}s)"


def criterion_4():
    # L_1 = 10 at level 1 means L_0 = sqrt(10) for alpha = 2
    mgf = length_mgf(_level1_samples()["len"], math.sqrt(10), 10, 1)
    return mgf <= 1.05, f"mean exp(L0^-6 (|X| - 1.5 L1)) = {mgf:.5f} <= 1.05"


# 5, 6, 7 -------------------------------------------------------------------------

def criterion_5(trials=1000):
    e4s, e4l = (non_oriented_estimate(4, n, trials, 5, WORKERS) for n in (256, 1024))
    e3s, e3l = (non_oriented_estimate(3, n, trials, 6, WORKERS) for n in (256, 1024))
    no_collapse = abs(e4s.point - e4l.point) < e4s.half_width + e4l.half_width + 0.05
    decay = e3l.point < e3s.point / 2
    detail = (f"M=4: {e4s.point:.3f} vs {e4l.point:.3f}; "
              f"M=3: {e3s.point:.3f} -> {e3l.point:.3f}")
    return no_collapse and decay, detail


def criterion_6(trials=10**4):
    rows = survival_curve(3, [50, 100, 200], trials, 7, WORKERS)
    es = [e for _, e in rows]
    ok = all(a.point > b.point and a.ci_low > b.ci_high for a, b in zip(es, es[1:]))
    detail = ", ".join(f"n={n}: {e.point:.4f} [{e.ci_low:.4f}, {e.ci_high:.4f}]" for n, e in rows)
    return ok, detail


def criterion_7(trials=4000):
    rows = coupled_survival([4, 8, 16, 64], 100, trials, 8, WORKERS)
    es = [e for _, e in rows]
    ok = all(b.point >= a.point or b.ci_high >= a.ci_low for a, b in zip(es, es[1:]))
    return ok, ", ".join(f"M={M}: {e.point:.4f}" for M, e in rows)


# 8 -----------------------------------------------------------------------------

def criterion_8(inputs=10**4):
    rng = np.random.default_rng(9)
    P = gen.ROUTE_PARAMS
    invalid = outside = disagree = 0
    for _ in range(inputs):
        t, tp, n, np_, j = gen.route_input(rng)
        r = build_cc_route(t, tp, n, np_, j, P)
        invalid += not validate_route(r, P).ok
        outside += not within_band(r)
        # the integer slope verdict must match an exact rational re-evaluation
        for e, x in zip(r.entries, r.exits):
            disagree += not oracles.slope_ok(x[1] - e[1], x[0] - e[0], P.R, 2 * j + 6)
    ok = invalid == outside == disagree == 0
    return ok, f"{inputs} routes, {invalid} invalid, {outside} outside band, {disagree} slope disagreements"


# 9 -----------------------------------------------------------------------------

def criterion_9(inputs=1000, margin=3):
    rng = np.random.default_rng(10)
    P = gen.ASSIGN_PARAMS
    bad = shifts = distance = exhausted = 0
    for _ in range(inputs):
        I1, I2, B, Bp, j = gen.assignment_input(rng)
        fam = build_assignments(I1, I2, B, Bp, j, P)
        first = fam[0]
        for h, a in enumerate(fam):
            bad += bool(gen.check_assignment(a, B, Bp, P)) or not validate_assignment(a, B, Bp, P).ok
            shifts += any(a.tau(x) != first.tau(x) + h for x in B)
            shifts += any(a.tau_inv(y) != first.tau_inv(y) - h for y in Bp)
        # forbidden points near the pair tracks of random members
        k = int(rng.integers(0, P.k0 + 1))
        S = []
        for _ in range(k):
            member = fam[int(rng.integers(0, len(fam)))]
            pairs = member.pairs() or [(I1[0] + 1, I2[0] + 1)]
            px, py = pairs[int(rng.integers(0, len(pairs)))]
            S.append((px + int(rng.integers(-2, 3)), py + int(rng.integers(-2, 3))))

        def dist_ok(a):
            return all(max(abs(x - s1), abs(y - s2)) >= margin for x, y in a.pairs() for s1, s2 in S)

        try:
            chosen = select_avoiding(fam, S, P, margin=margin)
            distance += not dist_ok(chosen)
        except ExhaustionError:
            exhausted += 1
            distance += any(dist_ok(a) for a in fam)  # exhaustion must be genuine
    ok = bad == shifts == distance == 0
    return ok, (f"{inputs} families, {bad} invalid members, {shifts} shift violations, "
                f"{distance} distance failures, {exhausted} genuine exhaustions")


# 10 ----------------------------------------------------------------------------

def criterion_10(seeds=10**4):
    P = PRESETS["toy"]  # relaxed mode
    run_len = P.run_length(1)
    failures = blocks = 0
    for seed in range(seeds):
        s = generate(8, 6000, seed)
        lvl1 = build_level1(s, P)
        failures += not lvl1.tiles()
        vrng = np.random.default_rng([seed, 1])
        good = (vrng.random(len(lvl1.blocks)) < 0.9).tolist()
        lvl2 = build_next_level(lvl1, good, P, [seed, 2])
        failures += not lvl2.tiles()
        for k, b in enumerate(lvl2.blocks):
            blocks += 1
            failures += not all(b.sub_good[-run_len:])
            if k:
                failures += not all(b.sub_good[:run_len])
            failures += not np.array_equal(np.concatenate([sb.symbols for sb in b.sub_blocks]), b.symbols)
    return failures == 0, f"{seeds} seeds, {blocks} level-2 blocks, {failures} violations"


# 11 ----------------------------------------------------------------------------

def criterion_11():
    problems = []
    with tempfile.TemporaryDirectory() as tmp:
        files = clicases.write_fixtures(Path(tmp))
        for name, argv in clicases.cases(files).items():
            payloads = []
            for w in (1, 8):
                out = Path(tmp) / f"{name}-{w}.out"
                code = run(argv + ["--workers", str(w), "--out", str(out)])
                if code != 0:
                    problems.append(f"{name}/w{w}: exit {code}")
                payload, same = replay(str(out) + ".manifest.json")
                if not same or payload != out.read_text():
                    problems.append(f"{name}/w{w}: replay differs")
                payloads.append(out.read_bytes())
            if payloads[0] != payloads[1]:
                problems.append(f"{name}: workers 1 vs 8 differ")
    return not problems, f"8 subcommands x 2 worker counts; {problems or 'all identical'}"


CRITERIA = {n: globals()[f"criterion_{n}"] for n in range(1, 12)}


@pytest.mark.parametrize("n", sorted(CRITERIA))
def test_criterion(n):
    ok, detail = CRITERIA[n]()
    record(n, ok, detail)


if __name__ == "__main__":
    for n, fn in CRITERIA.items():
        ok, detail = fn()
        print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}", flush=True)
