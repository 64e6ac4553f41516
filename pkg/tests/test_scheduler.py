import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from coordperc.model import Sequence, generate
from coordperc.scheduler import (
    InvalidPathError,
    Move,
    Schedule,
    extract_schedule,
    find_path,
    read_schedule,
    verify_schedule,
    write_schedule,
)


def seq(items, M=4, role="X"):
    return Sequence(M, np.asarray(items, dtype=np.int32), role)


def replay_oracle(moves, xs, ys):
    """First failing move index (0 for the start), or None; 0-based lists."""
    i = j = 0
    if xs[0] == ys[0]:
        return 0
    for k, (walk, v) in enumerate(moves, 1):
        if walk == "X":
            i += 1
            if i >= len(xs) or xs[i] != v:
                return k
        else:
            j += 1
            if j >= len(ys) or ys[j] != v:
                return k
        if xs[i] == ys[j]:
            return k
    return None


def instance(seed, n=64, M=4):
    """A cc-connected instance and a path, or None."""
    x, y = generate(M, n, seed), generate(M, n, seed, "Y")
    return x, y, find_path(x, y, n)


def test_two_by_two_all_open():
    x, y = seq([1, 1]), seq([2, 2], role="Y")
    s = extract_schedule([(1, 1), (2, 1), (2, 2)], x, y)
    assert s.moves == (Move("X", 1), Move("Y", 2))
    assert verify_schedule(s, x, y)


def test_closed_site_rejected():
    x, y = seq([1, 2]), seq([2, 1], role="Y")
    with pytest.raises(InvalidPathError) as err:
        extract_schedule([(1, 1), (2, 1), (2, 2)], x, y)
    assert err.value.index == 1


def test_bad_step_rejected():
    x, y = seq([1, 1, 1]), seq([2, 2, 2], role="Y")
    with pytest.raises(InvalidPathError):
        extract_schedule([(1, 1), (2, 2)], x, y)
    with pytest.raises(InvalidPathError):
        extract_schedule([(1, 2)], x, y)


def test_collision_reported_with_index():
    x, y = seq([1, 2]), seq([2, 3], role="Y")
    r = verify_schedule(Schedule((Move("X", 2),)), x, y)
    assert not r and r.index == 1 and "collision" in r.reason


def test_round_trip_and_counts():
    done = 0
    for seed in range(400):
        x, y, path = instance(seed)
        if path is None:
            continue
        s = extract_schedule(path, x, y)
        assert verify_schedule(s, x, y)
        nx, ny = s.counts()
        assert (nx, ny) == (path[-1][0] - 1, path[-1][1] - 1)
        assert s.sites() == [tuple(p) for p in path]
        done += 1
    assert done > 100


def test_find_path_blocked():
    x, y = seq([1] * 5), seq([1] * 5, role="Y")
    assert find_path(x, y, 5) is None


@given(st.integers(0, 10**6), st.data())
@settings(max_examples=300, deadline=None)
def test_mutants_agree_with_replay(seed, data):
    x, y, path = instance(seed % 5000, n=32, M=5)
    if path is None or len(path) < 3:
        return
    moves = list(extract_schedule(path, x, y).moves)
    k = data.draw(st.integers(0, len(moves) - 1))
    kind = data.draw(st.sampled_from(["swap", "vertex", "walk"]))
    if kind == "swap" and k + 1 < len(moves):
        moves[k], moves[k + 1] = moves[k + 1], moves[k]
    elif kind == "vertex":
        moves[k] = Move(moves[k].walk, 1 + moves[k].vertex % 5)
    else:
        moves[k] = Move("Y" if moves[k].walk == "X" else "X", moves[k].vertex)
    r = verify_schedule(Schedule(tuple(moves)), x, y)
    expected = replay_oracle([(m.walk, m.vertex) for m in moves], x.to_list(), y.to_list())
    assert r.index == expected and bool(r) == (expected is None)
    if r:
        sites = Schedule(tuple(moves)).sites()
        assert all(x[i] != y[j] for i, j in sites)


def test_file_round_trip(tmp_path):
    x, y, path = instance(3, n=40, M=8)
    s = extract_schedule(path, x, y)
    write_schedule(s, tmp_path / "s.txt")
    assert read_schedule(tmp_path / "s.txt") == s


def test_bad_schedule_file(tmp_path):
    (tmp_path / "s.txt").write_text("Z 3\n")
    with pytest.raises(ValueError):
        read_schedule(tmp_path / "s.txt")
