import itertools
import random
import re

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import oracles
from arborsort.adaptive_sort import par_mergesort, seq_mergesort
from arborsort.geometry import (
    ADDED,
    ORIGINAL,
    GeometryError,
    MergeRecord,
    MergeTrace,
    Point,
    PointSet,
    TraceError,
    arboral_merge,
    arboral_mergesort,
    arboral_mergesort_stats,
    block_boundaries,
    from_text,
    is_satisfied,
    missing_boundaries,
    plot,
    render_svg,
    satisfy_mergesort,
    satisfy_quicksort,
    to_text,
    top_tree_closure,
    transpose,
)
from arborsort.permutation import Permutation, gen_bit_reversal, gen_random, gen_sorted, inverse

cell_sets = st.integers(1, 7).flatmap(
    lambda n: st.sets(st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=14).map(lambda c: (n, c))
)
small_perms = st.integers(1, 64).flatmap(lambda n: st.permutations(range(n))).map(Permutation)


def cells(s: PointSet) -> set[tuple[int, int]]:
    return {(p.x, p.y) for p in s}


# -- point sets --------------------------------------------------------------


def test_plot():
    assert cells(plot(Permutation([0, 1]))) == {(0, 0), (1, 1)}
    assert cells(plot(Permutation([1, 0]))) == {(0, 1), (1, 0)}
    s = plot(gen_bit_reversal(8))
    assert len(s) == 8 and s.original_count == 8 and s.added_count == 0
    assert s.keys_by_column() == dict(enumerate(gen_bit_reversal(8)))


def test_pointset_deduplicates_keeping_original():
    s = PointSet([Point(0, 0, ADDED), Point(0, 0, ORIGINAL), (1, 1)], n=2)
    assert len(s) == 2
    assert list(s)[0] == Point(0, 0, ORIGINAL)
    assert (0, 0) in s and (1, 0) not in s
    assert s.union(PointSet([Point(1, 0, ADDED)], 2)).cells() == {(0, 0), (1, 1), (1, 0)}


def test_pointset_rejects_out_of_grid():
    with pytest.raises(GeometryError):
        PointSet([(0, 3)], n=3)


# -- verifier ----------------------------------------------------------------


def test_verifier_examples():
    r = is_satisfied(PointSet([(0, 0), (1, 1)], 2))
    assert not r and r.violation == (Point(0, 0, ORIGINAL), Point(1, 1, ORIGINAL))
    assert is_satisfied(PointSet([(0, 0), (1, 1), (0, 1)], 2))
    assert is_satisfied(PointSet([(0, 0), (1, 0)], 2))
    assert is_satisfied(PointSet([], 3)) and is_satisfied(PointSet([(2, 2)], 3))


def test_verifier_reports_added_origin():
    r = is_satisfied(PointSet([Point(0, 2, ADDED), (1, 0), (2, 1)], 3))
    assert r.violation[0] == Point(0, 2, ADDED)


@settings(max_examples=400, deadline=None)
@given(cell_sets)
def test_verifier_matches_rectangle_oracle(case):
    n, cs = case
    r = is_satisfied(PointSet(cs, n))
    want = oracles.first_violation(cs)
    got = None if r else tuple((p.x, p.y) for p in r.violation)
    assert got == want


def test_verifier_exhaustive_4x4():
    # the full 6x6 sweep runs in the acceptance suite
    rect = oracles.rectangle_masks(4)
    checked, bad, _, first_bad = oracles.exhaustive_mismatches(4, 6, rect)
    assert checked == sum(len(list(itertools.combinations(range(16), k))) for k in range(7))
    assert bad == 0, first_bad


@settings(max_examples=300, deadline=None)
@given(cell_sets)
def test_satisfied_iff_staircase_paths(case):
    n, cs = case
    assert bool(is_satisfied(PointSet(cs, n))) == oracles.staircase_connected(cs)


# -- satisfiers --------------------------------------------------------------


def test_satisfiers_trivial_cases():
    one = plot(Permutation([0]))
    assert satisfy_quicksort(one, 5) == one and satisfy_mergesort(one) == one
    for perm in ([0, 1], [1, 0]):
        p = plot(Permutation(perm))
        for seed in range(6):
            q = satisfy_quicksort(p, seed)
            assert is_satisfied(q) and q.added_count <= 1
        m = satisfy_mergesort(p)
        assert is_satisfied(m) and m.added_count <= 2


def test_quicksort_satisfier_example():
    s = satisfy_quicksort(plot(gen_random(8, 7)), 13)
    assert is_satisfied(s)
    assert s.added_count <= 8 * 3
    assert cells(plot(gen_random(8, 7))) <= cells(s)
    assert satisfy_quicksort(plot(gen_random(8, 7)), 13) == s


def test_mergesort_satisfier_bit_reversal_count():
    s = satisfy_mergesort(plot(gen_bit_reversal(8)))
    assert is_satisfied(s)
    assert (len(s), s.added_count) == (21, 13)


@settings(max_examples=60, deadline=None)
@given(small_perms, st.integers(0, 2 ** 16))
def test_satisfiers_always_satisfy(p, seed):
    base = cells(plot(p))
    for s in (satisfy_quicksort(plot(p), seed), satisfy_mergesort(plot(p))):
        assert is_satisfied(s)
        assert base <= cells(s) and s.original_count == len(p)


# -- arboral merge -----------------------------------------------------------


def test_block_boundaries():
    assert block_boundaries([1, 2, 5, 6], [3, 4, 7, 8]) == {1, 2, 3, 4, 5, 6, 7, 8}
    assert block_boundaries([1, 2, 3], [4, 5]) == {1, 3, 4, 5}
    assert block_boundaries([1, 3, 4, 5, 9], [2]) == {1, 2, 3, 9}


def test_arboral_merge_smallest():
    a = PointSet([(0, 0)], 2)
    b = PointSet([(1, 1)], 2)
    s = arboral_merge(a, b, {0, 1})
    assert is_satisfied(s) and len(s) <= 4


def test_arboral_merge_empty_side():
    b = PointSet([(1, 1), (2, 0), (1, 0)], 3)
    assert arboral_merge(PointSet([], 3), b, []) is b
    assert arboral_merge(b, PointSet([], 3), []) is b


def test_arboral_merge_rejects_bad_input():
    a = PointSet([(0, 0), (1, 2)], 4)
    with pytest.raises(GeometryError, match="adjacent"):
        arboral_merge(a, PointSet([(3, 1)], 4), {0, 1, 2})
    with pytest.raises(GeometryError, match="adjacent"):
        arboral_merge(PointSet([(2, 1)], 4), a, {0, 1, 2})
    with pytest.raises(GeometryError, match="share"):
        arboral_merge(a, PointSet([(2, 2)], 4), {0, 2})
    with pytest.raises(GeometryError, match="not present"):
        arboral_merge(a, PointSet([(2, 1)], 4), {0, 1, 2, 3})
    with pytest.raises(GeometryError, match="boundar"):
        arboral_merge(a, PointSet([(2, 1)], 4), {0, 1})


def fold(p: Permutation, trace: MergeTrace, lo: int, hi: int) -> PointSet:
    """Replay the merges of ``trace`` inside positions ``[lo, hi)`` with arboral_merge."""
    parts = {(i, i + 1): PointSet([(i, p[i])], len(p)) for i in range(lo, hi)}
    for r in trace:
        if lo <= r.lo and r.hi <= hi:
            parts[(r.lo, r.hi)] = arboral_merge(parts.pop(r.left), parts.pop(r.right), r.accessed_keys)
    (only,) = parts.values()
    return only


def placed_keys(keys, a: PointSet, b: PointSet) -> set[int]:
    # the keys arboral_merge places after top-tree completion
    rows = {}
    for q in list(a) + list(b):
        lo, hi = rows.get(q.y, (q.x, q.x))
        rows[q.y] = (min(lo, q.x), max(hi, q.x))
    order = sorted(rows)
    chosen = np.searchsorted(order, sorted(keys))
    first = np.array([rows[k][0] for k in order])
    last = np.array([rows[k][1] for k in order])
    return {order[i] for i in top_tree_closure(chosen, first, last)}


@pytest.mark.parametrize("seed", range(40))
def test_arboral_merge_of_trace_halves(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 24)
    p = gen_random(n, seed)
    rep = (seq_mergesort if seed % 2 else par_mergesort)(p)
    top = rep.trace.records[-1]
    assert not missing_boundaries(p, top)
    a, b = fold(p, rep.trace, 0, top.mid), fold(p, rep.trace, top.mid, n)
    assert is_satisfied(a) and is_satisfied(b)
    keys = set(top.accessed_keys)
    if seed % 3 == 0:
        keys |= set(rng.sample(range(n), rng.randint(0, n)))
    s = arboral_merge(a, b, keys)
    assert is_satisfied(s)
    added = s.added_count - a.added_count - b.added_count
    placed = placed_keys(keys, a, b)
    assert keys <= placed
    assert added <= 3 * len(placed)
    if seed % 3:
        assert s == arboral_mergesort(p, rep.trace)


def test_top_tree_closure_fixed_point():
    first = np.array([0, 0, 1, 2, 3])
    last = np.array([4, 1, 2, 3, 4])
    c = top_tree_closure(np.array([0, 4]), first, last)
    assert set(c) >= {0, 4}
    assert np.array_equal(top_tree_closure(c, first, last), c)
    assert len(top_tree_closure(np.array([], dtype=np.int64), first, last)) == 0


# -- arboral mergesort -------------------------------------------------------


def test_arboral_mergesort_single():
    p = Permutation([0])
    s = arboral_mergesort(p, seq_mergesort(p).trace)
    assert cells(s) == {(0, 0)} and s.added_count == 0


@pytest.mark.parametrize("p", [gen_sorted(8), gen_bit_reversal(16), gen_random(40, 3)], ids=["sorted", "bitrev", "random"])
def test_arboral_mergesort_examples(p):
    for rep in (seq_mergesort(p), par_mergesort(p)):
        s, stats = arboral_mergesort_stats(p, rep.trace)
        assert is_satisfied(s)
        assert stats.trace_keys == rep.trace.access_count
        assert stats.added == s.added_count
        assert stats.attempted <= 6 * stats.trace_keys


def test_arboral_mergesort_exhaustive_small():
    for n in range(1, 7):
        for perm in itertools.permutations(range(n)):
            p = Permutation(perm)
            s, stats = arboral_mergesort_stats(p, par_mergesort(p).trace)
            assert is_satisfied(s), perm
            assert stats.attempted <= 6 * stats.trace_keys


def test_arboral_mergesort_trace_errors():
    p = gen_random(8, 1)
    trace = seq_mergesort(p).trace
    with pytest.raises(TraceError):
        arboral_mergesort(gen_random(4, 1), trace)
    r = trace.records[-1]
    dropped = MergeRecord(r.lo, r.mid, r.hi, frozenset(sorted(r.accessed_keys)[1:]))
    with pytest.raises(TraceError, match="boundary"):
        arboral_mergesort(p, MergeTrace(8, trace.records[:-1] + (dropped,)))
    with pytest.raises(TraceError):
        arboral_mergesort(p, MergeTrace(8, trace.records[:-1]))
    stray = MergeRecord(0, 1, 2, frozenset({p[0], p[1], p[5]}))
    with pytest.raises(TraceError, match="outside"):
        arboral_mergesort(p, MergeTrace(8, (stray,) + trace.records[1:]))


def test_literal_placement_can_fail():
    # without top-tree completion the bare trace keys are not always enough
    failures = 0
    for seed in range(60):
        p = gen_random(24, seed)
        trace = seq_mergesort(p).trace
        parts = {(i, i + 1): PointSet([(i, p[i])], 24) for i in range(24)}
        for r in trace:
            parts[(r.lo, r.hi)] = arboral_merge(parts.pop(r.left), parts.pop(r.right), r.accessed_keys, complete=False)
        s = parts[(0, 24)]
        failures += not is_satisfied(s)
    assert failures > 0


# -- transpose, text, SVG ----------------------------------------------------


def test_transpose():
    s = PointSet([(0, 1), (1, 0)], 2)
    assert transpose(s) == s


@settings(max_examples=60, deadline=None)
@given(small_perms)
def test_transpose_of_plot_is_inverse_plot(p):
    assert transpose(plot(p)) == plot(inverse(p))
    s = satisfy_mergesort(plot(p))
    t = transpose(s)
    assert is_satisfied(t) and len(t) == len(s)


@given(cell_sets)
def test_text_round_trip(case):
    n, cs = case
    s = PointSet([Point(x, y, ADDED if (x + y) % 2 else ORIGINAL) for x, y in cs], n)
    assert from_text(to_text(s), n) == s


def test_text_errors():
    assert to_text(PointSet([Point(1, 0, ADDED), (0, 1)], 2)) == "0 1 o\n1 0 a\n"
    with pytest.raises(GeometryError, match="line 2"):
        from_text("0 0 o\n1 1 x\n")
    with pytest.raises(GeometryError, match="line 1"):
        from_text("0 y o\n")


def _count(svg: str, cls: str) -> int:
    return len(re.findall(rf'class="{cls}"', svg))


def test_svg():
    empty = render_svg(PointSet([], 3))
    assert empty.startswith("<svg") and empty.rstrip().endswith("</svg>")
    assert _count(empty, "original") == 0 and empty.count("<line") == 8
    assert _count(render_svg(plot(gen_bit_reversal(8))), "original") == 8
    s = satisfy_mergesort(plot(gen_random(16, 4)))
    svg = render_svg(s)
    assert _count(svg, "original") + _count(svg, "added") == len(s)
    assert _count(svg, "added") == s.added_count
    assert render_svg(s) == svg
