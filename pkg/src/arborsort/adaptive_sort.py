"""Mergesorts over finger trees whose work tracks the log-interleave bound.

Four entry points share one recursion: the input positions are halved with
the larger half on the left, exactly like the static tree in
:mod:`arborsort.bounds`, so the merge at each recursion node lines up with one
vertex of that tree.

``seq_mergesort``
    Merges by repeatedly cutting the lower of the two minima off as a block
    (split) and appending it to the output (join).
``par_mergesort``
    Merges by splitting around the median of the first tree, carving out the
    block of the first tree that holds it, and recursing on both sides in
    parallel.
``union_mergesort``
    Baseline: the classic parallel union, which splits the second tree at
    every key of the first; its work is not bounded by the LIB.
``partition_sort_via_duality``
    Runs ``seq_mergesort`` on the inverse permutation. Undoing each merge with
    time and key swapped is a partition step on the original input, so the
    cost is the cost of the dual partition sort.

Every merge logs the keys it touched and the blocks it emitted; the sort
collects those logs into a :class:`~arborsort.geometry.MergeTrace`.
"""

from __future__ import annotations

import csv
import gc
import io
import os
import threading
from collections.abc import Callable
from contextlib import contextmanager
from dataclasses import dataclass, field, fields

from . import finger_tree as ft
from .bounds import compute_bounds
from .finger_tree import CostMeter, FingerTree, KeyOrderError
from .geometry import MergeRecord, MergeTrace, PointSet, arboral_mergesort, transpose
from .permutation import Permutation, inverse

__all__ = [
    "MergeLog",
    "SortReport",
    "SortRow",
    "seq_merge",
    "merge_ht",
    "union",
    "seq_mergesort",
    "par_mergesort",
    "union_mergesort",
    "partition_sort_via_duality",
    "run_sort",
    "ALGORITHMS",
    "rows_to_csv",
    "rows_from_csv",
    "thread_count",
]

THREADS_ENV = "ARBORSORT_THREADS"


@dataclass
class MergeLog:
    """Keys touched by one merge and the pieces it emitted, in output order."""

    accessed_keys: set[int] = field(default_factory=set)
    pieces: list[tuple[int, int, int]] = field(default_factory=list)

    def piece(self, side: int, t: FingerTree) -> None:
        lo, hi = t.min(), t.max()
        self.accessed_keys.add(lo)
        self.accessed_keys.add(hi)
        self.pieces.append((side, lo, hi))

    def touch(self, *trees: FingerTree, low: bool = True, high: bool = True) -> None:
        for t in trees:
            if t:
                if low:
                    self.accessed_keys.add(t.min())
                if high:
                    self.accessed_keys.add(t.max())

    @property
    def blocks(self) -> tuple[tuple[int, int, int], ...]:
        """Pieces with neighbours from the same input fused into maximal blocks."""
        out: list[tuple[int, int, int]] = []
        for side, lo, hi in self.pieces:
            if out and out[-1][0] == side:
                out[-1] = (side, out[-1][1], hi)
            else:
                out.append((side, lo, hi))
        return tuple(out)


def seq_merge(t1: FingerTree, t2: FingerTree, meter: CostMeter | None = None) -> tuple[FingerTree, MergeLog]:
    mt = meter if meter is not None else CostMeter()
    log = MergeLog()
    acc, pieces = log.accessed_keys, log.pieces
    split, join = ft.split, ft.join
    out = ft.EMPTY
    # each minimum is probed once and re-probed only after its tree was cut
    k1 = t1.min(mt) if t1 else None
    k2 = t2.min(mt) if t2 else None
    while t1 and t2:
        mt.comparisons += 1
        if k1 == k2:
            raise KeyOrderError(f"key {k1} occurs in both inputs")
        if k1 > k2:
            block, t2 = split(t2, k1, mt)
            side = 1
            if t2:
                k2 = t2.min(mt)
        else:
            block, t1 = split(t1, k2, mt)
            side = 0
            if t1:
                k1 = t1.min(mt)
        lo, hi = block.min(), block.max()
        acc.add(lo)
        acc.add(hi)
        pieces.append((side, lo, hi))
        out = join(out, block, mt)
    rest = t1 or t2
    if rest:
        rest.max(mt)
        log.piece(0 if t1 else 1, rest)
    return join(out, rest, mt), log


class _Forker:
    """Binary fork-join with task-local meters.

    Up to ``depth`` nested levels run their left branch on a fresh thread;
    below that both branches run inline. Either way the meters are merged in
    fork order, so the numbers never depend on scheduling.
    """

    def __init__(self, depth: int = 0):
        self.depth = depth

    def __call__(self, left: Callable, right: Callable, mt: CostMeter):
        ml, mr = mt.fork()
        child = _Forker(max(self.depth - 1, 0))
        if self.depth > 0:
            box: list = []
            errors: list = []

            def run():
                try:
                    box.append(left(ml, child))
                except BaseException as exc:  # re-raised on the forking thread
                    errors.append(exc)

            th = threading.Thread(target=run)
            th.start()
            b = right(mr, child)
            th.join()
            if errors:
                raise errors[0]
            a = box[0]
        else:
            a = left(ml, child)
            b = right(mr, child)
        mt.join_parallel(ml, mr)
        return a, b


def thread_count() -> int:
    """Worker threads for the fork-join engine, from ``ARBORSORT_THREADS`` (default 1)."""
    raw = os.environ.get(THREADS_ENV, "")
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def _forker(workers: int | None) -> _Forker:
    if workers is None:
        workers = thread_count()
    return _Forker(max(workers, 1).bit_length() - 1)


def _tail_piece(t1: FingerTree, t2: FingerTree, log: MergeLog):
    # recursion bottom: one input is empty and passes through unchanged
    if t2:
        log.pieces.append((1, t2.min(), t2.max()))
        return t2
    if t1:
        log.pieces.append((0, t1.min(), t1.max()))
    return t1


def _merge_ht(t1: FingerTree, t2: FingerTree, mt: CostMeter, fork: _Forker, log: MergeLog):
    if not t1 or not t2:
        return _tail_piece(t1, t2, log)
    acc = log.accessed_keys
    k = ft.kth(t1, len(t1) // 2, mt)
    acc.add(k)
    l2, r2 = ft.split(t2, k, mt)
    if r2 and r2.min() == k:
        raise KeyOrderError(f"key {k} occurs in both inputs")
    if l2:
        k1 = l2.max(mt)
        acc.add(k1)
        l1, mid = ft.split(t1, k1, mt)
        if mid.min() == k1:
            raise KeyOrderError(f"key {k1} occurs in both inputs")
    else:
        l1, mid = ft.EMPTY, t1
    if r2:
        k2 = r2.min(mt)
        acc.add(k2)
        m, r1 = ft.split(mid, k2, mt)
        if r1 and r1.min() == k2:
            raise KeyOrderError(f"key {k2} occurs in both inputs")
    else:
        m, r1 = mid, ft.EMPTY
    lo, hi = m.min(), m.max()
    acc.add(lo)
    acc.add(hi)
    log.pieces.append((0, lo, hi))
    if l1:
        acc.add(l1.min())
        acc.add(l1.max())
    if r1:
        acc.add(r1.min())
        acc.add(r1.max())
    if l1 and l2 and r1 and r2:
        tl, tr = fork(
            lambda m_, f_: _merge_ht(l1, l2, m_, f_, log),
            lambda m_, f_: _merge_ht(r1, r2, m_, f_, log),
            mt,
        )
    else:
        # a side with an empty input costs nothing, so forking would add
        # exactly the other side's work and span
        tl = _merge_ht(l1, l2, mt, fork, log) if l1 and l2 else _tail_piece(l1, l2, log)
        tr = _merge_ht(r1, r2, mt, fork, log) if r1 and r2 else _tail_piece(r1, r2, log)
    return ft.join(ft.join(tl, m, mt), tr, mt)


def merge_ht(
    t1: FingerTree, t2: FingerTree, meter: CostMeter | None = None, *, workers: int | None = 1
) -> tuple[FingerTree, MergeLog]:
    """Parallel merge: split ``t2`` at the median of ``t1``, cut ``t1`` in three, recurse."""
    mt = meter if meter is not None else CostMeter()
    log = MergeLog()
    # the output's end fingers are the inputs' extreme keys
    for t in (t1, t2):
        if t:
            t.min(mt)
            t.max(mt)
    log.touch(t1, t2)
    out = _merge_ht(t1, t2, mt, _forker(workers), log)
    # pieces are disjoint key ranges, appended in task order
    log.pieces.sort(key=lambda pc: pc[1])
    return out, log


def _union(t1: FingerTree, t2: FingerTree, mt: CostMeter, fork: _Forker, log: MergeLog):
    if not t1 or not t2:
        return _tail_piece(t1, t2, log)
    k = ft.kth(t1, len(t1) // 2, mt)
    l1, rest = ft.split(t1, k, mt)
    _, r1 = ft.split(rest, k + 1, mt)
    l2, r2 = ft.split(t2, k, mt)
    if r2 and r2.min() == k:
        raise KeyOrderError(f"key {k} occurs in both inputs")
    log.accessed_keys.add(k)
    log.touch(l1, r1, l2, r2)
    log.pieces.append((0, k, k))
    tl, tr = fork(
        lambda m_, f_: _union(l1, l2, m_, f_, log),
        lambda m_, f_: _union(r1, r2, m_, f_, log),
        mt,
    )
    return ft.join(ft.join(tl, ft.singleton(k, mt), mt), tr, mt)


def union(
    t1: FingerTree, t2: FingerTree, meter: CostMeter | None = None, *, workers: int | None = 1
) -> tuple[FingerTree, MergeLog]:
    """Classic join-based union: expose a root of ``t1``, split ``t2`` there, recurse."""
    mt = meter if meter is not None else CostMeter()
    log = MergeLog()
    log.touch(t1, t2)
    out = _union(t1, t2, mt, _forker(workers), log)
    log.pieces.sort(key=lambda pc: pc[1])
    return out, log


@dataclass
class SortReport:
    """Result of one sort.

    ``lib`` and ``ib`` are the bounds of the sequence the mergesort actually
    merged (the inverse permutation for the partition-sort dual).
    """

    algorithm: str
    n: int
    output: list[int]
    meter: CostMeter
    trace: MergeTrace
    lib: float
    ib: int
    witness: PointSet | None = None

    @property
    def span_depth(self) -> int:
        return self.meter.span


@contextmanager
def _gc_paused():
    # the trees allocate millions of small immutable nodes and no cycles;
    # generational collection only adds pauses here
    was_enabled = gc.isenabled()
    gc.disable()
    try:
        yield
    finally:
        if was_enabled:
            gc.enable()


def _mergesort(p: Permutation, merge, parallel: bool, workers: int | None):
    with _gc_paused():
        return _mergesort_inner(p, merge, parallel, workers)


def _mergesort_inner(p: Permutation, merge, parallel: bool, workers: int | None):
    entries = p.entries
    top = CostMeter()

    def sort(lo: int, hi: int, mt: CostMeter, fork: _Forker):
        if hi - lo == 1:
            return ft.singleton(entries[lo], mt), []
        mid = lo + (hi - lo + 1) // 2
        if parallel:
            (tl, rl), (tr, rr) = fork(
                lambda m_, f_: sort(lo, mid, m_, f_),
                lambda m_, f_: sort(mid, hi, m_, f_),
                mt,
            )
            tree, log = merge(tl, tr, mt, workers=2 ** fork.depth)
        else:
            tl, rl = sort(lo, mid, mt, fork)
            tr, rr = sort(mid, hi, mt, fork)
            tree, log = merge(tl, tr, mt)
        rec = MergeRecord(lo, mid, hi, frozenset(log.accessed_keys), log.blocks)
        return tree, rl + rr + [rec]

    tree, records = sort(0, len(entries), top, _forker(workers if parallel else 1))
    return list(tree), top, MergeTrace(len(entries), tuple(records))


def _report(name: str, p: Permutation, out, meter, trace) -> SortReport:
    b = compute_bounds(p, detail=False)
    return SortReport(name, len(p), out, meter, trace, b.lib_total, b.ib_total)


def seq_mergesort(p: Permutation) -> SortReport:
    out, meter, trace = _mergesort(p, seq_merge, False, 1)
    return _report("seq", p, out, meter, trace)


def par_mergesort(p: Permutation, *, workers: int | None = None) -> SortReport:
    """Fork-join mergesort with ``merge_ht`` merges.

    ``workers`` only decides how many threads carry the forks; the report is
    identical for every value.
    """
    out, meter, trace = _mergesort(p, merge_ht, True, workers)
    return _report("par", p, out, meter, trace)


def union_mergesort(p: Permutation, *, workers: int | None = None) -> SortReport:
    out, meter, trace = _mergesort(p, union, True, workers)
    return _report("union-baseline", p, out, meter, trace)


def partition_sort_via_duality(p: Permutation, *, witness: bool = False) -> SortReport:
    """Cost of the dual partition sort of ``p``, via ``seq_mergesort`` of its inverse.

    With ``witness=True`` the report carries the satisfied point set of the
    inverse's mergesort, rotated back onto ``p``'s axes.
    """
    q = inverse(p)
    out, meter, trace = _mergesort(q, seq_merge, False, 1)
    rep = _report("partition-dual", q, out, meter, trace)
    if witness:
        rep.witness = transpose(arboral_mergesort(q, trace))
    return rep


ALGORITHMS: dict[str, Callable[[Permutation], SortReport]] = {
    "seq": seq_mergesort,
    "par": par_mergesort,
    "union-baseline": union_mergesort,
    "partition-dual": partition_sort_via_duality,
}


def run_sort(algorithm: str, p: Permutation) -> SortReport:
    try:
        fn = ALGORITHMS[algorithm]
    except KeyError:
        raise ValueError(f"unknown algorithm {algorithm!r}; expected one of {', '.join(ALGORITHMS)}") from None
    return fn(p)


@dataclass(frozen=True)
class SortRow:
    """One CSV row describing a sort run."""

    algorithm: str
    n: int
    family: str
    seed: int
    comparisons: int
    accesses: int
    splits: int
    joins: int
    span_depth: int
    lib: float
    ib: int

    @classmethod
    def from_report(cls, rep: SortReport, family: str = "file", seed: int = 0) -> SortRow:
        m = rep.meter
        return cls(
            rep.algorithm, rep.n, family, seed, m.comparisons, m.accesses,
            m.splits, m.joins, rep.span_depth, rep.lib, rep.ib,
        )


SORT_HEADER = tuple(f.name for f in fields(SortRow))


_ROW_TYPES = {"algorithm": str, "family": str, "lib": float}
_ROW_TYPES.update((k, int) for k in SORT_HEADER if k not in _ROW_TYPES)


def rows_to_csv(rows, extra: dict[str, list] | None = None) -> str:
    """Serialize rows; ``extra`` appends named columns (one value per row)."""
    extra = extra or {}
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SORT_HEADER + tuple(extra))
    for i, r in enumerate(rows):
        vals = [repr(v) if isinstance(v, float) else v for v in (getattr(r, f) for f in SORT_HEADER)]
        vals += [repr(col[i]) if isinstance(col[i], float) else col[i] for col in extra.values()]
        w.writerow(vals)
    return buf.getvalue()


def rows_from_csv(text: str) -> list[SortRow]:
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or tuple(reader.fieldnames[: len(SORT_HEADER)]) != SORT_HEADER:
        raise ValueError("missing or unexpected sort CSV header")
    return [SortRow(**{k: _ROW_TYPES[k](row[k]) for k in SORT_HEADER}) for row in reader]
