"""Access sequences as point sets, and arboral satisfaction.

A point ``(x, y)`` means key ``y`` is touched at time ``x``. A set is
arborally satisfied when every two points that share neither a row nor a
column span a closed rectangle holding some third point of the set.

Satisfiers provided here:

* :func:`satisfy_quicksort` adds, for a pivot key, a point in the pivot's row
  at every column of the current key range, then recurses above and below.
* :func:`satisfy_mergesort` adds, in the middle column of a time range, a
  point for every key of that range, then recurses left and right.
* :func:`arboral_mergesort` replays a mergesort trace: each merge places the
  keys it touched in three columns (first and last column of the left part,
  last column of the right part).

The last one needs the touched keys of a merge to form top trees of the two
trees being merged. A finger-tree merge only reports the keys it read, so
:func:`arboral_merge` first completes them: within every gap between two
chosen keys, no row may have been touched more recently (seen from the right
edge) or earlier (seen from the left edge) than both gap ends. Adding the
nearest row that breaks this, until nothing does, yields the smallest such
superset.
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from numba import njit

from .permutation import Permutation

__all__ = [
    "Point",
    "PointSet",
    "MergeRecord",
    "MergeTrace",
    "GeometryError",
    "TraceError",
    "SatisfactionReport",
    "ArboralStats",
    "plot",
    "is_satisfied",
    "satisfy_quicksort",
    "satisfy_mergesort",
    "block_boundaries",
    "missing_boundaries",
    "top_tree_closure",
    "arboral_merge",
    "arboral_mergesort",
    "arboral_mergesort_stats",
    "transpose",
    "render_svg",
    "to_text",
    "from_text",
]

ORIGINAL = "original"
ADDED = "added"


class GeometryError(ValueError):
    pass


class TraceError(GeometryError):
    pass


class Point(NamedTuple):
    x: int
    y: int
    origin: str = ORIGINAL


class PointSet:
    """Finite set of grid points, each tagged original or added.

    Stored as coordinate arrays sorted by ``(x, y)``. A cell given twice
    keeps one point, tagged original if either copy was.
    """

    __slots__ = ("x", "y", "added", "n")

    def __init__(self, points: Iterable = (), n: int | None = None):
        xs, ys, add = [], [], []
        for pt in points:
            if len(pt) == 3:
                x, y, origin = pt
                if origin not in (ORIGINAL, ADDED):
                    raise GeometryError(f"unknown origin {origin!r}")
            else:
                (x, y), origin = pt, ORIGINAL
            xs.append(int(x))
            ys.append(int(y))
            add.append(origin == ADDED)
        self._assign(np.array(xs, dtype=np.int64), np.array(ys, dtype=np.int64), np.array(add, dtype=bool), n)

    def _assign(self, x, y, added, n):
        if len(x) and (x.min() < 0 or y.min() < 0):
            raise GeometryError("coordinates must be non-negative")
        span = int(max(x.max(), y.max())) + 1 if len(x) else 0
        if n is None:
            n = span
        elif span > n:
            raise GeometryError(f"a point lies outside the {n}x{n} grid")
        # originals sort before added copies of the same cell, and unique keeps the first
        order = np.lexsort((added, y, x))
        x, y, added = x[order], y[order], added[order]
        keep = np.ones(len(x), dtype=bool)
        keep[1:] = (x[1:] != x[:-1]) | (y[1:] != y[:-1])
        self.x, self.y, self.added, self.n = x[keep], y[keep], added[keep], int(n)

    @classmethod
    def from_arrays(cls, x, y, added, n: int | None = None) -> PointSet:
        obj = cls.__new__(cls)
        obj._assign(
            np.asarray(x, dtype=np.int64), np.asarray(y, dtype=np.int64), np.asarray(added, dtype=bool), n
        )
        return obj

    def __len__(self) -> int:
        return len(self.x)

    def __iter__(self) -> Iterator[Point]:
        for x, y, a in zip(self.x.tolist(), self.y.tolist(), self.added.tolist()):
            yield Point(x, y, ADDED if a else ORIGINAL)

    def __contains__(self, cell) -> bool:
        x, y = cell[0], cell[1]
        i = np.searchsorted(self.x, x)
        j = np.searchsorted(self.x, x, side="right")
        return bool(np.any(self.y[i:j] == y))

    def __eq__(self, other) -> bool:
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.n == other.n
            and np.array_equal(self.x, other.x)
            and np.array_equal(self.y, other.y)
            and np.array_equal(self.added, other.added)
        )

    def __repr__(self) -> str:
        return f"PointSet(n={self.n}, points={len(self)}, added={self.added_count})"

    def cells(self) -> set[tuple[int, int]]:
        return set(zip(self.x.tolist(), self.y.tolist()))

    @property
    def added_count(self) -> int:
        return int(self.added.sum())

    @property
    def original_count(self) -> int:
        return len(self) - self.added_count

    def union(self, other: PointSet) -> PointSet:
        return PointSet.from_arrays(
            np.concatenate([self.x, other.x]),
            np.concatenate([self.y, other.y]),
            np.concatenate([self.added, other.added]),
            max(self.n, other.n),
        )

    def columns(self) -> tuple[int, int]:
        if not len(self):
            raise GeometryError("empty point set has no columns")
        return int(self.x[0]), int(self.x[-1])

    def keys_by_column(self) -> dict[int, int]:
        """Column -> key of its original point; fails unless there is exactly one per column."""
        orig = ~self.added
        cols = self.x[orig].tolist()
        if len(set(cols)) != len(cols):
            raise GeometryError("more than one original point in a column")
        return dict(zip(cols, self.y[orig].tolist()))


@dataclass(frozen=True)
class MergeRecord:
    """One merge of the sorted inputs ``[lo, mid)`` and ``[mid, hi)`` (input positions).

    ``accessed_keys`` are the keys the merge touched; ``blocks`` lists the
    maximal runs of the interleave as ``(side, first key, last key)`` with
    side 0 for the left input.
    """

    lo: int
    mid: int
    hi: int
    accessed_keys: frozenset[int]
    blocks: tuple[tuple[int, int, int], ...] = field(default=(), compare=False)

    @property
    def left(self) -> tuple[int, int]:
        return (self.lo, self.mid)

    @property
    def right(self) -> tuple[int, int]:
        return (self.mid, self.hi)


@dataclass(frozen=True)
class MergeTrace:
    """Merge records of one mergesort run, in post-order."""

    n: int
    records: tuple[MergeRecord, ...]

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self) -> Iterator[MergeRecord]:
        return iter(self.records)

    @property
    def access_count(self) -> int:
        return sum(len(r.accessed_keys) for r in self.records)


def plot(p: Permutation) -> PointSet:
    n = len(p)
    return PointSet.from_arrays(np.arange(n), np.asarray(p.entries), np.zeros(n, dtype=bool), n)


# -- satisfaction ------------------------------------------------------------

_FAR = np.iinfo(np.int64).max


@njit(cache=True)
def _scan(xs, ys, n):
    """Smallest violating pair of a set sorted by (x, y), or found == False.

    Sweeps columns right to left keeping, for each row, the nearest occupied
    column to the right. A point ``a`` is unsatisfied iff the open box between
    its column-neighbours (vertically) and its row-neighbour (horizontally)
    holds a point; the partner is the nearest such point in the leftmost
    column of the box.
    """
    far = np.iinfo(np.int64).max
    nxt = np.full(max(n, 1), far, dtype=np.int64)
    found = False
    ax = ay = bx = by = -1
    end = len(xs)
    while end > 0:
        col = xs[end - 1]
        start = end - 1
        while start > 0 and xs[start - 1] == col:
            start -= 1
        for i in range(start, end):
            y = ys[i]
            bound = nxt[y]
            # upper box: rows strictly between y and the next point up in this column
            top = ys[i + 1] if i + 1 < end else n
            ux = far
            uy = -1
            for r in range(y + 1, top):
                if nxt[r] < ux:
                    ux = nxt[r]
                    uy = r
            # lower box
            bottom = ys[i - 1] if i > start else -1
            lx = far
            ly = -1
            for r in range(y - 1, bottom, -1):
                if nxt[r] < lx:
                    lx = nxt[r]
                    ly = r
            cx = far
            cy = -1
            if lx < bound:
                cx, cy = lx, ly
            if ux < bound and ux < cx:
                cx, cy = ux, uy
            if cx != far:
                found = True
                ax, ay, bx, by = col, y, cx, cy
                break
        for i in range(start, end):
            nxt[ys[i]] = col
        end = start
    return found, ax, ay, bx, by


@dataclass(frozen=True)
class SatisfactionReport:
    satisfied: bool
    violation: tuple[Point, Point] | None = None

    def __bool__(self) -> bool:
        return self.satisfied


def _point_at(s: PointSet, x: int, y: int) -> Point:
    i = np.searchsorted(s.x, x)
    j = np.searchsorted(s.x, x, side="right")
    k = i + int(np.flatnonzero(s.y[i:j] == y)[0])
    return Point(int(x), int(y), ADDED if s.added[k] else ORIGINAL)


def is_satisfied(s: PointSet) -> SatisfactionReport:
    """Check arboral satisfaction; on failure report the lexicographically smallest bad pair."""
    if len(s) < 2:
        return SatisfactionReport(True)
    found, ax, ay, bx, by = _scan(s.x, s.y, s.n)
    if not found:
        return SatisfactionReport(True)
    return SatisfactionReport(False, (_point_at(s, ax, ay), _point_at(s, bx, by)))


# -- introductory satisfiers -------------------------------------------------


def _with_added(s: PointSet, xs: list[int], ys: list[int]) -> PointSet:
    return PointSet.from_arrays(
        np.concatenate([s.x, np.asarray(xs, dtype=np.int64)]),
        np.concatenate([s.y, np.asarray(ys, dtype=np.int64)]),
        np.concatenate([s.added, np.ones(len(xs), dtype=bool)]),
        s.n,
    )


def satisfy_quicksort(s: PointSet, seed: int = 0) -> PointSet:
    """Quicksort-style satisfier: random pivot row, fill it across the range's columns, recurse."""
    col_of = {k: c for c, k in s.keys_by_column().items()}
    keys = sorted(col_of)
    rng = random.Random(seed)
    xs: list[int] = []
    ys: list[int] = []
    stack = [(0, len(keys))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        piv = rng.randrange(lo, hi)
        pk = keys[piv]
        for j in range(lo, hi):
            if j != piv:
                xs.append(col_of[keys[j]])
                ys.append(pk)
        stack.append((piv + 1, hi))
        stack.append((lo, piv))
    return _with_added(s, xs, ys)


def satisfy_mergesort(s: PointSet) -> PointSet:
    """Mergesort-style satisfier: fill the middle column with the range's keys, recurse on both sides."""
    key_of = s.keys_by_column()
    cols = sorted(key_of)
    xs: list[int] = []
    ys: list[int] = []
    stack = [(0, len(cols))]
    while stack:
        lo, hi = stack.pop()
        if hi - lo < 2:
            continue
        mid = lo + (hi - lo) // 2
        for j in range(lo, hi):
            if j != mid:
                xs.append(cols[mid])
                ys.append(key_of[cols[j]])
        stack.append((mid + 1, hi))
        stack.append((lo, mid))
    return _with_added(s, xs, ys)


# -- merging satisfied sets --------------------------------------------------


def block_boundaries(left_keys: Iterable[int], right_keys: Iterable[int]) -> set[int]:
    """First and last key of every maximal same-side run of the merged order."""
    tagged = sorted([(k, 0) for k in left_keys] + [(k, 1) for k in right_keys])
    out: set[int] = set()
    for i, (k, side) in enumerate(tagged):
        if i == 0 or tagged[i - 1][1] != side or i == len(tagged) - 1 or tagged[i + 1][1] != side:
            out.add(k)
    return out


def missing_boundaries(p: Permutation, record: MergeRecord) -> set[int]:
    """Block boundaries of ``record``'s interleave that its accessed keys lack."""
    left = p.entries[record.lo:record.mid]
    right = p.entries[record.mid:record.hi]
    return block_boundaries(left, right) - record.accessed_keys


def _next_greater(prio: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Index of the nearest strictly higher priority to the right / left (``len`` / ``-1`` if none)."""
    m = len(prio)
    right = np.full(m, m, dtype=np.int64)
    left = np.full(m, -1, dtype=np.int64)
    vals = prio.tolist()
    stack: list[int] = []
    for i, v in enumerate(vals):
        while stack and vals[stack[-1]] < v:
            right[stack.pop()] = i
        stack.append(i)
    stack = []
    for i in range(m - 1, -1, -1):
        v = vals[i]
        while stack and vals[stack[-1]] < v:
            left[stack.pop()] = i
        stack.append(i)
    return right, left


def top_tree_closure(chosen: np.ndarray, first_x: np.ndarray, last_x: np.ndarray) -> np.ndarray:
    """Smallest superset of ``chosen`` forming top trees of both edge treaps.

    All arrays index the merged keys in increasing order: ``chosen`` holds
    positions into that order, ``first_x`` / ``last_x`` the first and last
    column occupied in each key's row. A key earlier-touched (left edge) or
    later-touched (right edge) than both ends of its gap forces the nearest
    such key into the set.
    """
    m = len(first_x)
    links = [_next_greater(np.asarray(last_x)), _next_greater(-np.asarray(first_x))]
    c = np.unique(np.asarray(chosen, dtype=np.int64))
    while True:
        if len(c) == 0:
            return c
        extra = []
        lo, hi = c[:-1], c[1:]
        for right, left in links:
            r = right[lo]
            extra.append(r[r < hi])
            q = left[hi]
            extra.append(q[q > lo])
            # rays beyond the outermost chosen keys
            if c[-1] < m - 1 and right[c[-1]] < m:
                extra.append(right[c[-1:]])
            if c[0] > 0 and left[c[0]] >= 0:
                extra.append(left[c[:1]])
        new = np.concatenate(extra)
        if len(new) == 0:
            return c
        grown = np.union1d(c, new)
        if len(grown) == len(c):
            return c
        c = grown


def _row_extents(s: PointSet) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(rows, first column, last column) of every occupied row."""
    order = np.lexsort((s.x, s.y))
    y, x = s.y[order], s.x[order]
    starts = np.flatnonzero(np.r_[True, y[1:] != y[:-1]])
    ends = np.r_[starts[1:], len(y)] - 1
    return y[starts], x[starts], x[ends]


def arboral_merge(a: PointSet, b: PointSet, accessed_keys: Iterable[int], *, complete: bool = True) -> PointSet:
    """Merge satisfied sets on adjacent column ranges (``a`` left of ``b``).

    Every key of ``accessed_keys``, completed to top trees unless
    ``complete=False``, is placed in the first and last column of ``a`` and
    the last column of ``b``.
    """
    if len(a) == 0:
        return b
    if len(b) == 0:
        return a
    la, ra = a.columns()
    lb, rb = b.columns()
    if ra + 1 != lb:
        raise GeometryError(f"columns {la}..{ra} and {lb}..{rb} are not adjacent with the first set on the left")
    rows_a, first_a, last_a = _row_extents(a)
    rows_b, first_b, last_b = _row_extents(b)
    if np.intersect1d(rows_a, rows_b).size:
        raise GeometryError("the two sets share a key row")
    keys = np.concatenate([rows_a, rows_b])
    order = np.argsort(keys)
    keys = keys[order]
    first = np.concatenate([first_a, first_b])[order]
    last = np.concatenate([last_a, last_b])[order]
    accessed = set(int(k) for k in accessed_keys)
    stray = accessed.difference(keys.tolist())
    if stray:
        raise GeometryError(f"accessed keys not present in either set: {sorted(stray)[:5]}")
    missing = block_boundaries(rows_a.tolist(), rows_b.tolist()) - accessed
    if missing:
        raise GeometryError(f"accessed keys miss block boundaries {sorted(missing)[:5]}")
    chosen = np.searchsorted(keys, np.array(sorted(accessed), dtype=np.int64))
    if complete:
        chosen = top_tree_closure(chosen, first, last)
    s = keys[chosen]
    k = len(s)
    xs = np.concatenate([np.full(k, la), np.full(k, ra), np.full(k, rb)])
    return PointSet.from_arrays(
        np.concatenate([a.x, b.x, xs]),
        np.concatenate([a.y, b.y, np.tile(s, 3)]),
        np.concatenate([a.added, b.added, np.ones(3 * k, dtype=bool)]),
        max(a.n, b.n),
    )


@dataclass(frozen=True)
class ArboralStats:
    trace_keys: int  # sum of |accessed_keys| over the trace
    placed_keys: int  # sum of keys placed after completion
    attempted: int  # three accesses per placed key
    added: int  # distinct added points in the result


def _check_trace(n: int, trace: MergeTrace) -> None:
    if trace.n != n:
        raise TraceError(f"trace is for {trace.n} keys, permutation has {n}")
    done = set()
    for r in trace:
        if not (0 <= r.lo < r.mid < r.hi <= n):
            raise TraceError(f"bad ranges {r.left} {r.right}")
        for lo, hi in (r.left, r.right):
            if hi - lo > 1:
                if (lo, hi) not in done:
                    raise TraceError(f"range {lo}..{hi} merged before it was sorted")
                done.discard((lo, hi))
        done.add((r.lo, r.hi))
    if n > 1 and done != {(0, n)}:
        raise TraceError("trace does not end in one merge over all positions")


def arboral_mergesort_stats(p: Permutation, trace: MergeTrace) -> tuple[PointSet, ArboralStats]:
    """Replay ``trace`` geometrically; return the satisfied set and access counts."""
    n = len(p)
    _check_trace(n, trace)
    keys_at = np.asarray(p.entries, dtype=np.int64)
    inv = np.empty(n, dtype=np.int64)
    inv[keys_at] = np.arange(n)
    first_x = inv.copy()
    last_x = inv.copy()
    side = np.zeros(n, dtype=np.int8)
    add_x: list[np.ndarray] = []
    add_y: list[np.ndarray] = []
    placed = 0
    for r in trace:
        keys = np.sort(keys_at[r.lo:r.hi])
        side[keys_at[r.lo:r.mid]] = 0
        side[keys_at[r.mid:r.hi]] = 1
        sd = side[keys]
        edge = np.ones(len(keys), dtype=bool)
        edge[1:-1] = (sd[1:-1] != sd[:-2]) | (sd[1:-1] != sd[2:])
        accessed = np.array(sorted(r.accessed_keys), dtype=np.int64)
        chosen = np.searchsorted(keys, accessed)
        if len(accessed) and (chosen.max() >= len(keys) or not np.array_equal(keys[chosen], accessed)):
            raise TraceError(f"merge {r.left}+{r.right} accessed keys outside its range")
        if not np.all(np.isin(keys[edge], accessed)):
            raise TraceError(f"merge {r.left}+{r.right} misses a block boundary")
        chosen = top_tree_closure(chosen, first_x[keys], last_x[keys])
        s = keys[chosen]
        placed += len(s)
        k = len(s)
        add_x.append(np.concatenate([np.full(k, r.lo), np.full(k, r.mid - 1), np.full(k, r.hi - 1)]))
        add_y.append(np.tile(s, 3))
        first_x[s] = r.lo
        last_x[s] = r.hi - 1
    ax = np.concatenate(add_x) if add_x else np.zeros(0, dtype=np.int64)
    ay = np.concatenate(add_y) if add_y else np.zeros(0, dtype=np.int64)
    out = PointSet.from_arrays(
        np.concatenate([np.arange(n), ax]),
        np.concatenate([keys_at, ay]),
        np.concatenate([np.zeros(n, dtype=bool), np.ones(len(ax), dtype=bool)]),
        n,
    )
    return out, ArboralStats(trace.access_count, placed, 3 * placed, out.added_count)


def arboral_mergesort(p: Permutation, trace: MergeTrace) -> PointSet:
    return arboral_mergesort_stats(p, trace)[0]


def transpose(s: PointSet) -> PointSet:
    """Swap the time and key axes."""
    return PointSet.from_arrays(s.y, s.x, s.added, s.n)


# -- text and SVG ------------------------------------------------------------


def to_text(s: PointSet) -> str:
    return "".join(f"{p.x} {p.y} {'a' if p.origin == ADDED else 'o'}\n" for p in s)


def from_text(text: str, n: int | None = None) -> PointSet:
    pts = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split()
        if len(parts) != 3 or parts[2] not in ("o", "a"):
            raise GeometryError(f"line {lineno}: expected 'x y o|a', got {line!r}")
        try:
            x, y = int(parts[0]), int(parts[1])
        except ValueError:
            raise GeometryError(f"line {lineno}: non-integer coordinate in {line!r}") from None
        pts.append(Point(x, y, ADDED if parts[2] == "a" else ORIGINAL))
    return PointSet(pts, n)


def render_svg(s: PointSet, cell: int = 20) -> str:
    """Grid with originals as filled squares and added points as circles; key 0 at the bottom."""
    n = s.n
    pad = cell
    size = n * cell + 2 * pad
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect class="background" x="0" y="0" width="{size}" height="{size}" fill="white"/>',
        '<g class="grid" stroke="#d0d0d0" stroke-width="1">',
    ]
    for i in range(n + 1):
        c = pad + i * cell
        out.append(f'<line x1="{c}" y1="{pad}" x2="{c}" y2="{pad + n * cell}"/>')
        out.append(f'<line x1="{pad}" y1="{c}" x2="{pad + n * cell}" y2="{c}"/>')
    out.append("</g>")
    half = cell / 2
    for p in s:
        cx = pad + p.x * cell + half
        cy = pad + (n - 1 - p.y) * cell + half
        if p.origin == ORIGINAL:
            w = cell * 0.7
            out.append(
                f'<rect class="original" x="{cx - w / 2:g}" y="{cy - w / 2:g}" width="{w:g}" height="{w:g}" fill="#1f5fbf"/>'
            )
        else:
            out.append(f'<circle class="added" cx="{cx:g}" cy="{cy:g}" r="{cell * 0.22:g}" fill="#d03030"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
