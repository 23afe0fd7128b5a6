"""Interleave bound (IB) and log-interleave bound (LIB) over a static tree.

The static tree has the input positions as its leaves, left to right. For an
internal vertex, visit the keys stored below it in increasing key order and
label each one ``L`` or ``R`` by the child subtree holding it. The vertex
contributes

* ``ib``  = number of label switches (runs - 1), and
* ``lib`` = sum over maximal runs of ``log2(run_length + 1)``.

Totals sum over all internal vertices. The default tree is perfectly balanced
with the larger half on the left; a different shape can be passed as a
nested-parentheses string (``.`` is a leaf, ``(A B)`` an internal vertex).
The totals are always for the chosen tree, never a maximum over trees.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from itertools import groupby

import numpy as np

from .permutation import Permutation

__all__ = [
    "Vertex",
    "InterleaveTree",
    "VertexBound",
    "BoundReport",
    "ShapeError",
    "build_tree",
    "parse_shape",
    "label_vertex",
    "runs",
    "ib_vertex",
    "lib_vertex",
    "compute_bounds",
    "bounds_to_csv",
    "bounds_from_csv",
]

CSV_HEADER = ("vertex_level", "vertex_index", "leaves", "ib", "lib")


class ShapeError(ValueError):
    pass


@dataclass(frozen=True)
class Vertex:
    """Internal vertex covering positions ``[lo, hi)``; the left child is ``[lo, mid)``."""

    level: int
    index: int
    lo: int
    mid: int
    hi: int

    @property
    def id(self) -> tuple[int, int]:
        return (self.level, self.index)

    @property
    def leaves(self) -> int:
        return self.hi - self.lo


class InterleaveTree:
    """Static binary tree over positions ``0..n-1``.

    Vertices are addressed by ``(level, index)``: the root is ``(0, 0)`` and
    ``index`` counts internal vertices of a level from left to right.
    """

    def __init__(self, n: int, splits: Sequence[tuple[int, int, int, int]]):
        # splits: (level, lo, mid, hi) for each internal vertex
        self.n = n
        ordered = sorted(splits)
        vertices: list[Vertex] = []
        index = 0
        prev_level = None
        for level, lo, mid, hi in ordered:
            if level != prev_level:
                index, prev_level = 0, level
            vertices.append(Vertex(level, index, lo, mid, hi))
            index += 1
        self.vertices: tuple[Vertex, ...] = tuple(vertices)
        self._by_id = {v.id: v for v in vertices}

    @classmethod
    def balanced(cls, n: int) -> InterleaveTree:
        splits = []
        stack = [(0, 0, n)]
        while stack:
            level, lo, hi = stack.pop()
            if hi - lo < 2:
                continue
            mid = lo + (hi - lo + 1) // 2
            splits.append((level, lo, mid, hi))
            stack.append((level + 1, lo, mid))
            stack.append((level + 1, mid, hi))
        return cls(n, splits)

    @classmethod
    def from_shape(cls, shape: str) -> InterleaveTree:
        nested = parse_shape(shape)
        splits: list[tuple[int, int, int, int]] = []

        def place(node, level: int, lo: int) -> int:
            if node is None:
                return lo + 1
            mid = place(node[0], level + 1, lo)
            hi = place(node[1], level + 1, mid)
            splits.append((level, lo, mid, hi))
            return hi

        n = place(nested, 0, 0)
        return cls(n, splits)

    def __getitem__(self, vid: tuple[int, int]) -> Vertex:
        return self._by_id[vid]

    def __contains__(self, vid) -> bool:
        return vid in self._by_id

    def __len__(self) -> int:
        return len(self.vertices)

    @property
    def root(self) -> Vertex | None:
        return self.vertices[0] if self.vertices else None

    @property
    def depth(self) -> int:
        return self.vertices[-1].level + 1 if self.vertices else 0


def parse_shape(text: str):
    """Parse ``.``/``(A B)`` notation into nested pairs, with ``None`` for leaves."""
    tokens = [c for c in text if not c.isspace()]
    pos = 0

    def node():
        nonlocal pos
        if pos >= len(tokens):
            raise ShapeError("unexpected end of shape")
        c = tokens[pos]
        pos += 1
        if c == ".":
            return None
        if c != "(":
            raise ShapeError(f"unexpected {c!r} at token {pos}")
        left = node()
        right = node()
        if pos >= len(tokens) or tokens[pos] != ")":
            raise ShapeError(f"expected ')' at token {pos + 1}")
        pos += 1
        return (left, right)

    tree = node()
    if pos != len(tokens):
        raise ShapeError(f"trailing input at token {pos + 1}")
    return tree


def build_tree(p: Permutation | int, shape: str | None = None) -> InterleaveTree:
    n = p if isinstance(p, int) else len(p)
    if shape is None:
        return InterleaveTree.balanced(n)
    tree = InterleaveTree.from_shape(shape)
    if tree.n != n:
        raise ShapeError(f"shape has {tree.n} leaves but the permutation has {n} entries")
    return tree


def label_vertex(t: InterleaveTree, p: Permutation, v) -> str:
    """Labels of the keys below ``v``, in increasing key order, as an ``L``/``R`` string."""
    vid = v.id if isinstance(v, Vertex) else tuple(v)
    if vid not in t:
        raise KeyError(f"{vid} is not an internal vertex")
    vert = t[vid]
    side = {p[i]: ("L" if i < vert.mid else "R") for i in range(vert.lo, vert.hi)}
    return "".join(side[k] for k in sorted(side))


def runs(labels: Sequence[str]) -> list[int]:
    if len(labels) == 0:
        raise ValueError("empty label sequence")
    return [sum(1 for _ in group) for _, group in groupby(labels)]


def ib_vertex(labels: Sequence[str]) -> int:
    return len(runs(labels)) - 1


def lib_vertex(labels: Sequence[str]) -> float:
    return math.fsum(math.log2(r + 1) for r in runs(labels))


@dataclass(frozen=True)
class VertexBound:
    leaves: int
    ib: int
    lib: float
    run_lengths: tuple[int, ...] | None = field(default=None, compare=False)


@dataclass
class BoundReport:
    n: int
    ib_total: int
    lib_total: float
    per_vertex: dict[tuple[int, int], VertexBound]

    @property
    def ratio(self) -> float:
        """``lib_total / ib_total``, or ``inf`` when ``ib_total`` is zero."""
        return self.lib_total / self.ib_total if self.ib_total else math.inf


def compute_bounds(p: Permutation, tree: InterleaveTree | None = None, *, detail: bool = True) -> BoundReport:
    """IB and LIB of ``p`` over ``tree`` (balanced by default).

    Works level by level: every position belongs to at most one internal
    vertex per level, so one stable sort of the key-ordered positions by
    vertex gives every label sequence of that level at once.
    With ``detail=False`` the per-vertex map is left empty.
    """
    n = len(p)
    if tree is None:
        tree = InterleaveTree.balanced(n)
    elif tree.n != n:
        raise ShapeError(f"tree has {tree.n} leaves but the permutation has {n} entries")

    inv = np.empty(n, dtype=np.int64)
    inv[np.asarray(p.entries, dtype=np.int64)] = np.arange(n, dtype=np.int64)

    by_level: dict[int, list[Vertex]] = {}
    for v in tree.vertices:
        by_level.setdefault(v.level, []).append(v)

    per_vertex: dict[tuple[int, int], VertexBound] = {}
    ib_parts: list[int] = []
    lib_parts: list[float] = []
    for level in sorted(by_level):
        verts = by_level[level]
        owner = np.full(n, -1, dtype=np.int64)
        side = np.zeros(n, dtype=np.int8)
        for v in verts:
            owner[v.lo:v.hi] = v.index
            side[v.mid:v.hi] = 1
        own = owner[inv]
        sd = side[inv]
        keep = own >= 0
        own, sd = own[keep], sd[keep]
        order = np.argsort(own, kind="stable")
        own, sd = own[order], sd[order]

        m = len(own)
        new_run = np.ones(m, dtype=bool)
        new_run[1:] = (own[1:] != own[:-1]) | (sd[1:] != sd[:-1])
        run_starts = np.flatnonzero(new_run)
        run_len = np.diff(np.append(run_starts, m))
        run_owner = own[run_starts]
        run_bits = np.log2(run_len + 1.0)

        first_run = np.flatnonzero(np.r_[True, run_owner[1:] != run_owner[:-1]])
        run_counts = np.diff(np.append(first_run, len(run_owner)))
        vertex_lib = np.add.reduceat(run_bits, first_run)

        for j, v in enumerate(verts):
            ib = int(run_counts[j]) - 1
            lib = float(vertex_lib[j])
            ib_parts.append(ib)
            lib_parts.append(lib)
            if detail:
                a = first_run[j]
                per_vertex[v.id] = VertexBound(
                    v.leaves, ib, lib, tuple(run_len[a:a + run_counts[j]].tolist())
                )
    return BoundReport(n, sum(ib_parts), math.fsum(lib_parts), per_vertex)


def bounds_to_csv(report: BoundReport) -> str:
    """Per-vertex rows in vertex-id order, then a ``total`` row."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for (level, index), vb in sorted(report.per_vertex.items()):
        w.writerow((level, index, vb.leaves, vb.ib, repr(vb.lib)))
    w.writerow(("total", "", report.n, report.ib_total, repr(report.lib_total)))
    return buf.getvalue()


def bounds_from_csv(text: str) -> BoundReport:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != CSV_HEADER:
        raise ValueError("missing or unexpected bounds CSV header")
    if len(rows) < 2 or rows[-1][0] != "total":
        raise ValueError("bounds CSV has no totals row")
    per_vertex = {
        (int(r[0]), int(r[1])): VertexBound(int(r[2]), int(r[3]), float(r[4])) for r in rows[1:-1]
    }
    total = rows[-1]
    return BoundReport(int(total[2]), int(total[3]), float(total[4]), per_vertex)
