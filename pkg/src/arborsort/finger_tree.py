"""Ordered integer sets with split and join priced by the smaller side.

The structure is a 2-3 finger tree (Hinze and Paterson) annotated with
``(size, min key, max key)``. Its outermost digits act as fingers on both
ends of the order, which gives the bounds the adaptive sorts rely on:

* ``split`` at a point with ``i`` keys on the near side walks
  ``O(log(min(i, n - i) + 1))`` spine levels;
* ``join`` of trees with ``n1`` and ``n2`` keys descends
  ``O(log(min(n1, n2) + 1))`` levels before one side bottoms out;
* ``min`` / ``max`` read a cached annotation.

Push and pop at the ends are amortized ``O(1)``: a digit overflowing to five
items pushes one 3-node a level down and leaves two, so at least two cheap
operations separate two cascades at any level. The bounds above are therefore
amortized, which is all the sorts need.

Trees are immutable; every operation returns new trees and leaves its
arguments intact, so different tasks may share them freely. Costs are
charged to a caller-supplied :class:`CostMeter`: one access per spine level
visited and per node built.
"""

from __future__ import annotations

from collections.abc import Iterable, Iterator
from dataclasses import dataclass

__all__ = [
    "CostMeter",
    "FingerTree",
    "KeyOrderError",
    "build",
    "split",
    "split_at",
    "join",
    "kth",
    "validate",
]


@dataclass(slots=True)
class CostMeter:
    """Work counters for one task.

    ``span`` tracks the critical path: sequential charges add to it, while
    :meth:`join_parallel` adds only the longer of two forked children.
    The tree internals below bump ``accesses`` and ``span`` inline instead
    of calling :meth:`charge`; it is their hottest path.
    """

    accesses: int = 0
    comparisons: int = 0
    splits: int = 0
    joins: int = 0
    span: int = 0

    def charge(self, accesses: int = 1, comparisons: int = 0) -> None:
        self.accesses += accesses
        self.span += accesses
        self.comparisons += comparisons

    def fork(self) -> tuple[CostMeter, CostMeter]:
        return CostMeter(), CostMeter()

    def join_parallel(self, left: CostMeter, right: CostMeter) -> None:
        self.accesses += left.accesses + right.accesses
        self.comparisons += left.comparisons + right.comparisons
        self.splits += left.splits + right.splits
        self.joins += left.joins + right.joins
        self.span += max(left.span, right.span)

    def __add__(self, other: CostMeter) -> CostMeter:
        return CostMeter(
            self.accesses + other.accesses,
            self.comparisons + other.comparisons,
            self.splits + other.splits,
            self.joins + other.joins,
            self.span + other.span,
        )


class KeyOrderError(ValueError):
    pass


# Items at depth 0 are plain ints; deeper items are _Node instances.


class _Node:
    __slots__ = ("size", "lo", "hi", "kids")

    def __init__(self, kids: tuple):
        self.kids = kids
        a, z = kids[0], kids[-1]
        if type(a) is int:
            self.lo, self.hi, self.size = a, z, len(kids)
            return
        self.lo, self.hi = a.lo, z.hi
        s = 0
        for k in kids:
            s += k.size
        self.size = s


def _isize(x) -> int:
    return 1 if type(x) is int else x.size


def _ilo(x) -> int:
    return x if type(x) is int else x.lo


def _ihi(x) -> int:
    return x if type(x) is int else x.hi


class _Single:
    __slots__ = ("x", "size", "lo", "hi")

    def __init__(self, x):
        self.x = x
        if type(x) is int:
            self.size, self.lo, self.hi = 1, x, x
        else:
            self.size, self.lo, self.hi = x.size, x.lo, x.hi


class _Deep:
    __slots__ = ("pr", "m", "sf", "size", "lo", "hi")

    def __init__(self, pr: tuple, m, sf: tuple):
        self.pr, self.m, self.sf = pr, m, sf
        s = 0 if m is None else m.size
        a, z = pr[0], sf[-1]
        if type(a) is int:
            # all items of a level share a depth, so keys here mean all keys
            self.size = s + len(pr) + len(sf)
            self.lo, self.hi = a, z
            return
        for x in pr:
            s += x.size
        for x in sf:
            s += x.size
        self.size = s
        self.lo, self.hi = a.lo, z.hi


def _cons(a, t, mt: CostMeter):
    mt.accesses += 1
    mt.span += 1
    if t is None:
        return _Single(a)
    if type(t) is _Single:
        return _Deep((a,), None, (t.x,))
    pr = t.pr
    if len(pr) == 4:
        mt.accesses += 1
        mt.span += 1
        return _Deep((a, pr[0]), _cons(_Node(pr[1:]), t.m, mt), t.sf)
    return _Deep((a,) + pr, t.m, t.sf)


def _snoc(t, a, mt: CostMeter):
    mt.accesses += 1
    mt.span += 1
    if t is None:
        return _Single(a)
    if type(t) is _Single:
        return _Deep((t.x,), None, (a,))
    sf = t.sf
    if len(sf) == 4:
        mt.accesses += 1
        mt.span += 1
        return _Deep(t.pr, _snoc(t.m, _Node(sf[:3]), mt), (sf[3], a))
    return _Deep(t.pr, t.m, sf + (a,))


def _from_items(items: tuple, mt: CostMeter):
    t = None
    for x in items:
        t = _snoc(t, x, mt)
    return t


def _viewl(t, mt: CostMeter):
    """(first item, rest) of a non-empty tree."""
    mt.accesses += 1
    mt.span += 1
    if type(t) is _Single:
        return t.x, None
    pr = t.pr
    if len(pr) > 1:
        return pr[0], _Deep(pr[1:], t.m, t.sf)
    return pr[0], _pull_left(t.m, t.sf, mt)


def _viewr(t, mt: CostMeter):
    mt.accesses += 1
    mt.span += 1
    if type(t) is _Single:
        return None, t.x
    sf = t.sf
    if len(sf) > 1:
        return _Deep(t.pr, t.m, sf[:-1]), sf[-1]
    return _pull_right(t.pr, t.m, mt), sf[-1]


def _pull_left(m, sf: tuple, mt: CostMeter):
    # rebuild a tree whose prefix digit went empty
    if m is None:
        return _from_items(sf, mt)
    node, rest = _viewl(m, mt)
    return _Deep(node.kids, rest, sf)


def _pull_right(pr: tuple, m, mt: CostMeter):
    if m is None:
        return _from_items(pr, mt)
    rest, node = _viewr(m, mt)
    return _Deep(pr, rest, node.kids)


def _deep_l(pr: tuple, m, sf: tuple, mt: CostMeter):
    if pr:
        return _Deep(pr, m, sf)
    return _pull_left(m, sf, mt)


def _deep_r(pr: tuple, m, sf: tuple, mt: CostMeter):
    if sf:
        return _Deep(pr, m, sf)
    return _pull_right(pr, m, mt)


def _first_ge(items: tuple, k: int, mt: CostMeter) -> int:
    for i, x in enumerate(items):
        mt.comparisons += 1
        if (x if type(x) is int else x.hi) >= k:
            return i
    raise AssertionError("no item reaches the probe")


def _split_key(t, k: int, mt: CostMeter):
    """Split non-empty ``t`` with ``t.hi >= k`` into (< k part, item holding the split, rest).

    The middle item is the first whose largest key is ``>= k``. The near-end
    checks come first so the descent stops at the first spine level whose
    digits cover the split point.
    """
    mt.accesses += 1
    mt.span += 1
    if type(t) is _Single:
        return None, t.x, None
    pr = t.pr
    mt.comparisons += 1
    if _ihi(pr[-1]) >= k:
        i = _first_ge(pr, k, mt)
        return _from_items(pr[:i], mt), pr[i], _deep_l(pr[i + 1:], t.m, t.sf, mt)
    m = t.m
    sf = t.sf
    if m is not None:
        mt.comparisons += 1
        if m.hi >= k:
            ml, node, mr = _split_key(m, k, mt)
            kids = node.kids
            i = _first_ge(kids, k, mt)
            return _deep_r(pr, ml, kids[:i], mt), kids[i], _deep_l(kids[i + 1:], mr, sf, mt)
    i = _first_ge(sf, k, mt)
    return _deep_r(pr, m, sf[:i], mt), sf[i], _from_items(sf[i + 1:], mt)


def _split_top(t, k: int, mt: CostMeter):
    """(< k, >= k) halves of a tree with ``t.lo < k <= t.hi``.

    Same descent as :func:`_split_key`, but the digit holding the split
    point is cut in place, so the right half needs no cons.
    """
    mt.accesses += 1
    mt.span += 1
    pr = t.pr
    mt.comparisons += 1
    if _ihi(pr[-1]) >= k:
        # t.lo < k, so at least one prefix item stays left
        i = _first_ge(pr, k, mt)
        return _from_items(pr[:i], mt), _Deep(pr[i:], t.m, t.sf)
    m = t.m
    sf = t.sf
    if m is not None:
        mt.comparisons += 1
        if m.hi >= k:
            ml, node, mr = _split_key(m, k, mt)
            kids = node.kids
            i = _first_ge(kids, k, mt)
            return _deep_r(pr, ml, kids[:i], mt), _Deep(kids[i:], mr, sf)
    i = _first_ge(sf, k, mt)
    return _deep_r(pr, m, sf[:i], mt), _from_items(sf[i:], mt)


def _split_index(t, i: int, mt: CostMeter):
    """Split non-empty ``t`` at rank ``0 <= i < size`` into (before, item, after, rank in item)."""
    mt.accesses += 1
    mt.span += 1
    if type(t) is _Single:
        return None, t.x, None, i
    pr = t.pr
    acc = 0
    for j, x in enumerate(pr):
        s = _isize(x)
        if acc + s > i:
            return _from_items(pr[:j], mt), x, _deep_l(pr[j + 1:], t.m, t.sf, mt), i - acc
        acc += s
    m = t.m
    msize = 0 if m is None else m.size
    if i < acc + msize:
        ml, node, mr, off = _split_index(m, i - acc, mt)
        acc2 = 0
        kids = node.kids
        for j, x in enumerate(kids):
            s = _isize(x)
            if acc2 + s > off:
                return (
                    _deep_r(pr, ml, kids[:j], mt),
                    x,
                    _deep_l(kids[j + 1:], mr, t.sf, mt),
                    off - acc2,
                )
            acc2 += s
    acc += msize
    sf = t.sf
    for j, x in enumerate(sf):
        s = _isize(x)
        if acc + s > i:
            return _deep_r(pr, m, sf[:j], mt), x, _from_items(sf[j + 1:], mt), i - acc
        acc += s
    raise IndexError(i)


def _lookup_index(t, i: int, mt: CostMeter) -> int:
    """Key of rank ``i`` without rebuilding anything."""
    item = None
    while True:
        mt.accesses += 1
        mt.span += 1
        if type(t) is _Single:
            item = t.x
            break
        acc = 0
        found = None
        for x in t.pr:
            s = _isize(x)
            if acc + s > i:
                found = x
                break
            acc += s
        if found is not None:
            item, i = found, i - acc
            break
        msize = 0 if t.m is None else t.m.size
        if i >= acc + msize:
            acc += msize
            for x in t.sf:
                s = _isize(x)
                if acc + s > i:
                    found = x
                    break
                acc += s
            item, i = found, i - acc
            break
        t, i = t.m, i - acc
    # descend through the nodes of the found item
    while type(item) is not int:
        mt.accesses += 1
        mt.span += 1
        for x in item.kids:
            s = _isize(x)
            if i < s:
                item = x
                break
            i -= s
    return item


def _nodes(items: list) -> list:
    out = []
    n = len(items)
    j = 0
    while n - j > 4:
        out.append(_Node(tuple(items[j:j + 3])))
        j += 3
    rest = n - j
    if rest == 4:
        out.append(_Node(tuple(items[j:j + 2])))
        out.append(_Node(tuple(items[j + 2:])))
    elif rest:
        out.append(_Node(tuple(items[j:])))
    return out


def _app3(t1, ts: list, t2, mt: CostMeter):
    mt.accesses += 1
    mt.span += 1
    if t1 is None:
        for x in reversed(ts):
            t2 = _cons(x, t2, mt)
        return t2
    if t2 is None:
        for x in ts:
            t1 = _snoc(t1, x, mt)
        return t1
    if type(t1) is _Single:
        return _cons(t1.x, _app3(None, ts, t2, mt), mt)
    if type(t2) is _Single:
        return _snoc(_app3(t1, ts, None, mt), t2.x, mt)
    middle = _nodes([*t1.sf, *ts, *t2.pr])
    mt.charge(len(middle))
    return _Deep(t1.pr, _app3(t1.m, middle, t2.m, mt), t2.sf)


class FingerTree:
    """Immutable ordered set of distinct ints.

    >>> t = build([1, 2, 5, 6])
    >>> lo, hi = split(t, 3)
    >>> list(lo), list(hi)
    ([1, 2], [5, 6])
    >>> list(join(lo, hi)) == list(t)
    True
    """

    __slots__ = ("_root",)

    def __init__(self, root=None):
        self._root = root

    def __len__(self) -> int:
        return 0 if self._root is None else self._root.size

    def __bool__(self) -> bool:
        return self._root is not None

    def __iter__(self) -> Iterator[int]:
        stack = [self._root]
        while stack:
            t = stack.pop()
            if t is None:
                continue
            if type(t) is int:
                yield t
            elif type(t) is _Node:
                stack.extend(reversed(t.kids))
            elif type(t) is _Single:
                stack.append(t.x)
            else:
                stack.extend(reversed(t.sf))
                stack.append(t.m)
                stack.extend(reversed(t.pr))

    def __repr__(self) -> str:
        keys = list(self)
        if len(keys) > 12:
            return f"FingerTree([{keys[0]}, ..., {keys[-1]}], size={len(keys)})"
        return f"FingerTree({keys})"

    def min(self, meter: CostMeter | None = None) -> int:
        if self._root is None:
            raise ValueError("min of an empty tree")
        if meter is not None:
            meter.charge()
        return self._root.lo

    def max(self, meter: CostMeter | None = None) -> int:
        if self._root is None:
            raise ValueError("max of an empty tree")
        if meter is not None:
            meter.charge()
        return self._root.hi


EMPTY = FingerTree()


def build(keys: Iterable[int], meter: CostMeter | None = None) -> FingerTree:
    """Tree holding ``keys``, which must be strictly increasing."""
    mt = meter if meter is not None else CostMeter()
    t = None
    prev = None
    for k in keys:
        k = int(k)
        if prev is not None and k <= prev:
            raise KeyOrderError(f"keys must be strictly increasing: {prev} then {k}")
        t = _snoc(t, k, mt)
        prev = k
    return FingerTree(t)


def singleton(key: int, meter: CostMeter | None = None) -> FingerTree:
    if meter is not None:
        meter.charge()
    return FingerTree(_Single(int(key)))


def split(t: FingerTree, k: int, meter: CostMeter | None = None) -> tuple[FingerTree, FingerTree]:
    """Partition into keys ``< k`` and keys ``>= k``; ``k`` need not be present."""
    mt = meter if meter is not None else CostMeter()
    mt.splits += 1
    mt.accesses += 1
    mt.span += 1
    mt.comparisons += 1
    root = t._root
    if root is None:
        return EMPTY, EMPTY
    if root.hi < k:
        return t, EMPTY
    mt.comparisons += 1
    if root.lo >= k:
        return EMPTY, t
    left, right = _split_top(root, k, mt)
    return FingerTree(left), FingerTree(right)


def split_at(t: FingerTree, i: int, meter: CostMeter | None = None) -> tuple[FingerTree, FingerTree]:
    """Partition into the ``i`` smallest keys and the rest."""
    mt = meter if meter is not None else CostMeter()
    mt.splits += 1
    mt.accesses += 1
    mt.span += 1
    n = len(t)
    if i <= 0:
        return EMPTY, t
    if i >= n:
        return t, EMPTY
    left, item, right, _ = _split_index(t._root, i, mt)
    return FingerTree(left), FingerTree(_cons(item, right, mt))


def kth(t: FingerTree, i: int, meter: CostMeter | None = None) -> int:
    """Key of rank ``i`` (0-based) by an order-statistics walk."""
    if not 0 <= i < len(t):
        raise IndexError(f"rank {i} out of range for size {len(t)}")
    mt = meter if meter is not None else CostMeter()
    return _lookup_index(t._root, i, mt)


def join(t1: FingerTree, t2: FingerTree, meter: CostMeter | None = None) -> FingerTree:
    """Union of two trees where every key of ``t1`` is below every key of ``t2``."""
    mt = meter if meter is not None else CostMeter()
    mt.joins += 1
    mt.accesses += 1
    mt.span += 1
    a, b = t1._root, t2._root
    if a is None:
        return t2
    if b is None:
        return t1
    mt.comparisons += 1
    if a.hi >= b.lo:
        raise KeyOrderError(f"join needs max(t1) < min(t2), got {a.hi} >= {b.lo}")
    if type(b) is _Single:
        return FingerTree(_snoc(a, b.x, mt))
    if type(a) is _Single:
        return FingerTree(_cons(a.x, b, mt))
    return FingerTree(_app3(a, [], b, mt))


def validate(t: FingerTree) -> None:
    """Check the 2-3 finger tree invariants and cached annotations; raise AssertionError."""

    def item(x, depth: int):
        if depth == 0:
            assert type(x) is int, "depth-0 item must be a key"
            return 1, x, x
        assert type(x) is _Node and len(x.kids) in (2, 3), "inner item must be a 2-3 node"
        size, lo, hi = 0, None, None
        for kid in x.kids:
            s, a, b = item(kid, depth - 1)
            assert hi is None or hi < a, "node keys out of order"
            lo = a if lo is None else lo
            size, hi = size + s, b
        assert (x.size, x.lo, x.hi) == (size, lo, hi), "stale node annotation"
        return size, lo, hi

    def digit(items: tuple, depth: int):
        assert 1 <= len(items) <= 4, "digit must hold 1-4 items"
        return [item(x, depth) for x in items]

    def tree(t, depth: int):
        if t is None:
            return []
        if type(t) is _Single:
            parts = [item(t.x, depth)]
        else:
            assert type(t) is _Deep
            parts = digit(t.pr, depth) + tree(t.m, depth + 1) + digit(t.sf, depth)
        size = sum(p[0] for p in parts)
        assert (t.size, t.lo, t.hi) == (size, parts[0][1], parts[-1][2]), "stale tree annotation"
        for (_, _, hi), (_, lo, _) in zip(parts, parts[1:]):
            assert hi < lo, "keys not strictly increasing"
        return parts

    tree(t._root, 0)
