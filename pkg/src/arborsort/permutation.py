"""Permutations of ``0..n-1``: validation, inversion, text I/O and input generators.

A permutation doubles as an access sequence: ``entries[i]`` is the key
touched at time ``i``. Keys are 0-based.

The text format is one decimal integer per line, LF line endings::

    >>> p = parse("0\\n4\\n2\\n6\\n1\\n5\\n3\\n7\\n")
    >>> p == gen_bit_reversal(8)
    True
    >>> serialize(inverse(Permutation([2, 0, 1])))
    '1\\n2\\n0\\n'
"""

from __future__ import annotations

import random
from collections.abc import Iterable, Iterator, Sequence
from dataclasses import dataclass

__all__ = [
    "Permutation",
    "PermutationError",
    "ParseError",
    "DuplicateValue",
    "OutOfRange",
    "NonInteger",
    "parse",
    "serialize",
    "inverse",
    "gen_sorted",
    "gen_reversed",
    "gen_random",
    "gen_bit_reversal",
    "gen_block_bit_reversal",
    "default_block_size",
    "bit_reverse",
    "generate",
    "FAMILIES",
]


class PermutationError(ValueError):
    """Raised for invalid permutations or generator arguments."""


class ParseError(PermutationError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class DuplicateValue(ParseError):
    pass


class OutOfRange(ParseError):
    pass


class NonInteger(ParseError):
    pass


@dataclass(frozen=True)
class Permutation(Sequence[int]):
    """A bijection on ``{0, ..., n-1}`` with ``n >= 1``."""

    entries: tuple[int, ...]

    def __init__(self, entries: Iterable[int]):
        values = tuple(int(v) for v in entries)
        n = len(values)
        if n == 0:
            raise PermutationError("a permutation needs at least one entry")
        seen = bytearray(n)
        for i, v in enumerate(values):
            if not 0 <= v < n:
                raise PermutationError(f"entry {i} = {v} is outside 0..{n - 1}")
            if seen[v]:
                raise PermutationError(f"value {v} appears more than once")
            seen[v] = 1
        object.__setattr__(self, "entries", values)

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, i):
        return self.entries[i]

    def __iter__(self) -> Iterator[int]:
        return iter(self.entries)

    def __repr__(self) -> str:
        return f"Permutation({list(self.entries)!r})"

    @property
    def n(self) -> int:
        return len(self.entries)


def parse(text: str) -> Permutation:
    """Parse the one-integer-per-line format, reporting errors by 1-based line."""
    lines = text.split("\n")
    # a single trailing newline produces one empty final field
    if lines and lines[-1] == "":
        lines.pop()
    raw: list[int] = []
    for lineno, line in enumerate(lines, start=1):
        token = line.strip()
        try:
            raw.append(int(token))
        except ValueError:
            raise NonInteger(lineno, f"expected an integer, got {token!r}") from None
    n = len(raw)
    if n == 0:
        raise PermutationError("empty permutation")
    first_seen: dict[int, int] = {}
    for lineno, v in enumerate(raw, start=1):
        if not 0 <= v < n:
            raise OutOfRange(lineno, f"value {v} is outside 0..{n - 1}")
        if v in first_seen:
            raise DuplicateValue(lineno, f"value {v} already appeared on line {first_seen[v]}")
        first_seen[v] = lineno
    return Permutation(raw)


def serialize(p: Permutation) -> str:
    return "".join(f"{v}\n" for v in p)


def inverse(p: Permutation) -> Permutation:
    q = [0] * len(p)
    for i, v in enumerate(p):
        q[v] = i
    return Permutation(q)


def _check_size(n: int) -> None:
    if n < 1:
        raise PermutationError(f"size must be at least 1, got {n}")


def gen_sorted(n: int) -> Permutation:
    _check_size(n)
    return Permutation(range(n))


def gen_reversed(n: int) -> Permutation:
    _check_size(n)
    return Permutation(range(n - 1, -1, -1))


def gen_random(n: int, seed: int) -> Permutation:
    """Uniform random permutation.

    Uses the standard library Mersenne Twister seeded with ``seed`` and its
    Fisher-Yates ``shuffle``; both are specified independently of platform,
    so a given ``(n, seed)`` always yields the same permutation.
    """
    _check_size(n)
    values = list(range(n))
    random.Random(seed).shuffle(values)
    return Permutation(values)


def bit_reverse(i: int, bits: int) -> int:
    """Reverse the low ``bits`` bits of ``i``."""
    out = 0
    for _ in range(bits):
        out = (out << 1) | (i & 1)
        i >>= 1
    return out


def _log2_exact(n: int) -> int:
    if n < 1 or n & (n - 1):
        raise PermutationError(f"{n} is not a power of two")
    return n.bit_length() - 1


def gen_bit_reversal(n: int) -> Permutation:
    k = _log2_exact(n)
    return Permutation(bit_reverse(i, k) for i in range(n))


def default_block_size(n: int) -> int:
    """``floor(lg n)``, lowered until it divides ``n`` into a power-of-two number of blocks."""
    _check_size(n)
    block = max(1, n.bit_length() - 1)
    while block > 1:
        if n % block == 0:
            m = n // block
            if m & (m - 1) == 0:
                break
        block -= 1
    return block


def gen_block_bit_reversal(n: int, block_size: int | None = None) -> Permutation:
    """Sorted list cut into equal blocks, blocks reordered by bit reversal.

    >>> list(gen_block_bit_reversal(16, 4))
    [0, 1, 2, 3, 8, 9, 10, 11, 4, 5, 6, 7, 12, 13, 14, 15]
    """
    _check_size(n)
    if block_size is None:
        block_size = default_block_size(n)
    if block_size < 1 or n % block_size:
        raise PermutationError(f"block size {block_size} does not divide {n}")
    blocks = n // block_size
    k = _log2_exact(blocks)
    out: list[int] = []
    for b in range(blocks):
        start = bit_reverse(b, k) * block_size
        out.extend(range(start, start + block_size))
    return Permutation(out)


FAMILIES = ("sorted", "reversed", "random", "bitrev", "blockbitrev")


def generate(family: str, n: int, *, seed: int = 0, block: int | None = None) -> Permutation:
    """Dispatch to a generator by family name."""
    if family == "sorted":
        return gen_sorted(n)
    if family == "reversed":
        return gen_reversed(n)
    if family == "random":
        return gen_random(n, seed)
    if family == "bitrev":
        return gen_bit_reversal(n)
    if family == "blockbitrev":
        return gen_block_bit_reversal(n, block)
    raise PermutationError(f"unknown family {family!r}; expected one of {', '.join(FAMILIES)}")
