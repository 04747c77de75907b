"""Lifted booleans {-1, 0, 1} ordered 0 <= 1 <= -1.

-1 is the top element (unknown / uninitialized) and 0 the bottom (no heap
item held).  ``meet`` treats -1 as identity and 0 as absorbing; ``join``
is the dual, with -1 absorbing.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

TOP = -1
BOTTOM = 0
HEAP = 1
VALUES = (0, 1, -1)


def meet(a: int, b: int) -> int:
    if a == TOP:
        return b
    if b == TOP:
        return a
    return a if a < b else b


def join(a: int, b: int) -> int:
    if a == TOP or b == TOP:
        return TOP
    return a if a > b else b


def leq(a: int, b: int) -> bool:
    """Lattice order: ``a <= b`` iff ``meet(a, b) == a``."""
    return meet(a, b) == a


def meet_all(values: Iterable[int]) -> int:
    return reduce(meet, values, TOP)


def join_all(values: Iterable[int]) -> int:
    """Join of a (possibly empty) collection; the empty join is 0."""
    return reduce(join, values, BOTTOM)


def meet_vec(a: Sequence[int], b: Sequence[int]) -> tuple[int, ...]:
    if len(a) != len(b):
        raise ValueError(f"width mismatch: {len(a)} vs {len(b)}")
    return tuple(meet(x, y) for x, y in zip(a, b))


def negate(bits: Sequence[int]) -> tuple[int, ...]:
    """Flip 0/1 bits of a constructor vector."""
    return tuple(0 if b == 1 else 1 for b in bits)
