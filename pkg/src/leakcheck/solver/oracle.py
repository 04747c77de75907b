"""Exhaustive 3^n enumeration, vectorized with numpy.

Evaluates the high-level assertions directly, sharing nothing with the
compiled propagation path; used as a test oracle on small systems.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from ..constraints import Atom, ConstraintSystem, Disj, Eq, EqConst, EqExt, EqMeet, EqSrk, Slice

MAX_SCALARS = 14


def _meet(a, b):
    return np.where(a == -1, b, np.where(b == -1, a, np.minimum(a, b)))


def _join(a, b):
    return np.where((a == -1) | (b == -1), -1, np.maximum(a, b))


@lru_cache(maxsize=None)
def _assignments(n: int) -> np.ndarray:
    """All 3^n rows over (0, 1, -1), first column most significant."""
    codes = np.arange(3**n, dtype=np.int64)
    digits = (codes[:, None] // 3 ** np.arange(n - 1, -1, -1, dtype=np.int64)) % 3
    grid = np.array([0, 1, -1], dtype=np.int8)[digits]
    grid.flags.writeable = False
    return grid


class _Grid:
    def __init__(self, sys: ConstraintSystem):
        self.cols = {}
        for v in sys.variables:
            for i in range(v.width):
                self.cols[(v, i)] = len(self.cols)
        n = len(self.cols)
        if n > MAX_SCALARS:
            raise ValueError(f"{n} scalars is too many for exhaustive enumeration")
        self.values = _assignments(n)

    def col(self, s: Slice, i: int):
        return self.values[:, self.cols[(s.var, s.bits[i])]]

    def const(self, v: int):
        return np.full(self.values.shape[0], v, dtype=np.int8)

    def atom(self, a: Atom):
        ok = np.ones(self.values.shape[0], dtype=bool)
        if isinstance(a, Eq):
            for i in range(len(a.lhs)):
                ok &= self.col(a.lhs, i) == self.col(a.rhs, i)
        elif isinstance(a, EqConst):
            for i, v in enumerate(a.value):
                ok &= self.col(a.lhs, i) == v
        elif isinstance(a, EqMeet):
            for i in range(len(a.lhs)):
                acc = self.const(-1)
                for o in a.operands:
                    acc = _meet(acc, self.col(o, i))
                if a.mask is not None:
                    acc = _meet(acc, self.const(a.mask[i]))
                ok &= self.col(a.lhs, i) == acc
        elif isinstance(a, (EqExt, EqSrk)):
            acc = self.const(0)
            for i in range(len(a.src)):
                acc = _join(acc, self.col(a.src, i))
            if isinstance(a, EqSrk):
                ok &= self.col(a.target, 0) == acc
            else:
                for i, m in enumerate(a.mask):
                    ok &= self.col(a.target, i) == _meet(acc, self.const(m))
        else:
            raise TypeError(a)
        return ok


def satisfying_rows(sys: ConstraintSystem, assertions=None):
    """(grid of all assignments, boolean mask of the satisfying rows)."""
    grid = _Grid(sys)
    ok = np.ones(grid.values.shape[0], dtype=bool)
    for asn in sys.assertions if assertions is None else assertions:
        body = asn.body
        if isinstance(body, Disj):
            any_branch = np.zeros_like(ok)
            for branch in body.branches:
                b = np.ones_like(ok)
                for atom in branch:
                    b &= grid.atom(atom)
                any_branch |= b
            ok &= any_branch
        else:
            ok &= grid.atom(body)
    return grid, ok


def brute_force_status(sys: ConstraintSystem, assertions=None) -> str:
    _, ok = satisfying_rows(sys, assertions)
    return "SAT" if ok.any() else "UNSAT"


def brute_force_model_count(sys: ConstraintSystem) -> int:
    _, ok = satisfying_rows(sys)
    return int(ok.sum())
