"""Lower assertions to n-ary MEET/JOIN fold constraints over scalar ids.

Scalars 0..2 are the constants 0, 1 and -1.  Each remaining id is one bit of
a version, or an auxiliary join result used by Ext.  Domains are 3-bit masks.
"""

from __future__ import annotations

from array import array
from dataclasses import dataclass, field

from ..constraints import (
    Assertion,
    Atom,
    ConstraintSystem,
    Disj,
    Eq,
    EqConst,
    EqExt,
    EqMeet,
    EqSrk,
    Slice,
    VarVersion,
)

OP_MEET = 0
OP_JOIN = 1

# value -> domain bit
BIT = {0: 1, 1: 2, -1: 4}
VALUE_OF_BIT = {1: 0, 2: 1, 4: -1}
FULL = 7
K = {0: 0, 1: 1, -1: 2}


def _meet(a: int, b: int) -> int:
    if a == -1:
        return b
    if b == -1:
        return a
    return min(a, b)


def _join(a: int, b: int) -> int:
    if a == -1 or b == -1:
        return -1
    return max(a, b)


def _set_table() -> bytes:
    """``table[op*64 + A*8 + B]`` = mask of ``op(a, b)`` over ``a in A, b in B``."""
    out = bytearray(128)
    for op, fn in ((OP_MEET, _meet), (OP_JOIN, _join)):
        for A in range(8):
            for B in range(8):
                m = 0
                for a_bit, a in VALUE_OF_BIT.items():
                    if not A & a_bit:
                        continue
                    for b_bit, b in VALUE_OF_BIT.items():
                        if B & b_bit:
                            m |= BIT[fn(a, b)]
                out[op * 64 + A * 8 + B] = m
    return bytes(out)


TABLE = _set_table()
IDENTITY = (BIT[-1], BIT[0])  # per op


@dataclass
class Compiled:
    n_scalars: int
    var_ids: dict[tuple[VarVersion, int], int]
    op: array
    tgt: array
    sstart: array
    slen: array
    srcs: array
    cgroup: array
    wstart: array
    wlist: array
    group_constraints: list[list[int]]
    disjunctions: list[tuple[int, list[int]]]  # (assertion index, branch groups)
    origin: list[int]  # constraint -> assertion index
    labelled: list[int] = field(default_factory=list)
    max_arity: int = 1

    def initial_domains(self) -> bytearray:
        dom = bytearray([FULL]) * self.n_scalars
        dom[K[0]], dom[K[1]], dom[K[-1]] = BIT[0], BIT[1], BIT[-1]
        return dom


class _Builder:
    def __init__(self, sys: ConstraintSystem):
        self.var_ids: dict[tuple[VarVersion, int], int] = {}
        self.n = 3
        for v in sys.variables:
            for i in range(v.width):
                self.var_ids[(v, i)] = self.n
                self.n += 1
        self.labelled = list(range(3, self.n))
        self.cons: list[tuple[int, int, list[int], int, int]] = []

    def sid(self, s: Slice, i: int) -> int:
        key = (s.var, s.bits[i])
        if key not in self.var_ids:
            raise ValueError(f"undeclared variable {s.var}")
        return self.var_ids[key]

    def temp(self) -> int:
        self.n += 1
        return self.n - 1

    def add(self, op: int, tgt: int, srcs: list[int], group: int, origin: int) -> None:
        if not srcs:
            op, srcs = OP_MEET, [K[0]]
        self.cons.append((op, tgt, srcs, group, origin))

    def join_of(self, s: Slice, group: int, origin: int) -> int:
        if len(s) == 1:
            return self.sid(s, 0)
        t = self.temp()
        self.add(OP_JOIN, t, [self.sid(s, i) for i in range(len(s))], group, origin)
        return t

    def atom(self, a: Atom, group: int, origin: int) -> None:
        if isinstance(a, Eq):
            self._check(len(a.lhs) == len(a.rhs), a)
            for i in range(len(a.lhs)):
                self.add(OP_MEET, self.sid(a.lhs, i), [self.sid(a.rhs, i)], group, origin)
        elif isinstance(a, EqConst):
            self._check(len(a.lhs) == len(a.value), a)
            for i, v in enumerate(a.value):
                self.add(OP_MEET, self.sid(a.lhs, i), [K[v]], group, origin)
        elif isinstance(a, EqMeet):
            self._check(all(len(o) == len(a.lhs) for o in a.operands), a)
            self._check(a.mask is None or len(a.mask) == len(a.lhs), a)
            for i in range(len(a.lhs)):
                srcs = [self.sid(o, i) for o in a.operands]
                if a.mask is not None:
                    srcs.append(K[a.mask[i]])
                self.add(OP_MEET, self.sid(a.lhs, i), srcs, group, origin)
        elif isinstance(a, EqExt):
            self._check(len(a.mask) == len(a.target), a)
            if len(a.target):
                j = self.join_of(a.src, group, origin) if len(a.src) else K[0]
                for i, m in enumerate(a.mask):
                    self.add(OP_MEET, self.sid(a.target, i), [j, K[m]], group, origin)
        elif isinstance(a, EqSrk):
            self._check(len(a.target) == 1, a)
            self.add(OP_JOIN, self.sid(a.target, 0), [self.sid(a.src, i) for i in range(len(a.src))],
                     group, origin)
        else:
            raise TypeError(a)

    @staticmethod
    def _check(ok: bool, a: Atom) -> None:
        if not ok:
            raise ValueError(f"width mismatch in {a}")


def compile_system(sys: ConstraintSystem, assertions: list[Assertion] | None = None) -> Compiled:
    assertions = sys.assertions if assertions is None else assertions
    b = _Builder(sys)
    n_groups = 1
    disjunctions: list[tuple[int, list[int]]] = []
    for idx, asn in enumerate(assertions):
        body = asn.body
        if isinstance(body, Disj):
            groups = []
            for branch in body.branches:
                g = n_groups
                n_groups += 1
                groups.append(g)
                for atom in branch:
                    b.atom(atom, g, idx)
            disjunctions.append((idx, groups))
        else:
            b.atom(body, 0, idx)

    op, tgt, sstart, slen, srcs, cgroup = (array("i") for _ in range(6))
    group_constraints: list[list[int]] = [[] for _ in range(n_groups)]
    watchers: list[list[int]] = [[] for _ in range(b.n)]
    origin = []
    max_arity = 1
    for c, (o, t, ss, g, org) in enumerate(b.cons):
        op.append(o)
        tgt.append(t)
        sstart.append(len(srcs))
        slen.append(len(ss))
        srcs.extend(ss)
        cgroup.append(g)
        group_constraints[g].append(c)
        origin.append(org)
        max_arity = max(max_arity, len(ss))
        for v in {t, *ss}:
            watchers[v].append(c)
    wstart, wlist = array("i"), array("i")
    for w in watchers:
        wstart.append(len(wlist))
        wlist.extend(w)
    wstart.append(len(wlist))
    return Compiled(b.n, b.var_ids, op, tgt, sstart, slen, srcs, cgroup, wstart, wlist,
                    group_constraints, disjunctions, origin, b.labelled, max_arity)
