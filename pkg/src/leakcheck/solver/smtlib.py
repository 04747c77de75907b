"""SMT-LIB2 (QF_LIA) rendering of a constraint system."""

from __future__ import annotations

import re

from ..constraints import Atom, ConstraintSystem, Disj, Eq, EqConst, EqExt, EqMeet, EqSrk, Slice

_SIMPLE = re.compile(r"[A-Za-z~!@$%^&*_+=<>.?/-][0-9A-Za-z~!@$%^&*_+=<>.?/-]*\Z")


def symbol(function: str, local: int, generation: int, bit: int) -> str:
    name = f"{function}_{local}_{generation}_{bit}"
    if _SIMPLE.match(name):
        return name
    return "|" + name.replace("|", "_").replace("\\", "_") + "|"


def _lit(v: int) -> str:
    return "(- 1)" if v == -1 else str(v)


def _meet(a: str, b: str) -> str:
    return f"(ite (= {a} (- 1)) {b} (ite (= {b} (- 1)) {a} (ite (< {a} {b}) {a} {b})))"


def _join(a: str, b: str) -> str:
    return f"(ite (or (= {a} (- 1)) (= {b} (- 1))) (- 1) (ite (> {a} {b}) {a} {b}))"


def _fold(fn, terms: list[str], empty: str) -> str:
    if not terms:
        return empty
    acc = terms[0]
    for t in terms[1:]:
        acc = fn(acc, t)
    return acc


def _conj(parts: list[str]) -> str:
    if not parts:
        return "true"
    if len(parts) == 1:
        return parts[0]
    return "(and " + " ".join(parts) + ")"


class _Emitter:
    def __init__(self, sys: ConstraintSystem):
        self.fn = sys.function

    def s(self, sl: Slice, i: int) -> str:
        return symbol(self.fn, sl.var.local, sl.var.generation, sl.bits[i])

    def atom(self, a: Atom) -> list[str]:
        if isinstance(a, Eq):
            return [f"(= {self.s(a.lhs, i)} {self.s(a.rhs, i)})" for i in range(len(a.lhs))]
        if isinstance(a, EqConst):
            return [f"(= {self.s(a.lhs, i)} {_lit(v)})" for i, v in enumerate(a.value)]
        if isinstance(a, EqMeet):
            out = []
            for i in range(len(a.lhs)):
                terms = [self.s(o, i) for o in a.operands]
                if a.mask is not None:
                    terms.append(_lit(a.mask[i]))
                out.append(f"(= {self.s(a.lhs, i)} {_fold(_meet, terms, '(- 1)')})")
            return out
        src = _fold(_join, [self.s(a.src, i) for i in range(len(a.src))], "0")
        if isinstance(a, EqSrk):
            return [f"(= {self.s(a.target, 0)} {src})"]
        return [f"(= {self.s(a.target, i)} {_meet(src, _lit(m))})" for i, m in enumerate(a.mask)]


def emit_smtlib2(sys: ConstraintSystem) -> str:
    e = _Emitter(sys)
    lines = ["(set-logic QF_LIA)"]
    for v in sys.variables:
        for i in range(v.width):
            name = symbol(sys.function, v.local, v.generation, i)
            lines.append(f"(declare-const {name} Int)")
            lines.append(f"(assert (or (= {name} (- 1)) (= {name} 0) (= {name} 1)))")
    for asn in sys.assertions:
        body = asn.body
        if isinstance(body, Disj):
            branches = [_conj([p for atom in br for p in e.atom(atom)]) for br in body.branches]
            lines.append(f"(assert (or {' '.join(branches)}))")
        else:
            lines.append(f"(assert {_conj(e.atom(body))})")
    lines.append("(check-sat)")
    return "\n".join(lines) + "\n"
