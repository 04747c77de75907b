"""Diagnostics: taint-anchored leak reports, filters and rendering."""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .constraints import ConstraintSystem, EqConst
from .ir import AdtTy, Call, Program, PtrTy
from .solver import SolveResult

PATTERNS = ("orphan_object", "proxy_type", "unknown")
REASONS = ("callee_propagation", "extern_function")


@dataclass(frozen=True)
class Diagnostic:
    function: str
    span: str
    pattern: str
    message: str
    suppressed: bool = False
    reason: Optional[str] = None

    def __post_init__(self) -> None:
        if self.suppressed != (self.reason is not None):
            raise ValueError("suppressed diagnostics need a reason, and only they")

    def to_dict(self) -> dict:
        return {
            "function": self.function,
            "span": self.span,
            "pattern": self.pattern,
            "message": self.message,
            "suppressed": self.suppressed,
            "reason": self.reason,
        }


@dataclass(frozen=True)
class FunctionOutcome:
    system: ConstraintSystem
    result: SolveResult


def local_call_graph(program: Program) -> dict[str, set[str]]:
    """caller -> local callees."""
    local = program.function_map
    graph: dict[str, set[str]] = {f.name: set() for f in program.functions}
    for f in program.functions:
        for b in f.blocks:
            if isinstance(b.term, Call) and b.term.callee in local:
                graph[f.name].add(b.term.callee)
    return graph


def _transitive_callers(graph: dict[str, set[str]], fn: str) -> set[str]:
    callers: dict[str, set[str]] = {n: set() for n in graph}
    for caller, callees in graph.items():
        for c in callees:
            callers.setdefault(c, set()).add(caller)
    seen: set[str] = set()
    stack = [fn]
    while stack:
        for c in callers.get(stack.pop(), ()):
            if c not in seen:
                seen.add(c)
                stack.append(c)
    seen.discard(fn)
    return seen


def _has_raw_pointer_field(ty, program: Program) -> bool:
    if not isinstance(ty, AdtTy):
        return False
    decl = program.adt_map.get(ty.name)
    return decl is not None and decl.kind == "record" and any(isinstance(t, PtrTy) for t in decl.variants[0])


def classify_pattern(outcome: FunctionOutcome, program: Program) -> str:
    sys = outcome.system
    for i in outcome.result.conflict or ():
        for local, _ in sys.assertions[i].fields:
            if _has_raw_pointer_field(sys.local_types[local], program):
                return "proxy_type"
    return "orphan_object"


def _returns_leak(outcome: FunctionOutcome) -> bool:
    sys = outcome.system
    for i in outcome.result.conflict or ():
        a = sys.assertions[i]
        if a.rule == "RETURN" and isinstance(a.body, EqConst) and a.body.lhs.var.local == 0:
            return True
    return False


def _exit_span(outcome: FunctionOutcome) -> str:
    sys = outcome.system
    for i in outcome.result.conflict or ():
        if sys.assertions[i].rule in ("RETURN", "STORAGE-DEAD"):
            return sys.assertions[i].span
    conflict = outcome.result.conflict or ()
    return sys.assertions[conflict[-1]].span if conflict else ""


def collect_diagnostics(outcomes: dict[str, FunctionOutcome], program: Program,
                        filters: bool = True) -> list[Diagnostic]:
    graph = local_call_graph(program)
    unsat = {name for name, o in outcomes.items() if not o.result.sat}
    fmap = program.function_map
    out: dict[tuple[str, str, str], Diagnostic] = {}
    for name in sorted(unsat):
        outcome = outcomes[name]
        pattern = classify_pattern(outcome, program)
        reason = None
        if filters and fmap[name].is_extern and _returns_leak(outcome):
            reason = "extern_function"
        elif filters and _transitive_callers(graph, name) & unsat:
            reason = "callee_propagation"
        if outcome.system.taints:
            items = [(t.span, pattern, f"heap item from `{t.callee}` is never released")
                     for t in outcome.system.taints]
        else:
            items = [(_exit_span(outcome), "unknown", "leak-free constraints are unsatisfiable")]
        for span, pat, msg in items:
            key = (name, span, pat)
            if key not in out:
                out[key] = Diagnostic(name, span, pat, msg, reason is not None, reason)
    return sort_diagnostics(out.values())


def sort_diagnostics(diags: Iterable[Diagnostic]) -> list[Diagnostic]:
    return sorted(diags, key=lambda d: (d.suppressed, d.function, d.span, d.pattern))


def render(diags: Sequence[Diagnostic], fmt: str = "text") -> str:
    diags = sort_diagnostics(diags)
    if fmt == "json":
        return json.dumps([d.to_dict() for d in diags], indent=2) + "\n"
    lines = []
    for d in diags:
        line = f"LEAK {d.pattern} {d.function} {d.span} {d.message}"
        lines.append(f"note: {line} [suppressed: {d.reason}]" if d.suppressed else line)
    return "".join(line + "\n" for line in lines)
