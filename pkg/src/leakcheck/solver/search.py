"""Backtracking search over disjunction branches and scalar labels."""

from __future__ import annotations

from array import array
from dataclasses import dataclass
from typing import Callable, Iterator, Optional

from ..constraints import Assertion, ConstraintSystem, Model, eval_assertion
from .compile import BIT, TABLE, VALUE_OF_BIT, Compiled, compile_system

DEFAULT_BUDGET = 10**6
_LABEL_ORDER = (BIT[0], BIT[1], BIT[-1])


class BudgetExceeded(RuntimeError):
    """The search visited more nodes than allowed; the answer is unknown."""


@dataclass(frozen=True)
class SolveResult:
    status: str  # "SAT" | "UNSAT"
    model: Optional[Model] = None
    conflict: Optional[tuple[int, ...]] = None
    nodes: int = 0

    @property
    def sat(self) -> bool:
        return self.status == "SAT"


def _default_propagate():
    from .kernel import propagate

    return propagate


class _Search:
    def __init__(self, comp: Compiled, budget: int, propagate: Callable):
        self.c = comp
        self.budget = budget
        self.nodes = 0
        self.prop = propagate

    def run(self, dom: bytearray, active: bytearray, seed) -> int:
        c = self.c
        return self.prop(dom, active, TABLE, c.op, c.tgt, c.sstart, c.slen, c.srcs, c.cgroup,
                         c.wstart, c.wlist, seed)

    def tick(self) -> None:
        self.nodes += 1
        if self.nodes > self.budget:
            raise BudgetExceeded(f"search exceeded {self.budget} nodes")

    def solutions(self) -> Iterator[bytearray]:
        """Yield fully labelled domain vectors, in deterministic order."""
        c = self.c
        n_groups = len(c.group_constraints)
        active = bytearray(n_groups)
        active[0] = 1
        dom = c.initial_domains()
        if not self.run(dom, active, array("i", c.group_constraints[0])):
            return
        # frames: (dom, active, depth, alternatives iterator)
        stack = [(dom, active, 0)]
        n_disj = len(c.disjunctions)
        while stack:
            dom, active, depth = stack.pop()
            if depth < n_disj:
                _, groups = c.disjunctions[depth]
                children = []
                for g in groups:
                    self.tick()
                    d2, a2 = bytearray(dom), bytearray(active)
                    a2[g] = 1
                    if self.run(d2, a2, array("i", c.group_constraints[g])):
                        children.append((d2, a2, depth + 1))
                stack.extend(reversed(children))
                continue
            var = next((v for v in c.labelled if dom[v] & (dom[v] - 1)), None)
            if var is None:
                yield dom
                continue
            seed = array("i", c.wlist[c.wstart[var]:c.wstart[var + 1]])
            children = []
            for bit in _LABEL_ORDER:
                if not dom[var] & bit:
                    continue
                self.tick()
                d2 = bytearray(dom)
                d2[var] = bit
                if self.run(d2, active, seed):
                    children.append((d2, active, depth))
            stack.extend(reversed(children))


def _model(sys: ConstraintSystem, comp: Compiled, dom: bytearray) -> Model:
    return {
        v: tuple(VALUE_OF_BIT[dom[comp.var_ids[(v, i)]]] for i in range(v.width))
        for v in sys.variables
    }


def _check_sat(sys: ConstraintSystem, assertions: list[Assertion], budget: int, propagate) -> tuple[Optional[Model], int]:
    comp = compile_system(sys, assertions)
    search = _Search(comp, budget, propagate)
    for dom in search.solutions():
        return _model(sys, comp, dom), search.nodes
    return None, search.nodes


def minimize_conflict(sys: ConstraintSystem, budget: int = DEFAULT_BUDGET, propagate=None) -> tuple[int, ...]:
    """Greedy deletion: drop each assertion whose removal keeps the rest UNSAT."""
    propagate = propagate or _default_propagate()
    keep = list(range(len(sys.assertions)))
    for i in list(keep):
        trial = [j for j in keep if j != i]
        try:
            model, _ = _check_sat(sys, [sys.assertions[j] for j in trial], budget, propagate)
        except BudgetExceeded:
            continue
        if model is None:
            keep = trial
    return tuple(keep)


def solve(sys: ConstraintSystem, budget: int = DEFAULT_BUDGET, minimize: bool = True, propagate=None) -> SolveResult:
    propagate = propagate or _default_propagate()
    model, nodes = _check_sat(sys, sys.assertions, budget, propagate)
    if model is not None:
        bad = [i for i, a in enumerate(sys.assertions) if not eval_assertion(a, model)]
        if bad:
            raise AssertionError(f"internal error: witness violates assertions {bad}")
        return SolveResult("SAT", model=model, nodes=nodes)
    conflict = minimize_conflict(sys, budget, propagate) if minimize else tuple(range(len(sys.assertions)))
    return SolveResult("UNSAT", conflict=conflict, nodes=nodes)


def enumerate_models(sys: ConstraintSystem, budget: int = DEFAULT_BUDGET, propagate=None) -> list[Model]:
    """Every distinct model of ``sys``, in search order."""
    comp = compile_system(sys)
    search = _Search(comp, budget, propagate or _default_propagate())
    seen = set()
    out = []
    for dom in search.solutions():
        key = bytes(dom[v] for v in comp.labelled)
        if key not in seen:
            seen.add(key)
            out.append(_model(sys, comp, dom))
    return out
