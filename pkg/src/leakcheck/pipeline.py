"""End-to-end analysis of one program: encode, build constraints, solve, report."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

from .cfg import build_traversal_plan
from .constraints import ConstraintSystem, build_function_constraints
from .encoder import AnalysisCache, EncodingError, analyze_adt_defs
from .ir import Finding, Program, validate_program
from .report import Diagnostic, FunctionOutcome, collect_diagnostics
from .solver import DEFAULT_BUDGET, BudgetExceeded, solve

PHASES = ("adt analysis", "constraint building", "solving")


@dataclass
class ProgramAnalysis:
    program: Program
    cache: Optional[AnalysisCache] = None
    systems: dict[str, ConstraintSystem] = field(default_factory=dict)
    outcomes: dict[str, FunctionOutcome] = field(default_factory=dict)
    diagnostics: list[Diagnostic] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)
    findings: list[Finding] = field(default_factory=list)
    budget_exceeded: list[str] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=lambda: dict.fromkeys(PHASES, 0.0))


def _function_of(where: str) -> Optional[str]:
    parts = where.split()
    return parts[1] if len(parts) >= 2 and parts[0] == "fn" else None


def analyze_program(program: Program, budget: int = DEFAULT_BUDGET, filters: bool = True,
                    minimize: bool = True) -> ProgramAnalysis:
    """Run every entry function with a fresh context.

    Validation errors inside a function skip only that function; errors in
    type declarations or externs skip the whole program.
    """
    out = ProgramAnalysis(program)
    bad_functions: set[str] = set()
    for finding in validate_program(program):
        if finding.severity != "error":
            out.findings.append(finding)
            continue
        out.errors.append(str(finding))
        fn = _function_of(finding.where)
        if fn is None:
            bad_functions.add("*")
        else:
            bad_functions.add(fn)
    if "*" in bad_functions:
        return out

    t0 = time.perf_counter()
    try:
        out.cache = analyze_adt_defs(program)
    except EncodingError as exc:
        out.errors.append(f"type analysis: {exc}")
        return out
    out.timings["adt analysis"] += time.perf_counter() - t0

    fmap = program.function_map
    for name in program.entries():
        if name in bad_functions:
            continue
        fn = fmap[name]
        t0 = time.perf_counter()
        try:
            plan = build_traversal_plan(fn)
            system = build_function_constraints(program, fn, out.cache, plan)
        except EncodingError as exc:
            out.errors.append(f"fn {name}: {exc}")
            continue
        finally:
            out.timings["constraint building"] += time.perf_counter() - t0
        out.systems[name] = system
        out.findings.extend(system.findings)
        t0 = time.perf_counter()
        try:
            result = solve(system, budget=budget, minimize=minimize)
        except BudgetExceeded as exc:
            out.budget_exceeded.append(f"fn {name}: {exc}")
            continue
        finally:
            out.timings["solving"] += time.perf_counter() - t0
        out.outcomes[name] = FunctionOutcome(system, result)
    out.diagnostics = collect_diagnostics(out.outcomes, program, filters)
    return out
