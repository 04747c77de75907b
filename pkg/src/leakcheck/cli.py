"""Command-line driver.

Exit status: 0 no unsuppressed leaks, 1 leaks found, 2 input or validation
error, 3 solver budget exceeded.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, TextIO

from .cfg import build_traversal_plan
from .encoder import EncodingError, analyze_adt_defs, dump_encodings
from .ir import IRParseError, load_program
from .pipeline import PHASES, analyze_program
from .report import Diagnostic, render
from .solver import DEFAULT_BUDGET, emit_smtlib2

EXIT_CLEAN, EXIT_LEAKS, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


@dataclass
class RunConfig:
    inputs: list[str]
    format: str = "text"
    emit_smt_dir: Optional[str] = None
    dump_encodings: bool = False
    dump_cfg: bool = False
    dump_constraints: list[str] = field(default_factory=list)
    solver_budget: int = DEFAULT_BUDGET
    filters_enabled: bool = True
    timings: bool = False


def collect_inputs(paths: Sequence[str]) -> tuple[list[Path], list[str]]:
    files, errors = [], []
    for p in paths:
        path = Path(p)
        if path.is_dir():
            files.extend(sorted(path.rglob("*.mir.json")))
        elif path.is_file():
            files.append(path)
        else:
            errors.append(f"{p}: no such file or directory")
    return files, errors


def run(config: RunConfig, out: Optional[TextIO] = None, err: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    if config.solver_budget < 1:
        print("error: budget must be at least 1", file=err)
        return EXIT_INPUT
    files, errors = collect_inputs(config.inputs)
    for e in errors:
        print(f"error: {e}", file=err)
    input_error = bool(errors)
    budget_hit = False
    diags: list[Diagnostic] = []
    totals = dict.fromkeys(PHASES, 0.0)

    for path in files:
        try:
            program = load_program(path)
        except (OSError, IRParseError) as exc:
            print(f"error: {path}: {exc}", file=err)
            input_error = True
            continue
        if config.dump_encodings:
            try:
                for line in dump_encodings(program, analyze_adt_defs(program)):
                    print(line, file=out)
            except EncodingError as exc:
                print(f"error: {path}: {exc}", file=err)
        if config.dump_cfg:
            for fn in program.functions:
                print(f"fn {fn.name}", file=out)
                for line in build_traversal_plan(fn).describe():
                    print(f"  {line}", file=out)

        analysis = analyze_program(program, budget=config.solver_budget, filters=config.filters_enabled)
        for e in analysis.errors:
            print(f"error: {path}: {e}", file=err)
        for e in analysis.budget_exceeded:
            print(f"error: {path}: {e}", file=err)
        input_error |= bool(analysis.errors)
        budget_hit |= bool(analysis.budget_exceeded)
        for phase, t in analysis.timings.items():
            totals[phase] += t

        for name in config.dump_constraints:
            system = analysis.systems.get(name)
            if system is None:
                continue
            print(f"constraints for {name}:", file=out)
            for line in system.dump():
                print(line, file=out)
        if config.emit_smt_dir:
            target = Path(config.emit_smt_dir)
            target.mkdir(parents=True, exist_ok=True)
            for name, system in analysis.systems.items():
                (target / f"{name}.smt2").write_text(emit_smtlib2(system), encoding="utf-8")
        diags.extend(analysis.diagnostics)

    out.write(render(diags, config.format))
    if config.timings:
        for phase in PHASES:
            print(f"timing {phase}: {totals[phase] * 1000:.3f} ms", file=err)
    if budget_hit:
        return EXIT_BUDGET
    if input_error:
        return EXIT_INPUT
    return EXIT_LEAKS if any(not d.suppressed for d in diags) else EXIT_CLEAN


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="leakcheck", description="Detect leaks of manually released heap items in MIR-subset programs.")
    p.add_argument("inputs", nargs="+", help="IR files or directories containing *.mir.json files")
    p.add_argument("--format", choices=("text", "json"), default="text", help="report format (default: text)")
    p.add_argument("--emit-smt", metavar="DIR", help="write one <function>.smt2 file per entry function")
    p.add_argument("--no-filters", action="store_true", help="report suppressed diagnostics as leaks")
    p.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="solver node limit (env LEAKCHECK_BUDGET overrides)")
    p.add_argument("--timings", action="store_true", help="print per-phase wall-clock times to stderr")
    p.add_argument("--dump-encodings", action="store_true", help="print the rtoken of every type in each program")
    p.add_argument("--dump-cfg", action="store_true", help="print each function's traversal plan")
    p.add_argument("--dump-constraints", metavar="FN", action="append", default=[],
                   help="print the assertions generated for FN (repeatable)")
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    budget = args.budget
    env = os.environ.get("LEAKCHECK_BUDGET")
    if env:
        try:
            budget = int(env)
        except ValueError:
            print(f"error: LEAKCHECK_BUDGET must be an integer, got {env!r}", file=sys.stderr)
            return EXIT_INPUT
    config = RunConfig(
        inputs=args.inputs,
        format=args.format,
        emit_smt_dir=args.emit_smt,
        dump_encodings=args.dump_encodings,
        dump_cfg=args.dump_cfg,
        dump_constraints=args.dump_constraints,
        solver_budget=budget,
        filters_enabled=not args.no_filters,
        timings=args.timings,
    )
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
