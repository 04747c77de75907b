"""Compare the compiled propagation kernel with the pure-Python fallback.

    python3 benchmarks/bench_kernel.py [--repeat N]

Workloads: every shipped corpus system, 300 random small systems, and a
long equality chain whose UNSAT core minimization re-solves hundreds of
subsets.  Two measurements per workload: root propagation alone (the
kernel's own cost) and a full ``solve``, which also pays for compilation
and search bookkeeping in Python.
"""

from __future__ import annotations

import argparse
import sys
import timeit
from array import array
from pathlib import Path

from leakcheck.constraints import Assertion, ConstraintSystem, Disj, Eq, EqConst, VarVersion, whole
from leakcheck.corpus import corpus_files
from leakcheck.ir import load_program
from leakcheck.pipeline import analyze_program
from leakcheck.solver import _propagate, solve
from leakcheck.solver.compile import TABLE, compile_system

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "tests"))
from helpers import random_system  # noqa: E402


def corpus_systems() -> list[ConstraintSystem]:
    out = []
    for path in corpus_files():
        out.extend(analyze_program(load_program(path)).systems.values())
    return out


def disjunction_chain(n: int) -> ConstraintSystem:
    """x_i = x_{i+1} along a chain, inner links in {1, -1}, with x_0 = 1 and x_n = -1."""
    vs = [VarVersion(i, 0, 1) for i in range(n + 1)]
    bodies = [Disj(((EqConst(whole(v), (1,)),), (EqConst(whole(v), (-1,)),))) for v in vs[1:-1]]
    bodies += [Eq(whole(a), whole(b)) for a, b in zip(vs, vs[1:])]
    bodies += [EqConst(whole(vs[0]), (1,)), EqConst(whole(vs[-1]), (-1,))]
    sys_ = ConstraintSystem("chain", vs)
    sys_.assertions = [Assertion(b, f"s{i}", "BENCH") for i, b in enumerate(bodies)]
    return sys_


def workloads() -> dict[str, list[ConstraintSystem]]:
    return {
        "corpus": corpus_systems(),
        "random x300": [random_system(s) for s in range(300)],
        "chain n=200": [disjunction_chain(200)],
    }


def bench_solve(systems, propagate, repeat: int) -> float:
    def job():
        for s in systems:
            solve(s, propagate=propagate)

    return min(timeit.repeat(job, number=1, repeat=repeat))


def bench_propagate(systems, propagate, repeat: int) -> float:
    compiled = [compile_system(s) for s in systems]

    def job():
        for c in compiled:
            active = bytearray(len(c.group_constraints))
            active[0] = 1
            propagate(c.initial_domains(), active, TABLE, c.op, c.tgt, c.sstart, c.slen, c.srcs, c.cgroup,
                      c.wstart, c.wlist, array("i", c.group_constraints[0]))

    return min(timeit.repeat(job, number=20, repeat=repeat)) / 20


def _table(title: str, kernels: dict, measure, repeat: int) -> None:
    print(title)
    print(f"  {'workload':<14}" + "".join(f"{k:>12}" for k in kernels) + ("     speedup" if len(kernels) > 1 else ""))
    for name, systems in workloads().items():
        times = {k: measure(systems, p, repeat) for k, p in kernels.items()}
        row = f"  {name:<14}" + "".join(f"{t * 1000:>10.2f}ms" for t in times.values())
        if len(times) > 1:
            row += f"{times['python'] / times['cython']:>11.1f}x"
        print(row)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    kernels = {"python": _propagate.propagate}
    try:
        from leakcheck.solver import _kernel

        kernels["cython"] = _kernel.propagate
    except ImportError:
        print("compiled kernel not built; only the fallback is measured")

    _table("root propagation", kernels, bench_propagate, args.repeat)
    _table("full solve", kernels, bench_solve, args.repeat)


if __name__ == "__main__":
    main()
