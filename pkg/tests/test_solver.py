"""Search solver: oracle agreement, witnesses, conflicts, budgets and kernels."""

from __future__ import annotations

from array import array

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from leakcheck.constraints import Disj, Eq, EqConst, EqExt, EqMeet, EqSrk, Slice, VarVersion, eval_assertion, whole
from leakcheck.solver import BudgetExceeded, enumerate_models, solve
from leakcheck.solver import _propagate
from leakcheck.solver.compile import TABLE, VALUE_OF_BIT, compile_system
from leakcheck.solver.oracle import brute_force_model_count, brute_force_status, satisfying_rows

from helpers import corpus_analysis, make_system, random_system

x = VarVersion(0, 0, 1)
y = VarVersion(1, 0, 2)


def test_direct_contradiction_conflict_is_both_assertions():
    sys = make_system([EqConst(whole(x), (0,)), EqConst(whole(x), (1,))], [x])
    res = solve(sys)
    assert res.status == "UNSAT"
    assert res.conflict == (0, 1)


def test_conflict_drops_irrelevant_assertions():
    sys = make_system(
        [EqConst(whole(y), (1, 0)), EqConst(whole(x), (0,)), Eq(Slice(y, (0,)), whole(x))],
        [x, y],
    )
    res = solve(sys)
    assert not res.sat
    assert res.conflict == (0, 1, 2)
    sys2 = make_system(
        [EqConst(whole(y), (1, 0)), EqConst(whole(x), (0,)), EqConst(whole(x), (-1,)), EqConst(whole(y), (1, 0))],
        [x, y],
    )
    assert solve(sys2).conflict == (1, 2)


def test_empty_system_is_sat():
    res = solve(make_system([], [x, y]))
    assert res.sat
    assert res.model == {x: (0,), y: (0, 0)}  # lowest label first


def test_meet_with_mask_and_ext_srk():
    z = VarVersion(2, 0, 2)
    sys = make_system(
        [
            EqConst(whole(y), (1, -1)),
            EqMeet(whole(z), (whole(y),), (-1, 0)),
            EqSrk(whole(y), whole(x)),
        ],
        [x, y, z],
    )
    res = solve(sys)
    assert res.model == {x: (-1,), y: (1, -1), z: (1, 0)}
    w = VarVersion(3, 0, 2)
    sys.assertions.append(make_system([EqExt(Slice(y, (0,)), whole(w), (1, 0))], []).assertions[0])
    sys.variables.append(w)
    assert solve(sys).model[w] == (1, 0)


def test_empty_srk_source_is_zero():
    sys = make_system([EqSrk(Slice(y, ()), whole(x)), EqConst(whole(x), (1,))], [x, y])
    assert not solve(sys).sat


def test_disjunction_branch_order():
    sys = make_system([Disj(((EqConst(whole(x), (1,)),), (EqConst(whole(x), (0,)),)))], [x])
    assert solve(sys).model[x] == (1,)


@pytest.mark.parametrize("seed", range(300))
def test_status_matches_oracle(seed):
    sys = random_system(seed)
    res = solve(sys)
    assert res.status == brute_force_status(sys)
    if res.sat:
        assert all(eval_assertion(a, res.model) for a in sys.assertions)
    else:
        # the reported core is itself UNSAT and every proper subset is SAT
        core = [sys.assertions[i] for i in res.conflict]
        assert brute_force_status(sys, core) == "UNSAT"
        for i in range(len(core)):
            assert brute_force_status(sys, core[:i] + core[i + 1:]) == "SAT"


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_enumeration_counts_match_oracle(seed):
    sys = random_system(seed, max_scalars=8, max_disj=3)
    models = enumerate_models(sys)
    assert len(models) == brute_force_model_count(sys)
    assert len({tuple(sorted((v.local, m) for v, m in mod.items())) for mod in models}) == len(models)
    for mod in models:
        assert all(eval_assertion(a, mod) for a in sys.assertions)


def test_enumeration_matches_oracle_rows_exactly():
    sys = random_system(7, max_scalars=6, max_disj=2)
    grid, ok = satisfying_rows(sys)
    rows = {tuple(int(v) for v in r) for r in grid.values[ok]}
    got = {tuple(val for v in sys.variables for val in m[v]) for m in enumerate_models(sys)}
    assert got == rows


def test_budget_exceeded_raises():
    vars_ = [VarVersion(i, 0, 1) for i in range(12)]
    bodies = [Disj(((EqConst(whole(v), (1,)),), (EqConst(whole(v), (-1,)),))) for v in vars_]
    # the last disjunction is refuted only once every earlier one is decided
    z = VarVersion(12, 0, 1)
    bodies.append(EqConst(whole(z), (0,)))
    bodies.append(Disj(((EqConst(whole(z), (1,)),), (EqConst(whole(z), (-1,)),))))
    sys = make_system(bodies, vars_ + [z])
    with pytest.raises(BudgetExceeded):
        solve(sys, budget=5)
    assert solve(sys, minimize=False).status == "UNSAT"


def test_budget_zero_on_trivial_system_is_fine():
    assert solve(make_system([EqConst(whole(x), (1,))], [x]), budget=0).sat


@pytest.mark.parametrize("seed", range(150))
def test_kernels_agree(seed):
    pytest.importorskip("leakcheck.solver._kernel")
    from leakcheck.solver import _kernel

    sys = random_system(seed)
    a = solve(sys, propagate=_propagate.propagate)
    b = solve(sys, propagate=_kernel.propagate)
    assert (a.status, a.model, a.conflict, a.nodes) == (b.status, b.model, b.conflict, b.nodes)


@settings(max_examples=80)
@given(st.integers(0, 10**6), st.data())
def test_propagation_is_sound(seed, data):
    """Propagating from any domain never removes a value that appears in a model."""
    sys = random_system(seed, max_scalars=7, max_disj=0)
    comp = compile_system(sys)
    dom = comp.initial_domains()
    for sid in comp.labelled:
        dom[sid] &= data.draw(st.integers(1, 7))
    grid, ok = satisfying_rows(sys)
    cols = [comp.var_ids[(v, i)] for v in sys.variables for i in range(v.width)]
    allowed = ok.copy()
    for c, sid in enumerate(cols):
        vals = {VALUE_OF_BIT[b] for b in (1, 2, 4) if dom[sid] & b}
        allowed &= [int(v) in vals for v in grid.values[:, c]]
    active = bytearray(len(comp.group_constraints))
    active[0] = 1
    alive = _propagate.propagate(dom, active, TABLE, comp.op, comp.tgt, comp.sstart, comp.slen, comp.srcs,
                                 comp.cgroup, comp.wstart, comp.wlist, array("i", comp.group_constraints[0]))
    if not allowed.any():
        return
    assert alive == 1
    for row in grid.values[allowed]:
        for c, sid in enumerate(cols):
            assert dom[sid] & {0: 1, 1: 2, -1: 4}[int(row[c])]


def test_boxed_proxy_unsat_and_fixed_sat():
    leaky = corpus_analysis("boxed_proxy/boxed_proxy.mir.json")
    fixed = corpus_analysis("boxed_proxy/boxed_proxy_fixed.mir.json")
    assert leaky.outcomes["main"].result.status == "UNSAT"
    assert fixed.outcomes["main"].result.status == "SAT"


def test_fallback_kernel_selected_by_env():
    import os
    import subprocess
    import sys

    code = "from leakcheck.solver import KERNEL; print(KERNEL)"
    env = dict(os.environ, LEAKCHECK_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"
