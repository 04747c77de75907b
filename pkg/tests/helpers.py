"""Shared test utilities: corpus access and random constraint systems."""

from __future__ import annotations

import random
from functools import lru_cache

from leakcheck.constraints import (
    Assertion,
    ConstraintSystem,
    Disj,
    Eq,
    EqConst,
    EqExt,
    EqMeet,
    EqSrk,
    Slice,
    VarVersion,
    whole,
)
from leakcheck.corpus import corpus_dir
from leakcheck.ir import load_program
from leakcheck.pipeline import analyze_program

VALS = (0, 1, -1)

# criterion number -> "PASS ..." / "FAIL ..." line, filled by the acceptance suite
ACCEPTANCE: dict[int, str] = {}


@lru_cache(maxsize=None)
def corpus_program(rel: str):
    return load_program(corpus_dir() / rel)


@lru_cache(maxsize=None)
def corpus_analysis(rel: str):
    return analyze_program(corpus_program(rel))


def make_system(assertion_bodies, variables, name="t") -> ConstraintSystem:
    sys = ConstraintSystem(name, list(variables))
    sys.assertions = [Assertion(b, f"s{i}", "TEST") for i, b in enumerate(assertion_bodies)]
    return sys


def _random_atom(rng: random.Random, vars_: list[VarVersion]):
    kind = rng.choice(("eq", "const", "meet", "ext", "srk", "eqbit"))
    v = rng.choice(vars_)
    same = [w for w in vars_ if w.width == v.width]
    if kind == "eq":
        return Eq(whole(v), whole(rng.choice(same)))
    if kind == "eqbit":
        a, b = rng.choice(vars_), rng.choice(vars_)
        return Eq(Slice(a, (rng.randrange(a.width),)), Slice(b, (rng.randrange(b.width),)))
    if kind == "const":
        return EqConst(whole(v), tuple(rng.choice(VALS) for _ in range(v.width)))
    if kind == "meet":
        ops = tuple(whole(rng.choice(same)) for _ in range(rng.randint(1, 3)))
        mask = tuple(rng.choice(VALS) for _ in range(v.width)) if rng.random() < 0.5 else None
        return EqMeet(whole(v), ops, mask)
    src = rng.choice(vars_)
    bits = tuple(sorted(rng.sample(range(src.width), rng.randint(0, src.width))))
    if kind == "ext":
        return EqExt(Slice(src, bits), whole(v), tuple(rng.choice((0, 1, 1, -1)) for _ in range(v.width)))
    return EqSrk(Slice(src, bits), Slice(v, (rng.randrange(v.width),)))


def random_system(seed: int, max_scalars: int = 12, max_disj: int = 6) -> ConstraintSystem:
    """A seeded random system within the given size bounds."""
    rng = random.Random(seed)
    vars_: list[VarVersion] = []
    budget = rng.randint(1, max_scalars)
    while budget > 0:
        w = min(budget, rng.randint(1, 3))
        vars_.append(VarVersion(len(vars_), 0, w))
        budget -= w
    bodies = []
    for _ in range(rng.randint(1, 8)):
        bodies.append(_random_atom(rng, vars_))
    for _ in range(rng.randint(0, max_disj)):
        branches = tuple(
            tuple(_random_atom(rng, vars_) for _ in range(rng.randint(1, 2)))
            for _ in range(rng.randint(2, 3))
        )
        bodies.append(Disj(branches))
    rng.shuffle(bodies)
    return make_system(bodies, vars_, name=f"r{seed}")
