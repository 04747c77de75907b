import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from leakcheck.corpus import corpus_files
from leakcheck.ir import (
    PRIM,
    UNIT,
    AdtTy,
    ArrayTy,
    Assign,
    BasicBlock,
    Call,
    Cast,
    DerefProj,
    DynTy,
    FieldProj,
    Function,
    IRParseError,
    Move,
    Place,
    Program,
    PtrTy,
    RefTy,
    Reference,
    Return,
    SliceTy,
    TupleTy,
    parse_program,
    program_from_dict,
    serialize_program,
    type_to_dict,
    validate_program,
)
from leakcheck.ir import _Reader

from helpers import corpus_program

MINIMAL = {
    "adts": [],
    "functions": [{"name": "main", "params": 0, "locals": [{"k": "tuple", "fs": []}],
                   "blocks": [{"stmts": [], "term": {"kind": "return"}, "spans": ["m.rs:1:1"]}]}],
    "externs": [],
    "entries": ["main"],
}


def test_minimal_program():
    p = parse_program(json.dumps(MINIMAL))
    assert len(p.functions) == 1
    (f,) = p.functions
    assert len(f.blocks) == 1 and isinstance(f.blocks[0].term, Return)
    assert f.blocks[0].term.span == "m.rs:1:1"
    assert validate_program(p) == []


def test_wrapped_box_shape():
    p = corpus_program("motivating/wrapped_box.mir.json")
    (f,) = p.functions
    stmts = [s for b in f.blocks for s in b.stmts]
    calls = [b.term for b in f.blocks if isinstance(b.term, Call)]
    assert len(stmts) == 4
    assert [c.callee for c in calls] == ["Box::new", "ManuallyDrop::new"]
    assert any(isinstance(s, Reference) for s in stmts) and any(isinstance(s, Cast) for s in stmts)


def test_unknown_block_id():
    doc = json.loads(json.dumps(MINIMAL))
    doc["functions"][0]["blocks"][0]["term"] = {"kind": "goto", "target": 7}
    with pytest.raises(IRParseError, match="unknown block id"):
        program_from_dict(doc)


def test_syntax_error_has_position():
    with pytest.raises(IRParseError) as exc:
        parse_program('{"adts": [\n  1,,]}')
    assert exc.value.line == 2 and exc.value.column is not None


def test_duplicate_name():
    doc = json.loads(json.dumps(MINIMAL))
    doc["functions"].append(doc["functions"][0])
    with pytest.raises(IRParseError, match="duplicate name"):
        program_from_dict(doc)


def test_unknown_type_reference():
    doc = json.loads(json.dumps(MINIMAL))
    doc["functions"][0]["locals"].append({"k": "adt", "name": "Nope", "args": []})
    with pytest.raises(IRParseError, match="unknown type reference"):
        program_from_dict(doc)


def test_span_count_must_match():
    doc = json.loads(json.dumps(MINIMAL))
    doc["functions"][0]["blocks"][0]["spans"] = []
    with pytest.raises(IRParseError):
        program_from_dict(doc)


@pytest.mark.parametrize("path", corpus_files(), ids=lambda p: p.name)
def test_corpus_valid_and_round_trips(path):
    text = path.read_text()
    p = parse_program(text)
    assert validate_program(p) == []
    assert serialize_program(p) == text
    assert parse_program(serialize_program(p)) == p
    for f in p.functions:
        for b in f.blocks:
            assert b.term.span and all(s.span for s in b.stmts)


def _one_fn(stmts, locals_, adts=()):
    spans = "x.rs:1:1"
    return Program(tuple(adts), (Function("f", 0, tuple(locals_), (
        BasicBlock(tuple(stmts), Return(spans)),)),), (), ("f",))


def test_projection_depth_finding():
    pair = TupleTy((PRIM, PRIM))
    deep = Place(1, (DerefProj(), FieldProj(0)))
    p = _one_fn([Assign(Place(2), Move(deep), "x.rs:1:1")], [UNIT, RefTy(pair), PRIM])
    assert any(f.message == "projection depth exceeds one" for f in validate_program(p))


def test_invalid_drop_frees_finding():
    from leakcheck.ir import AdtDecl

    bad = AdtDecl("Bad", "record", 0, ((PRIM,),), drop_frees=(3,))
    p = _one_fn([], [UNIT], [bad])
    assert [f.message for f in validate_program(p)] == ["invalid drop_frees index"]


def test_validation_does_not_mutate():
    p = corpus_program("motivating/proxy_drop.mir.json")
    before = serialize_program(p)
    validate_program(p)
    assert serialize_program(p) == before


def _types():
    base = st.sampled_from([PRIM, DynTy(), AdtTy("A"), TupleTy(())])
    return st.recursive(
        base,
        lambda inner: st.one_of(
            st.builds(lambda t: RefTy(t), inner),
            st.builds(lambda t: PtrTy(t), inner),
            st.builds(lambda t: SliceTy(t), inner),
            st.builds(lambda t, n: ArrayTy(t, n), inner, st.integers(0, 9)),
            st.builds(lambda fs: TupleTy(tuple(fs)), st.lists(inner, max_size=3)),
            st.builds(lambda t: AdtTy("B", (t,)), inner),
        ),
        max_leaves=12,
    )


@given(_types())
def test_type_round_trip(ty):
    reader = _Reader()
    reader.adt_names = {"A", "B"}
    assert reader.type(type_to_dict(ty), "$") == ty
