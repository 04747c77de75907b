import pytest
from hypothesis import given
from hypothesis import strategies as st

from leakcheck.encoder import (
    MAX_GENERIC_DEPTH,
    AnalysisCache,
    EncodingError,
    analyze_adt_defs,
    collect_types,
    destructor_rtoken,
    dump_encodings,
    encode_type,
    encoded_length,
    field_bit,
)
from leakcheck.ir import (
    PRIM,
    UNIT,
    AdtDecl,
    AdtTy,
    ArrayTy,
    DynTy,
    ParamTy,
    PtrTy,
    RefTy,
    SliceTy,
    TupleTy,
    substitute,
)

from helpers import corpus_program

STD = corpus_program("std_decls.mir.json")
GLOBAL = AdtTy("Global")
BOX = AdtTy("Box", (RefTy(PRIM), GLOBAL))
VEC_U8 = AdtTy("Vec", (PRIM, GLOBAL))


@pytest.fixture(scope="module")
def cache():
    return analyze_adt_defs(STD)


def rec(name, params, fields, **kw):
    return AdtDecl(name, "record", params, (tuple(fields),), **kw)


# --- independent oracle: expand field types by substitution, depth capped ---

def _is_unit(decl, decls):
    return any(
        any(isinstance(t, AdtTy) and decls[t.name].is_phantom_marker and t.args and t.args[0] != UNIT for t in v)
        and any(isinstance(t, (PtrTy, RefTy)) for t in v)
        for v in decl.variants
    )


def naive_heap(ty, decls, depth=0, cap=4):
    """Does storing ``ty`` reach a heap-item unit (bare params count as heap)?"""
    if isinstance(ty, (DynTy, ParamTy)):
        return True
    if isinstance(ty, TupleTy):
        return any(naive_heap(f, decls, depth, cap) for f in ty.fields)
    if isinstance(ty, ArrayTy):
        return naive_heap(ty.elem, decls, depth, cap)
    if not isinstance(ty, AdtTy) or depth > cap:
        return False
    decl = decls[ty.name]
    if _is_unit(decl, decls):
        return True
    return any(naive_heap(substitute(f, ty.args), decls, depth + 1, cap) for v in decl.variants for f in v)


def naive_decl_heap(decl, decls, cap=4):
    def walk(ty, depth):
        if isinstance(ty, TupleTy):
            return any(walk(f, depth) for f in ty.fields)
        if isinstance(ty, ArrayTy):
            return walk(ty.elem, depth)
        if isinstance(ty, DynTy):
            return True
        if not isinstance(ty, AdtTy) or depth > cap:
            return False
        d = decls[ty.name]
        return _is_unit(d, decls) or any(walk(substitute(f, ty.args), depth + 1) for v in d.variants for f in v)

    return _is_unit(decl, decls) or any(walk(f, 0) for v in decl.variants for f in v)


def naive_isolated(decl, decls, i, cap=4):
    def walk(ty, depth):
        if isinstance(ty, ParamTy):
            return ty.index == i
        if isinstance(ty, TupleTy):
            return any(walk(f, depth) for f in ty.fields)
        if isinstance(ty, ArrayTy):
            return walk(ty.elem, depth)
        if not isinstance(ty, AdtTy) or depth > cap:
            return False
        d = decls[ty.name]
        return any(walk(substitute(f, ty.args), depth + 1) for v in d.variants for f in v)

    return any(walk(f, 0) for v in decl.variants for f in v)


def test_std_vec_analysis(cache):
    assert cache["Vec"].heap_item is True
    assert cache["Vec"].isolated_parameter == (False, True)


def test_std_encodings(cache):
    assert encode_type(AdtTy("String"), cache) == (1,)
    assert encode_type(VEC_U8, cache) == (1, 0)
    assert encode_type(BOX, cache) == (1, 0)


def test_defaults(cache):
    assert encode_type(PRIM, cache) == (0,)
    assert encode_type(UNIT, cache) == ()
    assert encode_type(DynTy(), cache) == (1,)
    assert encode_type(ParamTy(0), cache) == (1,)
    assert encode_type(PtrTy(BOX), cache) == (0, 0)
    assert encode_type(SliceTy(VEC_U8), cache) == (0, 0)
    assert encode_type(ArrayTy(AdtTy("String"), 4), cache) == (1,)
    assert encode_type(TupleTy((PRIM, AdtTy("String"), RefTy(AdtTy("String")))), cache) == (0, 1, 0)


def test_lengths(cache):
    assert encoded_length(AdtTy("String"), cache) == 1
    assert encoded_length(UNIT, cache) == 0
    assert encoded_length(PtrTy(BOX), cache) == 2


def test_empty_decl():
    cache = analyze_adt_defs({"E": rec("E", 2, [])})
    assert cache["E"].heap_item is False
    assert cache["E"].isolated_parameter == (False, False)


def test_generic_recursion_terminates():
    decls = {
        "P": rec("P", 1, [AdtTy("Q", (AdtTy("P", (ParamTy(0),)),))]),
        "Q": rec("Q", 1, [ParamTy(0)]),
    }
    cache = analyze_adt_defs(decls)
    assert cache["P"].heap_item is False and cache["Q"].heap_item is False
    for name in decls:
        assert cache[name].heap_item == naive_decl_heap(decls[name], decls, cap=4)


def test_direct_recursion_rejected():
    with pytest.raises(EncodingError, match="recursive"):
        analyze_adt_defs({"R": rec("R", 0, [AdtTy("R")])})


def test_cache_matches_naive_oracle_on_corpus(cache):
    decls = STD.adt_map
    for name, decl in decls.items():
        assert cache[name].heap_item == naive_decl_heap(decl, decls), name
        for i in range(decl.param_count):
            assert cache[name].isolated_parameter[i] == naive_isolated(decl, decls, i), (name, i)


def test_encoding_matches_naive_oracle_on_corpus_types(cache):
    from leakcheck.corpus import corpus_files
    from leakcheck.ir import load_program

    for path in corpus_files():
        prog = load_program(path)
        c = analyze_adt_defs(prog)
        for ty in collect_types(prog):
            if isinstance(ty, AdtTy) and prog.adt(ty.name).kind == "enum":
                continue
            bits = encode_type(ty, c)
            assert len(bits) == encoded_length(ty, c)
            if isinstance(ty, AdtTy):
                fields = prog.adt(ty.name).variant_fields(ty.args)
                assert bits == tuple(int(naive_heap(f, prog.adt_map)) for f in fields), ty


def test_enum_variants():
    opt = AdtDecl("Opt", "enum", 1, ((), (ParamTy(0),)))
    decls = dict(STD.adt_map, Opt=opt)
    cache = analyze_adt_defs(decls)
    ty = AdtTy("Opt", (AdtTy("String"),))
    assert encode_type(ty, cache) == (0,)
    assert encode_type(ty, cache, variant_hint=1) == (1,)
    assert encode_type(ty, cache, variant_hint=0) == ()
    assert encoded_length(ty, cache, variant_hint=1) == 1
    with pytest.raises(EncodingError):
        encode_type(ty, cache, variant_hint=2)


def test_unknown_adt():
    with pytest.raises(EncodingError):
        encode_type(AdtTy("Missing"), AnalysisCache({}))


def test_destructor_examples():
    proxy = rec("Proxy", 1, [PtrTy(ParamTy(0))])
    cache = analyze_adt_defs(dict(STD.adt_map, Proxy=proxy))
    ty = AdtTy("Proxy", (BOX,))
    assert encode_type(ty, cache) == (0,)
    assert destructor_rtoken(ty, cache) == (1,)
    assert destructor_rtoken(ty, cache, drop_frees=(0,)) == (0,)
    pair = TupleTy((AdtTy("String"), AdtTy("String")))
    assert destructor_rtoken(pair, cache) == (0, 0)
    assert destructor_rtoken(BOX, cache) == (0, 1)
    with pytest.raises(EncodingError):
        destructor_rtoken(ty, cache, drop_frees=(4,))


def test_manual_wrapper_frees_nothing(cache):
    md = AdtTy("ManuallyDrop", (BOX,))
    assert encode_type(md, cache) == (1,)
    assert destructor_rtoken(md, cache) == (1,)


def test_depth_cap(cache):
    def nest(d):
        ty = AdtTy("String")
        for _ in range(d):
            ty = AdtTy("ManuallyDrop", (ty,))
        return ty

    assert encode_type(TupleTy((nest(MAX_GENERIC_DEPTH),)), cache) == (1,)
    with pytest.raises(EncodingError, match="deeper"):
        encode_type(TupleTy((nest(MAX_GENERIC_DEPTH + 2),)), cache)


def test_dump_is_deterministic(cache):
    a = dump_encodings(STD, analyze_adt_defs(STD))
    b = dump_encodings(STD, analyze_adt_defs(STD))
    assert a == b and "adt Vec: heap_item=1 isolated=[0,1]" in a


def _concrete_types():
    base = st.sampled_from([PRIM, DynTy(), AdtTy("String"), GLOBAL, UNIT, VEC_U8, BOX])
    return st.recursive(
        base,
        lambda inner: st.one_of(
            st.builds(RefTy, inner),
            st.builds(PtrTy, inner),
            st.builds(lambda t: ArrayTy(t, 2), inner),
            st.builds(lambda fs: TupleTy(tuple(fs)), st.lists(inner, max_size=4)),
            st.builds(lambda t: AdtTy("ManuallyDrop", (t,)), inner),
            st.builds(lambda a, b: AdtTy("Vec", (a, b)), inner, inner),
            st.builds(lambda a, b: AdtTy("Box", (a, b)), inner, inner),
        ),
        max_leaves=10,
    )


@given(_concrete_types())
def test_length_law_and_determinism(ty):
    cache = analyze_adt_defs(STD)
    bits = encode_type(ty, cache)
    assert len(bits) == encoded_length(ty, cache)
    assert bits == encode_type(ty, analyze_adt_defs(STD))
    assert set(bits) <= {0, 1}


@given(_concrete_types())
def test_field_bit_matches_naive(ty):
    cache = analyze_adt_defs(STD)
    assert field_bit(ty, cache) == int(naive_heap(ty, STD.adt_map, cap=64))


@given(st.lists(st.sampled_from([PRIM, GLOBAL, UNIT, PtrTy(BOX)]), max_size=5))
def test_monotone_nesting(fields):
    decls = dict(STD.adt_map, Inner=rec("Inner", 0, [PRIM, PtrTy(BOX)]))
    decls["Outer"] = rec("Outer", 0, [AdtTy("Inner")] * 3 + list(fields))
    cache = analyze_adt_defs(decls)
    assert encode_type(AdtTy("Inner"), cache) == (0, 0)
    assert set(encode_type(AdtTy("Outer"), cache)) <= {0}


def test_encoding_work_is_linear_in_fd(cache, monkeypatch):
    """Count field_bit invocations: exactly proportional to f * d on nested families."""
    import leakcheck.encoder as enc

    calls = 0
    real = enc.field_bit

    def counting(ty, c, depth=0):
        nonlocal calls
        calls += 1
        return real(ty, c, depth)

    monkeypatch.setattr(enc, "field_bit", counting)
    for f in (1, 8, 64):
        for d in (1, 8, 64):
            inner = AdtTy("String")
            for _ in range(d):
                inner = AdtTy("ManuallyDrop", (inner,))
            calls = 0
            enc.encode_type(TupleTy((inner,) * f), cache)
            assert calls == f * (d + 1)
