"""Regenerate the shipped IR corpus under src/leakcheck/corpus/.

    python3 scripts/build_corpus.py
"""

from __future__ import annotations

import json
from dataclasses import replace
from pathlib import Path

from leakcheck.ir import (
    PRIM,
    UNIT,
    AdtDecl,
    AdtTy,
    Assign,
    BasicBlock,
    Call,
    Cast,
    Const,
    Copy,
    DerefProj,
    Drop,
    ExternSig,
    FieldProj,
    Function,
    Goto,
    Move,
    ParamTy,
    Place,
    Program,
    PtrTy,
    RefTy,
    Reference,
    Return,
    StorageDead,
    StorageLive,
    Switch,
    serialize_program,
    validate_program,
)

OUT = Path(__file__).resolve().parent.parent / "src" / "leakcheck" / "corpus"

P0, P1 = ParamTy(0), ParamTy(1)
GLOBAL = AdtTy("Global")
STR_REF = RefTy(PRIM)


def adt(name, params, fields, **kw):
    return AdtDecl(name, "record", params, (tuple(fields),), **kw)


STD = (
    adt("PhantomData", 1, [], is_phantom_marker=True),
    adt("Unique", 1, [PtrTy(P0), AdtTy("PhantomData", (P0,))]),
    adt("Global", 0, []),
    adt("RawVec", 2, [AdtTy("Unique", (P0,)), PRIM, P1]),
    adt("Vec", 2, [AdtTy("RawVec", (P0, P1)), PRIM]),
    adt("String", 0, [AdtTy("Vec", (PRIM, GLOBAL))]),
    adt("Box", 2, [AdtTy("Unique", (P0,)), P1]),
    adt("ManuallyDrop", 1, [P0], is_manual_wrapper=True),
)


def box(t=STR_REF):
    return AdtTy("Box", (t, GLOBAL))


def vec(t=PRIM):
    return AdtTy("Vec", (t, GLOBAL))


def md(t):
    return AdtTy("ManuallyDrop", (t,))


STRING = AdtTy("String")
BOX = box()

EXTERNS = {
    # Box::new(&str) returns a fresh heap item; inference would call it a sanitizer
    "Box::new": ExternSig("Box::new", (STR_REF,), BOX, "ordinary"),
    "Box::into_raw": ExternSig("Box::into_raw", (BOX,), PtrTy(BOX)),
    "Box::from_raw": ExternSig("Box::from_raw", (PtrTy(BOX),), BOX),
    "ManuallyDrop::new": ExternSig("ManuallyDrop::new", (BOX,), md(BOX)),
    "ManuallyDrop::new_string": ExternSig("ManuallyDrop::new_string", (STRING,), md(STRING)),
    "ManuallyDrop::into_inner": ExternSig("ManuallyDrop::into_inner", (md(STRING),), STRING),
    "String::from": ExternSig("String::from", (STR_REF,), STRING, "ordinary"),
    "String::into_raw": ExternSig("String::into_raw", (STRING,), PtrTy(STRING)),
    "Vec::new": ExternSig("Vec::new", (), vec()),
    "Vec::leak_ptr": ExternSig("Vec::leak_ptr", (vec(),), PtrTy(PRIM)),
    "drop_in_place": ExternSig("drop_in_place", (PtrTy(BOX),), UNIT, "free"),
    "drop_in_place_string": ExternSig("drop_in_place_string", (PtrTy(STRING),), UNIT, "free"),
    "dealloc_bytes": ExternSig("dealloc_bytes", (PtrTy(PRIM),), UNIT, "free"),
    "should_fail": ExternSig("should_fail", (), PRIM),
}


class Src:
    """Hands out consecutive spans within one pseudo source file."""

    def __init__(self, name: str, first_line: int = 1):
        self.name = name
        self.line = first_line - 1

    def __call__(self) -> str:
        self.line += 1
        return f"{self.name}:{self.line}:5"


def L(i, *proj):
    out = []
    for p in proj:
        out.append(DerefProj() if p == "*" else FieldProj(p))
    return Place(i, tuple(out))


def block(*items):
    *stmts, term = items
    return BasicBlock(tuple(stmts), term)


def call(src, callee, dest, args, target):
    return Call(callee, dest, tuple(args), target, src())


def program(functions, extra_adts=(), entries=None):
    used = set()
    for f in functions:
        for b in f.blocks:
            if isinstance(b.term, Call) and b.term.callee in EXTERNS:
                used.add(b.term.callee)
    externs = tuple(EXTERNS[n] for n in sorted(used))
    names = {f.name for f in functions}
    return Program(STD + tuple(extra_adts), tuple(functions), externs,
                   tuple(entries) if entries is not None else tuple(sorted(names)))


def proxy_decl(name="Proxy", frees=()):
    return adt(name, 1, [PtrTy(P0)], drop_frees=tuple(frees))


# --------------------------------------------------------------------------
# Motivating examples


def wrapped_box(fixed: bool) -> Program:
    s = Src("wrapped_box.rs", 4)
    locals_ = (UNIT, BOX, md(BOX), RefTy(BOX), PtrTy(BOX), UNIT)
    blocks = [
        block(StorageLive(1, s()), call(s, "Box::new", L(1), [Const("buffer")], 1)),
        block(call(s, "ManuallyDrop::new", L(2), [Move(L(1))], 2)),
    ]
    tail = [Reference(L(3), L(2, "*"), s()), Cast(L(4), L(3), PtrTy(BOX), s()), StorageDead(3, s())]
    if fixed:
        blocks.append(block(*tail, call(s, "drop_in_place", L(5), [Copy(L(4))], 3)))
        blocks.append(block(Return(s())))
    else:
        blocks.append(block(*tail, Return(s())))
    return program([Function("main", 0, locals_, tuple(blocks))])


def proxy_drop(fixed: bool) -> Program:
    s = Src("proxy_drop.rs", 10)
    locals_ = (UNIT, BOX, md(BOX), RefTy(BOX), PtrTy(BOX), AdtTy("Proxy", (BOX,)))
    blocks = (
        block(call(s, "Box::new", L(1), [Const("buffer")], 1)),
        block(call(s, "ManuallyDrop::new", L(2), [Move(L(1))], 2)),
        block(Reference(L(3), L(2, "*"), s()), Cast(L(4), L(3), PtrTy(BOX), s()), StorageDead(3, s()),
              Assign(L(5, 0), Move(L(4)), s()), Drop(L(5), 3, s())),
        block(Return(s())),
    )
    return program([Function("main", 0, locals_, blocks)], [proxy_decl(frees=(0,) if fixed else ())])


def boxed_proxy(fixed: bool) -> Program:
    s = Src("boxed_proxy.rs", 1)
    locals_ = (UNIT, BOX, PtrTy(BOX), AdtTy("Proxy", (BOX,)))
    blocks = (
        block(call(s, "Box::new", L(1), [Const("buffer")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(Assign(L(3, 0), Move(L(2)), s()), Drop(L(3), 3, s())),
        block(Return(s())),
    )
    return program([Function("main", 0, locals_, blocks)], [proxy_decl(frees=(0,) if fixed else ())])


# --------------------------------------------------------------------------
# Filter demonstrations


def ffi_export() -> Program:
    s = Src("ffi.rs", 1)
    f = Function("export_buffer", 0, (PtrTy(BOX), BOX), (
        block(call(s, "Box::new", L(1), [Const("ffi")], 1)),
        block(call(s, "Box::into_raw", L(0), [Move(L(1))], 2)),
        block(Return(s())),
    ), is_extern=True)
    return program([f])


def callee_chain() -> Program:
    s = Src("chain.rs", 1)
    inner = Function("inner", 0, (UNIT, BOX, PtrTy(BOX)), (
        block(call(s, "Box::new", L(1), [Const("inner")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(Return(s())),
    ))
    outer = Function("outer", 0, (UNIT, UNIT, BOX, PtrTy(BOX)), (
        block(call(s, "inner", L(1), [], 1)),
        block(call(s, "Box::new", L(2), [Const("outer")], 2)),
        block(call(s, "Box::into_raw", L(3), [Move(L(2))], 3)),
        block(Return(s())),
    ))
    return program([inner, outer])


# --------------------------------------------------------------------------
# Scenario corpus: leaked destructors, overwrites and early-exit paths


def ldi_proxy_box(fixed: bool) -> Program:
    s = Src("ldi_holder.rs", 3)
    locals_ = (UNIT, BOX, PtrTy(BOX), AdtTy("Holder", (BOX,)))
    return program([Function("make_holder", 0, locals_, (
        block(call(s, "Box::new", L(1), [Const("cfg")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(Assign(L(3, 0), Move(L(2)), s()), Drop(L(3), 3, s())),
        block(Return(s())),
    ))], [proxy_decl("Holder", (0,) if fixed else ())])


def ldi_two_fields(fixed: bool) -> Program:
    s = Src("ldi_pair.rs", 7)
    pair = adt("Pair", 0, [PtrTy(BOX), PtrTy(BOX)], drop_frees=(0, 1) if fixed else (0,))
    locals_ = (UNIT, BOX, PtrTy(BOX), BOX, PtrTy(BOX), AdtTy("Pair"))
    return program([Function("make_pair", 0, locals_, (
        block(call(s, "Box::new", L(1), [Const("a")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(call(s, "Box::new", L(3), [Const("b")], 3)),
        block(call(s, "Box::into_raw", L(4), [Move(L(3))], 4)),
        block(Assign(L(5, 0), Move(L(2)), s()), Assign(L(5, 1), Move(L(4)), s()), Drop(L(5), 5, s())),
        block(Return(s())),
    ))], [pair])


def ldi_string_buffer(fixed: bool) -> Program:
    s = Src("ldi_buffer.rs", 12)
    wrapper = adt("TextBuf", 0, [PtrTy(STRING), PRIM], drop_frees=(0,) if fixed else ())
    locals_ = (UNIT, STRING, PtrTy(STRING), AdtTy("TextBuf"))
    return program([Function("text_buffer", 0, locals_, (
        block(call(s, "String::from", L(1), [Const("text")], 1)),
        block(call(s, "String::into_raw", L(2), [Move(L(1))], 2)),
        block(Assign(L(3, 0), Move(L(2)), s()), Assign(L(3, 1), Const(0), s()), Drop(L(3), 3, s())),
        block(Return(s())),
    ))], [wrapper])


def ldi_byte_arena(fixed: bool) -> Program:
    s = Src("ldi_arena.rs", 20)
    arena = adt("Arena", 0, [PRIM, PtrTy(PRIM)], drop_frees=(1,) if fixed else ())
    locals_ = (UNIT, vec(), PtrTy(PRIM), AdtTy("Arena"))
    return program([Function("new_arena", 0, locals_, (
        block(call(s, "Vec::new", L(1), [], 1)),
        block(call(s, "Vec::leak_ptr", L(2), [Move(L(1))], 2)),
        block(Assign(L(3, 0), Const(0), s()), Assign(L(3, 1), Move(L(2)), s()), Drop(L(3), 3, s())),
        block(Return(s())),
    ))], [arena])


def ow_reassign_ptr(fixed: bool) -> Program:
    s = Src("ow_cache.rs", 5)
    locals_ = (UNIT, PtrTy(BOX), BOX, BOX, UNIT)
    blocks = [
        block(call(s, "Box::new", L(2), [Const("first")], 1)),
        block(call(s, "Box::into_raw", L(1), [Move(L(2))], 2)),
        block(call(s, "Box::new", L(3), [Const("second")], 3)),
    ]
    if fixed:
        blocks.append(block(call(s, "drop_in_place", L(4), [Copy(L(1))], 4)))
    else:
        blocks.append(block(Goto(4, s())))
    blocks += [
        block(call(s, "Box::into_raw", L(1), [Move(L(3))], 5)),
        block(call(s, "drop_in_place", L(4), [Copy(L(1))], 6)),
        block(Return(s())),
    ]
    return program([Function("refresh_cache", 0, locals_, tuple(blocks))])


def ow_field_overwrite(fixed: bool) -> Program:
    s = Src("ow_slot.rs", 9)
    slot = proxy_decl("Slot", (0,))
    locals_ = (UNIT, BOX, PtrTy(BOX), BOX, PtrTy(BOX), AdtTy("Slot", (BOX,)), UNIT)
    blocks = [
        block(call(s, "Box::new", L(1), [Const("old")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(Assign(L(5, 0), Move(L(2)), s()), call(s, "Box::new", L(3), [Const("new")], 3)),
        block(call(s, "Box::into_raw", L(4), [Move(L(3))], 4)),
    ]
    if fixed:
        blocks.append(block(call(s, "drop_in_place", L(6), [Copy(L(5, 0))], 5)))
    else:
        blocks.append(block(Goto(5, s())))
    blocks += [
        block(Assign(L(5, 0), Move(L(4)), s()), Drop(L(5), 6, s())),
        block(Return(s())),
    ]
    return program([Function("replace_slot", 0, locals_, tuple(blocks))], [slot])


def ow_loop(fixed: bool) -> Program:
    s = Src("ow_loop.rs", 14)
    locals_ = (UNIT, PtrTy(BOX), BOX, PRIM, UNIT)
    blocks = [
        block(Goto(1, s())),
        block(call(s, "Box::new", L(2), [Const("tick")], 2)),
        block(call(s, "Box::into_raw", L(1), [Move(L(2))], 3)),
    ]
    if fixed:
        blocks.append(block(call(s, "drop_in_place", L(4), [Copy(L(1))], 4)))
    else:
        blocks.append(block(Goto(4, s())))
    blocks += [
        block(call(s, "should_fail", L(3), [], 5)),
        block(Switch(L(3), (1, 6), s())),
        block(Return(s())),
    ]
    return program([Function("poll_loop", 0, locals_, tuple(blocks))])


def pp_early_return(fixed: bool) -> Program:
    s = Src("pp_parse.rs", 30)
    locals_ = (UNIT, BOX, PtrTy(BOX), PRIM, UNIT)
    # the unwinding path exits directly; a join would meet its state away
    panic_path = (block(call(s, "drop_in_place", L(4), [Copy(L(2))], 6)) if fixed
                  else block(Return(s())))
    return program([Function("parse_header", 0, locals_, (
        block(call(s, "Box::new", L(1), [Const("hdr")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(call(s, "should_fail", L(3), [], 3)),
        block(Switch(L(3), (4, 5), s())),
        block(call(s, "drop_in_place", L(4), [Copy(L(2))], 6)),
        panic_path,
        block(Return(s())),
    ))])


def pp_proxy_path(fixed: bool) -> Program:
    s = Src("pp_guard.rs", 40)
    guard = proxy_decl("Guard", (0,))
    locals_ = (UNIT, BOX, PtrTy(BOX), AdtTy("Guard", (BOX,)), PRIM)
    panic = block(Drop(L(3), 6, s())) if fixed else block(Return(s()))
    return program([Function("guarded_op", 0, locals_, (
        block(call(s, "Box::new", L(1), [Const("guard")], 1)),
        block(call(s, "Box::into_raw", L(2), [Move(L(1))], 2)),
        block(Assign(L(3, 0), Move(L(2)), s()), call(s, "should_fail", L(4), [], 3)),
        block(Switch(L(4), (4, 5), s())),
        block(Drop(L(3), 6, s())),
        panic,
        block(Return(s())),
    ))], [guard])


def pp_manually_drop(fixed: bool) -> Program:
    s = Src("pp_name.rs", 50)
    locals_ = (UNIT, STRING, md(STRING), PRIM, STRING, STRING)
    exit_block = 8 if fixed else 7
    blocks = [
        block(call(s, "String::from", L(1), [Const("name")], 1)),
        block(call(s, "ManuallyDrop::new_string", L(2), [Move(L(1))], 2)),
        block(call(s, "should_fail", L(3), [], 3)),
        block(Switch(L(3), (4, 6), s())),
        block(call(s, "ManuallyDrop::into_inner", L(4), [Move(L(2))], 5)),
        block(Drop(L(4), exit_block, s())),
    ]
    if fixed:
        blocks += [block(call(s, "ManuallyDrop::into_inner", L(5), [Move(L(2))], 7)),
                   block(Drop(L(5), 8, s()))]
    else:
        blocks.append(block(Return(s())))
    blocks.append(block(Return(s())))
    return program([Function("rename", 0, locals_, tuple(blocks))])


SCENARIOS = {
    "ldi_holder": ("LeakedDropImpl", ldi_proxy_box, "proxy_type"),
    "ldi_pair": ("LeakedDropImpl", ldi_two_fields, "proxy_type"),
    "ldi_text_buffer": ("LeakedDropImpl", ldi_string_buffer, "proxy_type"),
    "ldi_arena": ("LeakedDropImpl", ldi_byte_arena, "proxy_type"),
    "ow_reassign": ("Overwriting", ow_reassign_ptr, "orphan_object"),
    "ow_slot": ("Overwriting", ow_field_overwrite, "proxy_type"),
    "ow_loop": ("Overwriting", ow_loop, "orphan_object"),
    "pp_early_return": ("PanicPath", pp_early_return, "orphan_object"),
    "pp_guard": ("PanicPath", pp_proxy_path, "proxy_type"),
    "pp_manually_drop": ("PanicPath", pp_manually_drop, "orphan_object"),
}


def taint_span(prog: Program, fn: str, callee: str) -> str:
    f = prog.function_map[fn]
    return next(b.term.span for b in f.blocks if isinstance(b.term, Call) and b.term.callee == callee)


def write(path: Path, prog: Program) -> None:
    problems = validate_program(prog)
    if problems:
        raise SystemExit(f"{path}: {problems}")
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_program(prog), encoding="utf-8")


def main() -> None:
    expected: dict[str, dict] = {}

    def emit(rel: str, prog: Program, leaks: list[dict], **meta) -> None:
        write(OUT / rel, prog)
        expected[rel] = {"leaks": leaks, **meta}

    write(OUT / "std_decls.mir.json", Program(STD))
    expected["std_decls.mir.json"] = {"leaks": []}
    l1 = wrapped_box(False)
    emit("motivating/wrapped_box.mir.json", l1,
         [{"function": "main", "pattern": "orphan_object", "span": taint_span(l1, "main", "ManuallyDrop::new")}])
    emit("motivating/wrapped_box_fixed.mir.json", wrapped_box(True), [])
    l2 = proxy_drop(False)
    emit("motivating/proxy_drop.mir.json", l2,
         [{"function": "main", "pattern": "proxy_type", "span": taint_span(l2, "main", "ManuallyDrop::new")}])
    emit("motivating/proxy_drop_fixed.mir.json", proxy_drop(True), [])
    bp = boxed_proxy(False)
    emit("boxed_proxy/boxed_proxy.mir.json", bp,
         [{"function": "main", "pattern": "proxy_type", "span": taint_span(bp, "main", "Box::into_raw")}])
    emit("boxed_proxy/boxed_proxy_fixed.mir.json", boxed_proxy(True), [])
    ffi = ffi_export()
    emit("filters/ffi_export.mir.json", ffi,
         [{"function": "export_buffer", "pattern": "orphan_object",
           "span": taint_span(ffi, "export_buffer", "Box::into_raw"), "suppressed": "extern_function"}])
    chain = callee_chain()
    emit("filters/callee_chain.mir.json", chain,
         [{"function": "inner", "pattern": "orphan_object", "span": taint_span(chain, "inner", "Box::into_raw"),
           "suppressed": "callee_propagation"},
          {"function": "outer", "pattern": "orphan_object", "span": taint_span(chain, "outer", "Box::into_raw")}])
    for name, (scenario, make, pattern) in SCENARIOS.items():
        leaky = make(False)
        fn = leaky.functions[0].name
        taint = next(b.term.span for b in leaky.functions[0].blocks
                     if isinstance(b.term, Call) and b.term.callee in (
                         "Box::into_raw", "String::into_raw", "Vec::leak_ptr", "ManuallyDrop::new_string"))
        emit(f"scenarios/{name}.mir.json", leaky,
             [{"function": fn, "pattern": pattern, "span": taint}], scenario=scenario, twin=f"{name}_clean")
        emit(f"scenarios/{name}_clean.mir.json", make(True), [], scenario=scenario, twin=name)
    (OUT / "expected.json").write_text(json.dumps(expected, indent=1, sort_keys=True) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
