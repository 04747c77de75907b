"""MIR-subset intermediate representation: data model, JSON (de)serialization
and structural validation.

A program is a JSON document with four top-level keys::

    {"adts": [...], "functions": [...], "externs": [...], "entries": [...]}

Types are tagged objects (``{"k": "adt", "name": "Vec", "args": [...]}``),
places are ``{"local": 3}`` optionally carrying ``"proj": [{"field": 0}]``,
``"proj": ["deref"]`` or ``"proj": ["index"]``, and operands are one of
``{"move": place}``, ``{"copy": place}`` or ``{"const": value}``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterator, Optional, Union

# --------------------------------------------------------------------------
# Types


@dataclass(frozen=True)
class PrimTy:
    pass


@dataclass(frozen=True)
class AdtTy:
    name: str
    args: tuple["Type", ...] = ()


@dataclass(frozen=True)
class ParamTy:
    index: int


@dataclass(frozen=True)
class TupleTy:
    fields: tuple["Type", ...] = ()


@dataclass(frozen=True)
class ArrayTy:
    elem: "Type"
    length: int


@dataclass(frozen=True)
class RefTy:
    pointee: "Type"


@dataclass(frozen=True)
class PtrTy:
    pointee: "Type"


@dataclass(frozen=True)
class SliceTy:
    elem: "Type"


@dataclass(frozen=True)
class DynTy:
    pass


Type = Union[PrimTy, AdtTy, ParamTy, TupleTy, ArrayTy, RefTy, PtrTy, SliceTy, DynTy]
POINTER_TYPES = (RefTy, PtrTy, SliceTy)

PRIM = PrimTy()
DYN = DynTy()
UNIT = TupleTy(())


def pointee(ty: Type) -> Type:
    """The pointed-to type of a reference, raw pointer or slice."""
    if isinstance(ty, (RefTy, PtrTy)):
        return ty.pointee
    if isinstance(ty, SliceTy):
        return ty.elem
    raise TypeError(f"not a pointer type: {ty!r}")


def substitute(ty: Type, args: tuple[Type, ...]) -> Type:
    """Replace ``ParamTy(i)`` by ``args[i]`` throughout ``ty``."""
    if isinstance(ty, ParamTy):
        return args[ty.index] if ty.index < len(args) else ty
    if isinstance(ty, AdtTy):
        return AdtTy(ty.name, tuple(substitute(a, args) for a in ty.args))
    if isinstance(ty, TupleTy):
        return TupleTy(tuple(substitute(f, args) for f in ty.fields))
    if isinstance(ty, ArrayTy):
        return ArrayTy(substitute(ty.elem, args), ty.length)
    if isinstance(ty, RefTy):
        return RefTy(substitute(ty.pointee, args))
    if isinstance(ty, PtrTy):
        return PtrTy(substitute(ty.pointee, args))
    if isinstance(ty, SliceTy):
        return SliceTy(substitute(ty.elem, args))
    return ty


def format_type(ty: Type) -> str:
    """Rust-like rendering used in dumps and messages."""
    if isinstance(ty, PrimTy):
        return "prim"
    if isinstance(ty, DynTy):
        return "dyn"
    if isinstance(ty, ParamTy):
        return f"P{ty.index}"
    if isinstance(ty, AdtTy):
        if not ty.args:
            return ty.name
        return f"{ty.name}<{', '.join(format_type(a) for a in ty.args)}>"
    if isinstance(ty, TupleTy):
        return f"({', '.join(format_type(f) for f in ty.fields)})"
    if isinstance(ty, ArrayTy):
        return f"[{format_type(ty.elem)}; {ty.length}]"
    if isinstance(ty, RefTy):
        return f"&{format_type(ty.pointee)}"
    if isinstance(ty, PtrTy):
        return f"*{format_type(ty.pointee)}"
    return f"[{format_type(ty.elem)}]"


def iter_adt_names(ty: Type) -> Iterator[str]:
    if isinstance(ty, AdtTy):
        yield ty.name
        for a in ty.args:
            yield from iter_adt_names(a)
    elif isinstance(ty, TupleTy):
        for f in ty.fields:
            yield from iter_adt_names(f)
    elif isinstance(ty, (ArrayTy, SliceTy)):
        yield from iter_adt_names(ty.elem)
    elif isinstance(ty, (RefTy, PtrTy)):
        yield from iter_adt_names(ty.pointee)


# --------------------------------------------------------------------------
# Declarations


@dataclass(frozen=True)
class AdtDecl:
    name: str
    kind: str  # "record" | "enum" | "union"
    param_count: int
    variants: tuple[tuple[Type, ...], ...]
    is_phantom_marker: bool = False
    is_manual_wrapper: bool = False
    drop_frees: tuple[int, ...] = ()

    def variant_fields(self, args: tuple[Type, ...], variant: int = 0) -> tuple[Type, ...]:
        return tuple(substitute(f, args) for f in self.variants[variant])


# --------------------------------------------------------------------------
# Places, operands, statements, terminators


@dataclass(frozen=True)
class FieldProj:
    index: int


@dataclass(frozen=True)
class IndexProj:
    pass


@dataclass(frozen=True)
class DerefProj:
    pass


Projection = Union[FieldProj, IndexProj, DerefProj]


@dataclass(frozen=True)
class Place:
    local: int
    projection: tuple[Projection, ...] = ()

    def __str__(self) -> str:
        text = f"_{self.local}"
        for p in self.projection:
            if isinstance(p, FieldProj):
                text = f"{text}.{p.index}"
            elif isinstance(p, DerefProj):
                text = f"(*{text})"
            else:
                text = f"{text}[_]"
        return text


@dataclass(frozen=True)
class Move:
    place: Place


@dataclass(frozen=True)
class Copy:
    place: Place


@dataclass(frozen=True)
class Const:
    value: Any = None


Operand = Union[Move, Copy, Const]


@dataclass(frozen=True)
class Assign:
    dest: Place
    op: Operand
    span: str = ""


@dataclass(frozen=True)
class Reference:
    dest: Place
    src: Place
    span: str = ""


@dataclass(frozen=True)
class AddressOf:
    dest: Place
    src: Place
    span: str = ""


@dataclass(frozen=True)
class Cast:
    dest: Place
    src: Place
    to: Type
    span: str = ""


@dataclass(frozen=True)
class Discriminant:
    dest: Place
    variant: int
    span: str = ""


@dataclass(frozen=True)
class StorageLive:
    local: int
    span: str = ""


@dataclass(frozen=True)
class StorageDead:
    local: int
    span: str = ""


Statement = Union[Assign, Reference, AddressOf, Cast, Discriminant, StorageLive, StorageDead]


@dataclass(frozen=True)
class Goto:
    target: int
    span: str = ""


@dataclass(frozen=True)
class Switch:
    scrutinee: Place
    targets: tuple[int, ...]
    span: str = ""


@dataclass(frozen=True)
class Return:
    span: str = ""


@dataclass(frozen=True)
class Drop:
    place: Place
    target: int
    span: str = ""


@dataclass(frozen=True)
class Call:
    callee: str
    dest: Place
    args: tuple[Operand, ...]
    target: int
    span: str = ""


Terminator = Union[Goto, Switch, Return, Drop, Call]


def successors(term: Terminator) -> tuple[int, ...]:
    if isinstance(term, (Goto, Drop, Call)):
        return (term.target,)
    if isinstance(term, Switch):
        return term.targets
    return ()


@dataclass(frozen=True)
class BasicBlock:
    stmts: tuple[Statement, ...]
    term: Terminator


CALL_KINDS = ("source", "sanitizer", "ordinary", "free")


@dataclass(frozen=True)
class Function:
    name: str
    param_count: int
    locals: tuple[Type, ...]
    blocks: tuple[BasicBlock, ...]
    is_extern: bool = False
    call_kind: Optional[str] = None

    @property
    def return_type(self) -> Type:
        return self.locals[0]

    @property
    def param_types(self) -> tuple[Type, ...]:
        return self.locals[1 : self.param_count + 1]


@dataclass(frozen=True)
class ExternSig:
    name: str
    params: tuple[Type, ...]
    ret: Type
    call_kind: Optional[str] = None


@dataclass(frozen=True)
class Program:
    adts: tuple[AdtDecl, ...] = ()
    functions: tuple[Function, ...] = ()
    externs: tuple[ExternSig, ...] = ()
    entry_functions: tuple[str, ...] = ()

    @cached_property
    def adt_map(self) -> dict[str, AdtDecl]:
        return {a.name: a for a in self.adts}

    @cached_property
    def function_map(self) -> dict[str, Function]:
        return {f.name: f for f in self.functions}

    @cached_property
    def extern_map(self) -> dict[str, ExternSig]:
        return {e.name: e for e in self.externs}

    def adt(self, name: str) -> AdtDecl:
        return self.adt_map[name]

    def entries(self) -> tuple[str, ...]:
        """Functions to analyze; every local function when none are listed."""
        if self.entry_functions:
            return self.entry_functions
        return tuple(f.name for f in self.functions)

    def signature(self, callee: str) -> Optional[tuple[tuple[Type, ...], Type, Optional[str]]]:
        """(param types, return type, call-kind override) of a callee."""
        fn = self.function_map.get(callee)
        if fn is not None:
            return fn.param_types, fn.return_type, fn.call_kind
        ext = self.extern_map.get(callee)
        if ext is not None:
            return ext.params, ext.ret, ext.call_kind
        return None


# --------------------------------------------------------------------------
# Parsing


class IRParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(f"{message}{where}")


_STMT_KINDS = ("assignment", "reference", "addressof", "casting", "discriminant",
               "storagelive", "storagedead")
_TERM_KINDS = ("goto", "switch", "return", "drop", "call")


class _Reader:
    """Converts decoded JSON into IR objects, tracking a path for messages."""

    def __init__(self) -> None:
        self.adt_names: set[str] = set()

    def fail(self, path: str, message: str) -> IRParseError:
        return IRParseError(f"{path}: {message}")

    def get(self, obj: Any, key: str, path: str, kind: type | tuple[type, ...] | None = None,
            default: Any = ...) -> Any:
        if not isinstance(obj, dict):
            raise self.fail(path, "expected an object")
        if key not in obj:
            if default is not ...:
                return default
            raise self.fail(path, f"missing key {key!r}")
        value = obj[key]
        if kind is not None and not isinstance(value, kind) or isinstance(value, bool) and kind is int:
            raise self.fail(f"{path}.{key}", f"expected {getattr(kind, '__name__', kind)}")
        return value

    def nonneg(self, obj: Any, key: str, path: str) -> int:
        value = self.get(obj, key, path, int)
        if value < 0:
            raise self.fail(f"{path}.{key}", "expected a nonnegative integer")
        return value

    def type(self, obj: Any, path: str) -> Type:
        k = self.get(obj, "k", path, str)
        if k == "prim":
            return PRIM
        if k == "dyn":
            return DYN
        if k == "param":
            return ParamTy(self.nonneg(obj, "i", path))
        if k == "adt":
            name = self.get(obj, "name", path, str)
            if name not in self.adt_names:
                raise self.fail(path, f"unknown type reference {name!r}")
            args = self.get(obj, "args", path, list, [])
            return AdtTy(name, tuple(self.type(a, f"{path}.args[{i}]") for i, a in enumerate(args)))
        if k == "tuple":
            fs = self.get(obj, "fs", path, list, [])
            return TupleTy(tuple(self.type(f, f"{path}.fs[{i}]") for i, f in enumerate(fs)))
        if k == "array":
            return ArrayTy(self.type(self.get(obj, "t", path), f"{path}.t"), self.nonneg(obj, "n", path))
        if k == "ref":
            return RefTy(self.type(self.get(obj, "t", path), f"{path}.t"))
        if k == "ptr":
            return PtrTy(self.type(self.get(obj, "t", path), f"{path}.t"))
        if k == "slice":
            return SliceTy(self.type(self.get(obj, "t", path), f"{path}.t"))
        raise self.fail(path, f"unknown type kind {k!r}")

    def place(self, obj: Any, path: str) -> Place:
        local = self.nonneg(obj, "local", path)
        projs: list[Projection] = []
        for i, p in enumerate(self.get(obj, "proj", path, list, [])):
            if p == "deref":
                projs.append(DerefProj())
            elif p == "index":
                projs.append(IndexProj())
            elif isinstance(p, dict) and "field" in p:
                projs.append(FieldProj(self.nonneg(p, "field", f"{path}.proj[{i}]")))
            else:
                raise self.fail(f"{path}.proj[{i}]", "expected 'deref', 'index' or {'field': n}")
        return Place(local, tuple(projs))

    def operand(self, obj: Any, path: str) -> Operand:
        if not isinstance(obj, dict) or len(obj) != 1:
            raise self.fail(path, "operand must be one of move/copy/const")
        (key, value), = obj.items()
        if key == "move":
            return Move(self.place(value, f"{path}.move"))
        if key == "copy":
            return Copy(self.place(value, f"{path}.copy"))
        if key == "const":
            return Const(value)
        raise self.fail(path, f"unknown operand kind {key!r}")

    def statement(self, obj: Any, span: str, path: str) -> Statement:
        kind = self.get(obj, "kind", path, str)
        if kind == "assignment":
            return Assign(self.place(self.get(obj, "dest", path), f"{path}.dest"),
                          self.operand(self.get(obj, "op", path), f"{path}.op"), span)
        if kind in ("reference", "addressof"):
            cls = Reference if kind == "reference" else AddressOf
            return cls(self.place(self.get(obj, "dest", path), f"{path}.dest"),
                       self.place(self.get(obj, "src", path), f"{path}.src"), span)
        if kind == "casting":
            return Cast(self.place(self.get(obj, "dest", path), f"{path}.dest"),
                        self.place(self.get(obj, "src", path), f"{path}.src"),
                        self.type(self.get(obj, "to", path), f"{path}.to"), span)
        if kind == "discriminant":
            return Discriminant(self.place(self.get(obj, "dest", path), f"{path}.dest"),
                                self.nonneg(obj, "variant", path), span)
        if kind == "storagelive":
            return StorageLive(self.nonneg(obj, "local", path), span)
        if kind == "storagedead":
            return StorageDead(self.nonneg(obj, "local", path), span)
        raise self.fail(path, f"unknown statement kind {kind!r}")

    def terminator(self, obj: Any, span: str, nblocks: int, path: str) -> Terminator:
        kind = self.get(obj, "kind", path, str)

        def block(key: str, value: Any = ...) -> int:
            target = self.nonneg(obj, key, path) if value is ... else value
            if not isinstance(target, int) or isinstance(target, bool) or not 0 <= target < nblocks:
                raise self.fail(f"{path}.{key}", f"unknown block id {target!r}")
            return target

        if kind == "goto":
            return Goto(block("target"), span)
        if kind == "switch":
            targets = self.get(obj, "targets", path, list)
            if not targets:
                raise self.fail(path, "switch needs at least one target")
            return Switch(self.place(self.get(obj, "scrutinee", path), f"{path}.scrutinee"),
                          tuple(block("targets", t) for t in targets), span)
        if kind == "return":
            return Return(span)
        if kind == "drop":
            return Drop(self.place(self.get(obj, "place", path), f"{path}.place"), block("target"), span)
        if kind == "call":
            args = self.get(obj, "args", path, list, [])
            return Call(self.get(obj, "callee", path, str),
                        self.place(self.get(obj, "dest", path), f"{path}.dest"),
                        tuple(self.operand(a, f"{path}.args[{i}]") for i, a in enumerate(args)),
                        block("target"), span)
        raise self.fail(path, f"unknown terminator kind {kind!r}")

    def adt(self, obj: Any, path: str) -> AdtDecl:
        kind = self.get(obj, "kind", path, str)
        if kind not in ("record", "enum", "union"):
            raise self.fail(f"{path}.kind", f"unknown adt kind {kind!r}")
        variants = self.get(obj, "variants", path, list)
        return AdtDecl(
            name=self.get(obj, "name", path, str),
            kind=kind,
            param_count=self.nonneg(obj, "params", path),
            variants=tuple(
                tuple(self.type(t, f"{path}.variants[{v}][{i}]") for i, t in enumerate(self._list(fs, f"{path}.variants[{v}]")))
                for v, fs in enumerate(variants)
            ),
            is_phantom_marker=bool(self.get(obj, "phantom_marker", path, bool, False)),
            is_manual_wrapper=bool(self.get(obj, "manual_wrapper", path, bool, False)),
            drop_frees=tuple(self._ints(self.get(obj, "drop_frees", path, list, []), f"{path}.drop_frees")),
        )

    def _list(self, value: Any, path: str) -> list:
        if not isinstance(value, list):
            raise self.fail(path, "expected a list")
        return value

    def _ints(self, values: list, path: str) -> list[int]:
        for v in values:
            if not isinstance(v, int) or isinstance(v, bool):
                raise self.fail(path, "expected a list of integers")
        return values

    def call_kind(self, obj: Any, path: str) -> Optional[str]:
        ck = self.get(obj, "call_kind", path, (str, type(None)), None)
        if ck is not None and ck not in CALL_KINDS:
            raise self.fail(f"{path}.call_kind", f"unknown call kind {ck!r}")
        return ck

    def function(self, obj: Any, path: str) -> Function:
        blocks_raw = self.get(obj, "blocks", path, list)
        blocks = []
        for b, raw in enumerate(blocks_raw):
            bpath = f"{path}.blocks[{b}]"
            stmts_raw = self.get(raw, "stmts", bpath, list, [])
            spans = self.get(raw, "spans", bpath, list, [])
            if len(spans) != len(stmts_raw) + 1:
                raise self.fail(bpath, "spans must hold one entry per statement plus one for the terminator")
            stmts = tuple(self.statement(s, str(spans[i]), f"{bpath}.stmts[{i}]") for i, s in enumerate(stmts_raw))
            term = self.terminator(self.get(raw, "term", bpath), str(spans[-1]), len(blocks_raw), f"{bpath}.term")
            blocks.append(BasicBlock(stmts, term))
        locals_raw = self.get(obj, "locals", path, list)
        return Function(
            name=self.get(obj, "name", path, str),
            param_count=self.nonneg(obj, "params", path),
            locals=tuple(self.type(t, f"{path}.locals[{i}]") for i, t in enumerate(locals_raw)),
            blocks=tuple(blocks),
            is_extern=bool(self.get(obj, "extern", path, bool, False)),
            call_kind=self.call_kind(obj, path),
        )

    def extern(self, obj: Any, path: str) -> ExternSig:
        params = self.get(obj, "params", path, list, [])
        return ExternSig(
            name=self.get(obj, "name", path, str),
            params=tuple(self.type(t, f"{path}.params[{i}]") for i, t in enumerate(params)),
            ret=self.type(self.get(obj, "ret", path), f"{path}.ret"),
            call_kind=self.call_kind(obj, path),
        )


def _check_unique(names: list[str], what: str) -> None:
    seen: set[str] = set()
    for n in names:
        if n in seen:
            raise IRParseError(f"duplicate name: {what} {n!r}")
        seen.add(n)


def program_from_dict(doc: Any) -> Program:
    reader = _Reader()
    if not isinstance(doc, dict):
        raise IRParseError("top level must be an object")
    adts_raw = reader.get(doc, "adts", "$", list, [])
    names = [reader.get(a, "name", f"$.adts[{i}]", str) for i, a in enumerate(adts_raw)]
    _check_unique(names, "adt")
    reader.adt_names = set(names)
    adts = tuple(reader.adt(a, f"$.adts[{i}]") for i, a in enumerate(adts_raw))
    functions = tuple(reader.function(f, f"$.functions[{i}]")
                      for i, f in enumerate(reader.get(doc, "functions", "$", list, [])))
    externs = tuple(reader.extern(e, f"$.externs[{i}]")
                    for i, e in enumerate(reader.get(doc, "externs", "$", list, [])))
    _check_unique([f.name for f in functions] + [e.name for e in externs], "function")
    entries = reader.get(doc, "entries", "$", list, [])
    for e in entries:
        if not isinstance(e, str):
            raise IRParseError("$.entries: expected a list of function names")
    return Program(adts, functions, externs, tuple(entries))


def parse_program(text: str) -> Program:
    """Parse the JSON serialization of a program."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IRParseError(f"syntax error: {exc.msg}", exc.lineno, exc.colno) from None
    return program_from_dict(doc)


def load_program(path) -> Program:
    with open(path, encoding="utf-8") as fh:
        return parse_program(fh.read())


# --------------------------------------------------------------------------
# Serialization


def type_to_dict(ty: Type) -> dict:
    if isinstance(ty, PrimTy):
        return {"k": "prim"}
    if isinstance(ty, DynTy):
        return {"k": "dyn"}
    if isinstance(ty, ParamTy):
        return {"k": "param", "i": ty.index}
    if isinstance(ty, AdtTy):
        return {"k": "adt", "name": ty.name, "args": [type_to_dict(a) for a in ty.args]}
    if isinstance(ty, TupleTy):
        return {"k": "tuple", "fs": [type_to_dict(f) for f in ty.fields]}
    if isinstance(ty, ArrayTy):
        return {"k": "array", "t": type_to_dict(ty.elem), "n": ty.length}
    if isinstance(ty, RefTy):
        return {"k": "ref", "t": type_to_dict(ty.pointee)}
    if isinstance(ty, PtrTy):
        return {"k": "ptr", "t": type_to_dict(ty.pointee)}
    return {"k": "slice", "t": type_to_dict(ty.elem)}


def place_to_dict(place: Place) -> dict:
    out: dict[str, Any] = {"local": place.local}
    if place.projection:
        out["proj"] = [
            {"field": p.index} if isinstance(p, FieldProj) else ("deref" if isinstance(p, DerefProj) else "index")
            for p in place.projection
        ]
    return out


def operand_to_dict(op: Operand) -> dict:
    if isinstance(op, Move):
        return {"move": place_to_dict(op.place)}
    if isinstance(op, Copy):
        return {"copy": place_to_dict(op.place)}
    return {"const": op.value}


def statement_to_dict(s: Statement) -> dict:
    if isinstance(s, Assign):
        return {"kind": "assignment", "dest": place_to_dict(s.dest), "op": operand_to_dict(s.op)}
    if isinstance(s, (Reference, AddressOf)):
        kind = "reference" if isinstance(s, Reference) else "addressof"
        return {"kind": kind, "dest": place_to_dict(s.dest), "src": place_to_dict(s.src)}
    if isinstance(s, Cast):
        return {"kind": "casting", "dest": place_to_dict(s.dest), "src": place_to_dict(s.src),
                "to": type_to_dict(s.to)}
    if isinstance(s, Discriminant):
        return {"kind": "discriminant", "dest": place_to_dict(s.dest), "variant": s.variant}
    kind = "storagelive" if isinstance(s, StorageLive) else "storagedead"
    return {"kind": kind, "local": s.local}


def terminator_to_dict(t: Terminator) -> dict:
    if isinstance(t, Goto):
        return {"kind": "goto", "target": t.target}
    if isinstance(t, Switch):
        return {"kind": "switch", "scrutinee": place_to_dict(t.scrutinee), "targets": list(t.targets)}
    if isinstance(t, Return):
        return {"kind": "return"}
    if isinstance(t, Drop):
        return {"kind": "drop", "place": place_to_dict(t.place), "target": t.target}
    return {"kind": "call", "callee": t.callee, "dest": place_to_dict(t.dest),
            "args": [operand_to_dict(a) for a in t.args], "target": t.target}


def program_to_dict(p: Program) -> dict:
    def adt(a: AdtDecl) -> dict:
        return {
            "name": a.name, "kind": a.kind, "params": a.param_count,
            "variants": [[type_to_dict(t) for t in v] for v in a.variants],
            "phantom_marker": a.is_phantom_marker, "manual_wrapper": a.is_manual_wrapper,
            "drop_frees": list(a.drop_frees),
        }

    def function(f: Function) -> dict:
        out: dict[str, Any] = {"name": f.name, "params": f.param_count,
                               "locals": [type_to_dict(t) for t in f.locals], "extern": f.is_extern}
        if f.call_kind is not None:
            out["call_kind"] = f.call_kind
        out["blocks"] = [
            {"stmts": [statement_to_dict(s) for s in b.stmts], "term": terminator_to_dict(b.term),
             "spans": [s.span for s in b.stmts] + [b.term.span]}
            for b in f.blocks
        ]
        return out

    def extern(e: ExternSig) -> dict:
        out: dict[str, Any] = {"name": e.name, "params": [type_to_dict(t) for t in e.params],
                               "ret": type_to_dict(e.ret)}
        if e.call_kind is not None:
            out["call_kind"] = e.call_kind
        return out

    return {
        "adts": [adt(a) for a in p.adts],
        "functions": [function(f) for f in p.functions],
        "externs": [extern(e) for e in p.externs],
        "entries": list(p.entry_functions),
    }


def serialize_program(p: Program) -> str:
    return json.dumps(program_to_dict(p), indent=1) + "\n"


# --------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Finding:
    message: str
    where: str
    severity: str = "error"  # "error" | "untracked"

    def __str__(self) -> str:
        return f"{self.where}: {self.message}"


@dataclass
class _Validator:
    program: Program
    findings: list[Finding] = field(default_factory=list)

    def add(self, where: str, message: str, severity: str = "error") -> None:
        self.findings.append(Finding(message, where, severity))

    def check_type(self, ty: Type, param_count: int, where: str) -> None:
        if isinstance(ty, ParamTy):
            if ty.index >= param_count:
                self.add(where, f"generic parameter P{ty.index} out of range")
        elif isinstance(ty, AdtTy):
            decl = self.program.adt_map.get(ty.name)
            if decl is None:
                self.add(where, f"unknown type reference {ty.name!r}")
            elif len(ty.args) != decl.param_count:
                self.add(where, f"{ty.name} expects {decl.param_count} generic arguments, got {len(ty.args)}")
            for a in ty.args:
                self.check_type(a, param_count, where)
        elif isinstance(ty, TupleTy):
            for f in ty.fields:
                self.check_type(f, param_count, where)
        elif isinstance(ty, (ArrayTy, SliceTy)):
            self.check_type(ty.elem, param_count, where)
        elif isinstance(ty, (RefTy, PtrTy)):
            self.check_type(ty.pointee, param_count, where)

    def check_adt(self, a: AdtDecl) -> None:
        where = f"adt {a.name}"
        if not a.variants:
            self.add(where, "adt needs at least one variant")
            return
        if a.kind in ("record", "union") and len(a.variants) != 1:
            self.add(where, f"{a.kind} must have exactly one variant")
        for v in a.variants:
            for t in v:
                self.check_type(t, a.param_count, where)
        for i in a.drop_frees:
            if not 0 <= i < len(a.variants[0]):
                self.add(where, "invalid drop_frees index")
        if a.is_phantom_marker and a.is_manual_wrapper:
            self.add(where, "adt cannot be both phantom marker and manual wrapper")
        if a.is_phantom_marker and (a.param_count < 1 or any(a.variants[0])):
            self.add(where, "phantom marker needs a generic parameter and no stored fields")

    def check_place(self, f: Function, place: Place, where: str) -> None:
        if not 0 <= place.local < len(f.locals):
            self.add(where, f"unknown local _{place.local}")
            return
        if len(place.projection) > 1:
            self.add(where, "projection depth exceeds one")
        for p in place.projection:
            if isinstance(p, IndexProj):
                self.add(where, "index projection is untracked", "untracked")

    def check_operand(self, f: Function, op: Operand, where: str) -> None:
        if isinstance(op, (Move, Copy)):
            self.check_place(f, op.place, where)

    def check_function(self, f: Function) -> None:
        where = f"fn {f.name}"
        if not f.locals:
            self.add(where, "function needs a return place (local 0)")
            return
        if f.param_count + 1 > len(f.locals):
            self.add(where, "parameter count exceeds number of locals")
        for i, t in enumerate(f.locals):
            self.check_type(t, 0, f"{where} local _{i}")
        if not f.blocks:
            self.add(where, "function needs at least one block")
            return
        for b, block in enumerate(f.blocks):
            for i, s in enumerate(block.stmts):
                sw = f"{where} bb{b}[{i}]"
                if not s.span:
                    self.add(sw, "missing span")
                if isinstance(s, (StorageLive, StorageDead)):
                    if not 0 <= s.local < len(f.locals):
                        self.add(sw, f"unknown local _{s.local}")
                    continue
                self.check_place(f, s.dest, sw)
                if isinstance(s, Assign):
                    self.check_operand(f, s.op, sw)
                elif isinstance(s, (Reference, AddressOf, Cast)):
                    self.check_place(f, s.src, sw)
                if isinstance(s, Cast):
                    self.check_type(s.to, 0, sw)
            tw = f"{where} bb{b}.term"
            term = block.term
            if not term.span:
                self.add(tw, "missing span")
            for t in successors(term):
                if not 0 <= t < len(f.blocks):
                    self.add(tw, "unknown block id")
            if isinstance(term, Switch):
                self.check_place(f, term.scrutinee, tw)
            elif isinstance(term, Drop):
                self.check_place(f, term.place, tw)
            elif isinstance(term, Call):
                self.check_place(f, term.dest, tw)
                for a in term.args:
                    self.check_operand(f, a, tw)
                sig = self.program.signature(term.callee)
                if sig is None:
                    self.add(tw, f"unresolved callee {term.callee!r}")
                elif len(sig[0]) != len(term.args):
                    self.add(tw, f"call to {term.callee} passes {len(term.args)} arguments, expected {len(sig[0])}")
        # reachability from the entry block
        seen = {0}
        stack = [0]
        while stack:
            b = stack.pop()
            for t in successors(f.blocks[b].term):
                if 0 <= t < len(f.blocks) and t not in seen:
                    seen.add(t)
                    stack.append(t)
        for b in range(len(f.blocks)):
            if b not in seen:
                self.add(f"{where} bb{b}", "block unreachable from entry")


def validate_program(p: Program) -> list[Finding]:
    """Return every structural invariant violation; an empty list means valid."""
    v = _Validator(p)
    for a in p.adts:
        v.check_adt(a)
    for e in p.externs:
        for t in (*e.params, e.ret):
            v.check_type(t, 0, f"extern {e.name}")
    for f in p.functions:
        v.check_function(f)
    names = p.function_map
    for e in p.entry_functions:
        if e not in names:
            v.add("entries", f"unknown entry function {e!r}")
    return v.findings
