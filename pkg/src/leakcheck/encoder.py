"""Type encoder: ADT-definition analysis and rtoken construction.

``analyze_adt_defs`` decides, once per nominal type definition, whether the
type owns a heap allocation (``heap_item``) and which of its generic
parameters sit in a bare field position (``isolated_parameter``).  The
per-type encoding then only reads those cached facts, recursing into generic
arguments solely through isolated parameters.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import TopologicalSorter
from typing import Iterator, Optional

from .graphs import tarjan_scc
from .ir import (
    POINTER_TYPES,
    AdtDecl,
    AdtTy,
    ArrayTy,
    Cast,
    DynTy,
    ParamTy,
    PrimTy,
    Program,
    PtrTy,
    RefTy,
    TupleTy,
    Type,
    format_type,
    pointee,
)

MAX_GENERIC_DEPTH = 64

Rtoken = tuple[int, ...]


class EncodingError(ValueError):
    pass


@dataclass(frozen=True)
class AdtAnalysisResult:
    heap_item: bool
    isolated_parameter: tuple[bool, ...]


@dataclass
class AnalysisCache:
    """Per-definition analysis results plus the declarations they describe."""

    decls: dict[str, AdtDecl]
    results: dict[str, AdtAnalysisResult] = field(default_factory=dict)

    def __getitem__(self, name: str) -> AdtAnalysisResult:
        return self.results[name]

    def __contains__(self, name: str) -> bool:
        return name in self.results

    def insert(self, name: str, result: AdtAnalysisResult) -> None:
        if name in self.results:
            raise KeyError(f"{name} already analyzed")
        self.results[name] = result

    def decl(self, name: str) -> AdtDecl:
        try:
            return self.decls[name]
        except KeyError:
            raise EncodingError(f"unknown adt {name!r}") from None


# --------------------------------------------------------------------------
# ADT-definition analysis


def _field_adts(ty: Type, in_args: bool = False) -> Iterator[tuple[str, bool]]:
    """(adt name, reached-through-generic-args) for every adt a field stores.

    Pointer-kind types contribute nothing: a pointer field never makes its
    container a heap item.
    """
    if isinstance(ty, AdtTy):
        yield ty.name, in_args
        for a in ty.args:
            yield from _field_adts(a, True)
    elif isinstance(ty, TupleTy):
        for f in ty.fields:
            yield from _field_adts(f, in_args)
    elif isinstance(ty, ArrayTy):
        yield from _field_adts(ty.elem, in_args)


def _is_heap_item_unit(decl: AdtDecl, decls: dict[str, AdtDecl]) -> bool:
    for variant in decl.variants:
        has_marker = any(
            isinstance(t, AdtTy)
            and t.name in decls
            and decls[t.name].is_phantom_marker
            and t.args
            and t.args[0] != TupleTy(())
            for t in variant
        )
        has_pointer = any(isinstance(t, (PtrTy, RefTy)) for t in variant)
        if has_marker and has_pointer:
            return True
    return False


def dependency_order(decls: dict[str, AdtDecl]) -> list[str]:
    """Definitions ordered so every dependency precedes its dependents.

    Edges that close a cycle through generic arguments (``P<T> { q: Q<P<T>> }``)
    are dropped first; a cycle made only of direct fields is an infinitely
    sized type and rejected.
    """
    names = sorted(decls)
    direct: dict[str, set[str]] = {n: set() for n in names}
    via_args: dict[str, set[str]] = {n: set() for n in names}
    for n in names:
        for variant in decls[n].variants:
            for t in variant:
                for dep, in_args in _field_adts(t):
                    if dep not in decls:
                        raise EncodingError(f"unknown adt {dep!r} in {n}")
                    (via_args if in_args else direct)[n].add(dep)

    def all_succ(n: str) -> list[str]:
        return sorted(direct[n] | via_args[n])

    comp_of: dict[str, int] = {}
    for i, comp in enumerate(tarjan_scc(names, all_succ)):
        for n in comp:
            comp_of[n] = i
    kept: dict[str, set[str]] = {}
    for n in names:
        kept[n] = set(direct[n]) | {d for d in via_args[n] if comp_of[d] != comp_of[n]}
    for comp in tarjan_scc(names, lambda n: sorted(kept[n])):
        if len(comp) > 1 or comp[0] in kept[comp[0]]:
            raise EncodingError(f"recursive type without indirection: {', '.join(sorted(comp))}")

    # weakly connected components, each ordered dependencies-first
    undirected: dict[str, set[str]] = {n: set() for n in names}
    for n in names:
        for d in kept[n]:
            undirected[n].add(d)
            undirected[d].add(n)
    order: list[str] = []
    seen: set[str] = set()
    for n in names:
        if n in seen:
            continue
        comp, stack = [], [n]
        seen.add(n)
        while stack:
            v = stack.pop()
            comp.append(v)
            for w in sorted(undirected[v]):
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        sorter = TopologicalSorter({v: sorted(kept[v]) for v in sorted(comp)})
        order.extend(sorter.static_order())
    return order


def _static_field_heap(ty: Type, cache: AnalysisCache) -> bool:
    if isinstance(ty, DynTy):
        return True
    if isinstance(ty, TupleTy):
        return any(_static_field_heap(f, cache) for f in ty.fields)
    if isinstance(ty, ArrayTy):
        return _static_field_heap(ty.elem, cache)
    if isinstance(ty, AdtTy):
        if ty.name not in cache:  # edge broken to cut generic recursion
            return False
        res = cache[ty.name]
        return res.heap_item or any(
            iso and _static_field_heap(arg, cache) for iso, arg in zip(res.isolated_parameter, ty.args)
        )
    return False


def _occurs_isolated(ty: Type, index: int, cache: AnalysisCache) -> bool:
    if isinstance(ty, ParamTy):
        return ty.index == index
    if isinstance(ty, TupleTy):
        return any(_occurs_isolated(f, index, cache) for f in ty.fields)
    if isinstance(ty, ArrayTy):
        return _occurs_isolated(ty.elem, index, cache)
    if isinstance(ty, AdtTy) and ty.name in cache:
        res = cache[ty.name]
        return any(iso and _occurs_isolated(arg, index, cache) for iso, arg in zip(res.isolated_parameter, ty.args))
    return False


def analyze_decl(decl: AdtDecl, cache: AnalysisCache) -> AdtAnalysisResult:
    fields = [t for variant in decl.variants for t in variant]
    heap = _is_heap_item_unit(decl, cache.decls) or any(_static_field_heap(t, cache) for t in fields)
    isolated = tuple(any(_occurs_isolated(t, i, cache) for t in fields) for i in range(decl.param_count))
    return AdtAnalysisResult(heap, isolated)


def analyze_adt_defs(program: Program | dict[str, AdtDecl]) -> AnalysisCache:
    """Analyze every type definition in inverse topological order."""
    decls = program if isinstance(program, dict) else dict(program.adt_map)
    cache = AnalysisCache(decls)
    for name in dependency_order(decls):
        cache.insert(name, analyze_decl(decls[name], cache))
    return cache


# --------------------------------------------------------------------------
# Type encoding


def field_bit(ty: Type, cache: AnalysisCache, depth: int = 0) -> int:
    """1 when a value of ``ty`` stored in a field holds a heap item."""
    if depth > MAX_GENERIC_DEPTH:
        raise EncodingError(f"generic nesting deeper than {MAX_GENERIC_DEPTH}")
    if isinstance(ty, (DynTy, ParamTy)):
        return 1
    if isinstance(ty, (PrimTy, *POINTER_TYPES)):
        return 0
    if isinstance(ty, TupleTy):
        return int(any(field_bit(f, cache, depth) for f in ty.fields))
    if isinstance(ty, ArrayTy):
        return field_bit(ty.elem, cache, depth)
    if ty.name not in cache:
        cache.decl(ty.name)
        raise EncodingError(f"adt {ty.name!r} was not analyzed")
    res = cache[ty.name]
    if res.heap_item:
        return 1
    for iso, arg in zip(res.isolated_parameter, ty.args):
        if iso and field_bit(arg, cache, depth + 1):
            return 1
    return 0


def _variant_fields(ty: AdtTy, cache: AnalysisCache, variant_hint: Optional[int]) -> Optional[tuple[Type, ...]]:
    decl = cache.decl(ty.name)
    if decl.kind == "enum":
        if variant_hint is None:
            return None
        if not 0 <= variant_hint < len(decl.variants):
            raise EncodingError(f"variant {variant_hint} out of range for {ty.name}")
        return decl.variant_fields(ty.args, variant_hint)
    return decl.variant_fields(ty.args, 0)


def encode_type(ty: Type, cache: AnalysisCache, variant_hint: Optional[int] = None) -> Rtoken:
    """Constructor rtoken of ``ty`` in its fully initialized state."""
    if isinstance(ty, PrimTy):
        return (0,)
    if isinstance(ty, (DynTy, ParamTy)):
        return (1,)
    if isinstance(ty, POINTER_TYPES):
        return (0,) * encoded_length(pointee(ty), cache)
    if isinstance(ty, TupleTy):
        return tuple(field_bit(f, cache) for f in ty.fields)
    if isinstance(ty, ArrayTy):
        return (field_bit(ty.elem, cache),)
    fields = _variant_fields(ty, cache, variant_hint)
    if fields is None:
        return (0,)
    return tuple(field_bit(f, cache) for f in fields)


def encoded_length(ty: Type, cache: AnalysisCache, variant_hint: Optional[int] = None) -> int:
    if isinstance(ty, (PrimTy, DynTy, ParamTy, ArrayTy)):
        return 1
    if isinstance(ty, POINTER_TYPES):
        return encoded_length(pointee(ty), cache)
    if isinstance(ty, TupleTy):
        return len(ty.fields)
    decl = cache.decl(ty.name)
    if decl.kind == "enum":
        if variant_hint is None:
            return 1
        if not 0 <= variant_hint < len(decl.variants):
            raise EncodingError(f"variant {variant_hint} out of range for {ty.name}")
        return len(decl.variants[variant_hint])
    return len(decl.variants[0])


def holder_mask(ty: Type, cache: AnalysisCache, variant_hint: Optional[int] = None) -> Rtoken:
    """Bits a value of ``ty`` may hold once context is known.

    Objects hold what their constructor holds; pointer types hold what their
    pointee's constructor holds.
    """
    while isinstance(ty, POINTER_TYPES):
        ty = pointee(ty)
        variant_hint = None
    return encode_type(ty, cache, variant_hint)


def is_manual_wrapper(ty: Type, cache: AnalysisCache) -> bool:
    return isinstance(ty, AdtTy) and cache.decl(ty.name).is_manual_wrapper


def destructor_rtoken(ty: Type, cache: AnalysisCache, drop_frees: Optional[tuple[int, ...]] = None,
                      variant_hint: Optional[int] = None) -> Rtoken:
    """Mask met with a value's state when it is dropped.

    A bit is cleared (freed) when the constructor marks it as a heap item or
    the user-written destructor releases that field explicitly.  Manual-release
    wrappers, and fields typed as one, are never released implicitly.
    """
    ctor = encode_type(ty, cache, variant_hint)
    wrapper_fields: tuple[bool, ...] = (False,) * len(ctor)
    if isinstance(ty, AdtTy):
        decl = cache.decl(ty.name)
        if drop_frees is None:
            drop_frees = decl.drop_frees
        fields = _variant_fields(ty, cache, variant_hint)
        if decl.is_manual_wrapper:
            wrapper_fields = (True,) * len(ctor)
        elif fields is not None:
            wrapper_fields = tuple(is_manual_wrapper(f, cache) for f in fields)
    elif isinstance(ty, TupleTy):
        wrapper_fields = tuple(is_manual_wrapper(f, cache) for f in ty.fields)
    frees = tuple(drop_frees or ())
    for i in frees:
        if not 0 <= i < len(ctor):
            raise EncodingError(f"drop_frees index {i} out of range for {format_type(ty)}")
    return tuple(
        0 if (bit == 1 and not wrapped) or i in frees else 1
        for i, (bit, wrapped) in enumerate(zip(ctor, wrapper_fields))
    )


def collect_types(program: Program) -> list[Type]:
    """Every type mentioned by function locals, casts and extern signatures."""
    seen: dict[Type, None] = {}
    for f in program.functions:
        for t in f.locals:
            seen.setdefault(t)
        for b in f.blocks:
            for s in b.stmts:
                if isinstance(s, Cast):
                    seen.setdefault(s.to)
    for e in program.externs:
        for t in (*e.params, e.ret):
            seen.setdefault(t)
    return list(seen)


def dump_encodings(program: Program, cache: AnalysisCache) -> list[str]:
    lines = []
    for name in sorted(cache.results):
        res = cache[name]
        iso = ",".join("1" if b else "0" for b in res.isolated_parameter)
        lines.append(f"adt {name}: heap_item={int(res.heap_item)} isolated=[{iso}]")
    for ty in sorted(collect_types(program), key=format_type):
        try:
            bits = encode_type(ty, cache)
        except EncodingError as exc:
            lines.append(f"type {format_type(ty)}: error: {exc}")
            continue
        lines.append(f"type {format_type(ty)}: [{','.join(str(b) for b in bits)}]")
    return lines
