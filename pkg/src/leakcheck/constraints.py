"""Leak-free memory model: constraint generation over the IR.

Every local is tracked as a versioned vector of lifted booleans whose width
is fixed by the local's type.  Rules never mutate a version; they introduce
a fresh one and relate it to the previous state with assertions.  The walk
follows a :class:`~leakcheck.cfg.TraversalPlan`, so each block emits its
constraints exactly once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

from . import lattice
from .cfg import TraversalPlan, build_traversal_plan
from .encoder import (
    AnalysisCache,
    EncodingError,
    destructor_rtoken,
    encode_type,
    encoded_length,
    field_bit,
    holder_mask,
    is_manual_wrapper,
)
from .ir import (
    POINTER_TYPES,
    AddressOf,
    AdtTy,
    ArrayTy,
    Assign,
    Call,
    Cast,
    Const,
    Copy,
    DerefProj,
    Discriminant,
    Drop,
    FieldProj,
    Finding,
    Function,
    Move,
    Operand,
    Place,
    PrimTy,
    Program,
    PtrTy,
    RefTy,
    Reference,
    Return,
    Statement,
    StorageDead,
    StorageLive,
    TupleTy,
    Type,
    pointee,
)

# --------------------------------------------------------------------------
# Constraint vocabulary


@dataclass(frozen=True)
class VarVersion:
    local: int
    generation: int
    width: int

    def __str__(self) -> str:
        return f"_{self.local}#{self.generation}"


@dataclass(frozen=True)
class Slice:
    """A subset of a version's bits, in order."""

    var: VarVersion
    bits: tuple[int, ...]

    def __len__(self) -> int:
        return len(self.bits)

    def __str__(self) -> str:
        if self.bits == tuple(range(self.var.width)):
            return str(self.var)
        if len(self.bits) == 1:
            return f"{self.var}.{self.bits[0]}"
        return f"{self.var}{{{','.join(map(str, self.bits))}}}"


def whole(var: VarVersion) -> Slice:
    return Slice(var, tuple(range(var.width)))


def bit(var: VarVersion, index: int) -> Slice:
    return Slice(var, (index,))


def _vec(values: Sequence[int]) -> str:
    return "[" + ",".join(str(v) for v in values) + "]"


@dataclass(frozen=True)
class Eq:
    lhs: Slice
    rhs: Slice

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


@dataclass(frozen=True)
class EqConst:
    lhs: Slice
    value: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.lhs} = {_vec(self.value)}"


@dataclass(frozen=True)
class EqMeet:
    """``lhs[i] = meet(operands[0][i], ..., mask[i])``."""

    lhs: Slice
    operands: tuple[Slice, ...]
    mask: Optional[tuple[int, ...]] = None

    def __str__(self) -> str:
        parts = [str(o) for o in self.operands]
        if self.mask is not None:
            parts.append(_vec(self.mask))
        return f"{self.lhs} = meet({', '.join(parts)})"


@dataclass(frozen=True)
class EqExt:
    """``target[i] = meet(join(src), mask[i])``: replicate a scalar, then mask."""

    src: Slice
    target: Slice
    mask: tuple[int, ...]

    def __str__(self) -> str:
        return f"{self.target} = Ext({self.src}, {_vec(self.mask)})"


@dataclass(frozen=True)
class EqSrk:
    """``target = join(src)`` (0 for an empty source)."""

    src: Slice
    target: Slice

    def __str__(self) -> str:
        return f"{self.target} = Srk({self.src})"


Atom = Union[Eq, EqConst, EqMeet, EqExt, EqSrk]


@dataclass(frozen=True)
class Disj:
    branches: tuple[tuple[Atom, ...], ...]
    receivers: tuple[Slice, ...] = ()

    def __str__(self) -> str:
        return " | ".join("{" + " & ".join(str(a) for a in b) + "}" for b in self.branches)


@dataclass(frozen=True)
class Assertion:
    body: Union[Atom, Disj]
    span: str
    rule: str
    block: int = -1
    fields: tuple[tuple[int, int], ...] = ()
    check: bool = False  # constrains existing versions only; defines nothing

    def __str__(self) -> str:
        where = f"bb{self.block}" if self.block >= 0 else "entry"
        kind = "check" if self.check else "def"
        return f"[{where} {self.rule} {kind}] {self.body}  @ {self.span}"


@dataclass(frozen=True)
class TaintRecord:
    span: str
    callee: str
    function: str
    kind: str = "source"


@dataclass
class ConstraintSystem:
    function: str
    variables: list[VarVersion] = field(default_factory=list)
    assertions: list[Assertion] = field(default_factory=list)
    taints: list[TaintRecord] = field(default_factory=list)
    findings: list[Finding] = field(default_factory=list)
    block_emissions: dict[int, int] = field(default_factory=dict)
    local_types: tuple[Type, ...] = ()

    def scalars(self) -> list[tuple[VarVersion, int]]:
        return [(v, i) for v in self.variables for i in range(v.width)]

    def subset(self, indices: Sequence[int]) -> "ConstraintSystem":
        return ConstraintSystem(self.function, list(self.variables), [self.assertions[i] for i in indices],
                                local_types=self.local_types)

    def dump(self) -> list[str]:
        return [f"{i:4d} {a}" for i, a in enumerate(self.assertions)]


# --------------------------------------------------------------------------
# Model semantics


Model = dict[VarVersion, tuple[int, ...]]


def _read(model: Model, s: Slice) -> tuple[int, ...]:
    vec = model[s.var]
    return tuple(vec[i] for i in s.bits)


def eval_atom(atom: Atom, model: Model) -> bool:
    if isinstance(atom, Eq):
        return _read(model, atom.lhs) == _read(model, atom.rhs)
    if isinstance(atom, EqConst):
        return _read(model, atom.lhs) == tuple(atom.value)
    if isinstance(atom, EqMeet):
        cols = [_read(model, o) for o in atom.operands]
        if atom.mask is not None:
            cols.append(tuple(atom.mask))
        expect = tuple(lattice.meet_all(col[i] for col in cols) for i in range(len(atom.lhs)))
        return _read(model, atom.lhs) == expect
    if isinstance(atom, EqExt):
        scalar = lattice.join_all(_read(model, atom.src))
        return _read(model, atom.target) == tuple(lattice.meet(scalar, m) for m in atom.mask)
    if isinstance(atom, EqSrk):
        return _read(model, atom.target) == (lattice.join_all(_read(model, atom.src)),)
    raise TypeError(atom)


def eval_assertion(assertion: Assertion, model: Model) -> bool:
    body = assertion.body
    if isinstance(body, Disj):
        return any(all(eval_atom(a, model) for a in branch) for branch in body.branches)
    return eval_atom(body, model)


def atoms_of(assertion: Assertion) -> list[Atom]:
    body = assertion.body
    if isinstance(body, Disj):
        return [a for branch in body.branches for a in branch]
    return [body]


def _defined_width(atom: Atom) -> int:
    return len(atom.target) if isinstance(atom, (EqExt, EqSrk)) else len(atom.lhs)


def slices_of(atom: Atom) -> list[Slice]:
    if isinstance(atom, Eq):
        return [atom.lhs, atom.rhs]
    if isinstance(atom, EqConst):
        return [atom.lhs]
    if isinstance(atom, EqMeet):
        return [atom.lhs, *atom.operands]
    if isinstance(atom, EqExt):
        return [atom.src, atom.target]
    return [atom.src, atom.target]


# --------------------------------------------------------------------------
# Call classification


def _is_object(ty: Type) -> bool:
    return not isinstance(ty, (PrimTy, *POINTER_TYPES))


def _heap_object(ty: Type, cache: AnalysisCache) -> bool:
    return _is_object(ty) and 1 in encode_type(ty, cache)


def _pointer_like(ty: Type, cache: AnalysisCache) -> bool:
    return isinstance(ty, (RefTy, PtrTy)) or is_manual_wrapper(ty, cache)


def classify_call(params: Sequence[Type], ret: Type, override: Optional[str], cache: AnalysisCache) -> str:
    """One of ``source``, ``sanitizer``, ``ordinary`` or ``free``."""
    if override is not None:
        return override
    if any(_heap_object(p, cache) for p in params) and (
        isinstance(ret, (RefTy, PtrTy)) or is_manual_wrapper(ret, cache)
    ):
        return "source"
    if (
        any(_pointer_like(p, cache) for p in params)
        and _heap_object(ret, cache)
        and not is_manual_wrapper(ret, cache)
    ):
        return "sanitizer"
    return "ordinary"


# --------------------------------------------------------------------------
# Generation


@dataclass(frozen=True)
class LocalState:
    version: VarVersion
    variant: Optional[int] = None


State = dict[int, LocalState]


@dataclass(frozen=True)
class _Slot:
    """A resolved place: a whole local or one field bit of it."""

    local: int
    bit: Optional[int]
    ty: Type

    def read(self, state: State) -> Slice:
        v = state[self.local].version
        return whole(v) if self.bit is None else bit(v, self.bit)


class UntrackedAccess(Exception):
    pass


class FunctionConstraintBuilder:
    """Applies the model's rules to one entry function."""

    def __init__(self, program: Program, fn: Function, cache: AnalysisCache):
        self.program = program
        self.fn = fn
        self.cache = cache
        self.sys = ConstraintSystem(fn.name, local_types=fn.locals)
        self.widths = [encoded_length(t, cache) for t in fn.locals]
        self.next_gen = [0] * len(fn.locals)
        self.block = -1
        self.span = ""

    # -- bookkeeping -------------------------------------------------------

    def fresh(self, local: int) -> VarVersion:
        v = VarVersion(local, self.next_gen[local], self.widths[local])
        self.next_gen[local] += 1
        self.sys.variables.append(v)
        return v

    def emit(self, body: Union[Atom, Disj], rule: str, fields: tuple[tuple[int, int], ...] = (),
             check: bool = False) -> None:
        atoms = [a for br in body.branches for a in br] if isinstance(body, Disj) else [body]
        if all(_defined_width(a) == 0 for a in atoms):
            return
        self.sys.assertions.append(Assertion(body, self.span, rule, self.block, fields, check))

    def untracked(self, message: str) -> None:
        self.sys.findings.append(Finding(f"untracked access: {message}", f"fn {self.fn.name} {self.span}", "untracked"))

    # -- places ------------------------------------------------------------

    def place_type(self, place: Place) -> Type:
        ty = self.fn.locals[place.local]
        for p in place.projection:
            if isinstance(p, DerefProj) and isinstance(ty, POINTER_TYPES):
                ty = pointee(ty)
        return ty

    def resolve(self, place: Place, state: State) -> _Slot:
        if not 0 <= place.local < len(self.fn.locals):
            raise UntrackedAccess(f"unknown local _{place.local}")
        ty = self.fn.locals[place.local]
        if len(place.projection) > 1:
            raise UntrackedAccess(f"{place}: projection depth exceeds one")
        if not place.projection:
            return _Slot(place.local, None, ty)
        proj = place.projection[0]
        if isinstance(proj, DerefProj):
            # pointers and pointees share one vector; deref is the whole local
            return _Slot(place.local, None, pointee(ty) if isinstance(ty, POINTER_TYPES) else ty)
        if not isinstance(proj, FieldProj):
            raise UntrackedAccess(f"{place}: index projection")
        f = proj.index
        if isinstance(ty, TupleTy):
            if f < len(ty.fields):
                return _Slot(place.local, f, ty.fields[f])
        elif isinstance(ty, AdtTy):
            decl = self.cache.decl(ty.name)
            if decl.kind == "enum":
                variant = state[place.local].variant
                if variant is None:
                    raise UntrackedAccess(f"{place}: enum field with unknown variant")
                fields = decl.variant_fields(ty.args, variant)
                if f < len(fields) and self.widths[place.local] == 1:
                    return _Slot(place.local, 0, fields[f])
            else:
                fields = decl.variant_fields(ty.args)
                if f < len(fields):
                    return _Slot(place.local, f, fields[f])
        raise UntrackedAccess(f"{place}: no field {f} in {ty}")

    # -- helpers shared by the rules ----------------------------------------

    def _mask_for(self, slot: _Slot) -> tuple[int, ...]:
        width = self.widths[slot.local] if slot.bit is None else 1
        if slot.bit is not None:
            return (1,)
        mask = holder_mask(slot.ty, self.cache)
        return mask if len(mask) == width else (1,) * width

    def _value(self, src: Slice, dst: Slice, dst_mask: tuple[int, ...], read_field: bool) -> Optional[Atom]:
        """Atom defining ``dst`` from ``src``, reconciling widths with Ext/Srk."""
        if len(dst) == 0:
            return None
        if read_field or (len(src) != len(dst) and len(dst) > 1):
            return EqExt(src, dst, dst_mask)
        if len(src) == len(dst):
            return Eq(dst, src)
        return EqSrk(src, dst)

    def _frame(self, old: VarVersion, new: VarVersion, changed: set[int]) -> None:
        keep = tuple(i for i in range(old.width) if i not in changed)
        if keep:
            self.emit(Eq(Slice(new, keep), Slice(old, keep)), "FRAME")

    def _update(self, state: State, slot: _Slot) -> tuple[Slice, Slice]:
        """Fresh version for ``slot``'s local; returns (old slot, new slot)."""
        old = state[slot.local].version
        new = self.fresh(slot.local)
        if slot.bit is not None:
            self._frame(old, new, {slot.bit})
        state[slot.local] = LocalState(new, state[slot.local].variant)
        if slot.bit is None:
            return whole(old), whole(new)
        return bit(old, slot.bit), bit(new, slot.bit)

    @staticmethod
    def _field_tags(*slots: _Slot) -> tuple[tuple[int, int], ...]:
        return tuple((s.local, s.bit) for s in slots if s.bit is not None)

    # -- assignment family --------------------------------------------------

    def apply_assignment(self, state: State, dest: Place, op: Operand, rule_hint: str = "") -> None:
        try:
            dst = self.resolve(dest, state)
            if isinstance(op, Const):
                self._assign_const(state, dst)
                return
            src = self.resolve(op.place, state)
        except UntrackedAccess as exc:
            self.untracked(str(exc))
            return
        self._transfer(state, src, dst, copy=isinstance(op, Copy), rule_hint=rule_hint)

    def _assign_const(self, state: State, dst: _Slot) -> None:
        tags = self._field_tags(dst)
        rule = "ASGNC-CONST"
        self.emit(EqConst(dst.read(state), (0,) * len(dst.read(state))), rule, tags, check=True)
        _, new = self._update(state, dst)
        self.emit(EqConst(new, (0,) * len(new)), rule, tags)

    def _rule_name(self, src: _Slot, dst: _Slot, copy: bool) -> str:
        base = "ASGNC" if copy else "ASGNM"
        if src.bit is not None and dst.bit is not None:
            return f"{base}-FTOF"
        if src.bit is not None:
            return f"{base}-READF"
        if dst.bit is not None:
            return f"{base}-WRITEF"
        return base

    def _transfer(self, state: State, src: _Slot, dst: _Slot, copy: bool, rule_hint: str = "") -> None:
        rule = rule_hint or self._rule_name(src, dst, copy)
        tags = self._field_tags(src, dst)
        if src.local == dst.local:
            self._transfer_same_local(state, src, dst, copy, rule, tags)
            return
        old_src = src.read(state)
        old_dst = dst.read(state)
        if len(old_dst) == 0 and len(old_src) > 0:
            self.untracked(f"value of width {len(old_src)} stored into a zero-width place")
            return
        self.emit(EqConst(old_dst, (0,) * len(old_dst)), rule, tags, check=True)
        _, new_src = self._update(state, src)
        _, new_dst = self._update(state, dst)
        value = self._value(old_src, new_dst, self._mask_for(dst), read_field=src.bit is not None and dst.bit is None)
        zero_src = EqConst(new_src, (0,) * len(new_src))
        if not copy:
            self.emit(zero_src, rule, tags)
            if value is not None:
                self.emit(value, rule, tags)
            return
        keep = (Eq(new_src, old_src), EqConst(new_dst, (0,) * len(new_dst)))
        take = ((value,) if value is not None else ()) + (zero_src,)
        self.emit(Disj((keep, take), (new_src, new_dst)), rule, tags)

    def _transfer_same_local(self, state, src: _Slot, dst: _Slot, copy: bool, rule: str, tags) -> None:
        if src.bit is None and dst.bit is None or src.bit == dst.bit:
            return
        if src.bit is None or dst.bit is None:
            self.untracked("assignment between a local and its own field")
            return
        old = state[src.local].version
        self.emit(EqConst(bit(old, dst.bit), (0,)), rule, tags, check=True)
        new = self.fresh(src.local)
        self._frame(old, new, {src.bit, dst.bit})
        state[src.local] = LocalState(new, state[src.local].variant)
        if not copy:
            self.emit(EqConst(bit(new, src.bit), (0,)), rule, tags)
            self.emit(Eq(bit(new, dst.bit), bit(old, src.bit)), rule, tags)
        else:
            keep = (Eq(bit(new, src.bit), bit(old, src.bit)), EqConst(bit(new, dst.bit), (0,)))
            take = (Eq(bit(new, dst.bit), bit(old, src.bit)), EqConst(bit(new, src.bit), (0,)))
            self.emit(Disj((keep, take), (bit(new, src.bit), bit(new, dst.bit))), rule, tags)

    # -- statements ---------------------------------------------------------

    def apply_statement(self, state: State, s: Statement) -> None:
        self.span = s.span
        if isinstance(s, Assign):
            self.apply_assignment(state, s.dest, s.op)
        elif isinstance(s, (Reference, AddressOf)):
            self.apply_assignment(state, s.dest, Copy(s.src), "REF" if isinstance(s, Reference) else "ADDR")
        elif isinstance(s, Cast):
            self.apply_assignment(state, s.dest, Move(s.src), "CAST")
        elif isinstance(s, Discriminant):
            if s.dest.projection or not 0 <= s.dest.local < len(self.fn.locals):
                self.untracked(f"discriminant of {s.dest}")
                return
            st = state[s.dest.local]
            state[s.dest.local] = LocalState(st.version, s.variant)
        elif isinstance(s, StorageDead):
            if 0 <= s.local < len(self.fn.locals):
                v = state[s.local].version
                self.emit(EqConst(whole(v), (0,) * v.width), "STORAGE-DEAD", check=True)
        # StorageLive carries no constraint

    # -- drops and calls ----------------------------------------------------

    def apply_drop(self, state: State, place: Place) -> None:
        try:
            slot = self.resolve(place, state)
        except UntrackedAccess as exc:
            self.untracked(str(exc))
            return
        try:
            if slot.bit is None:
                mask = destructor_rtoken(slot.ty, self.cache, variant_hint=state[slot.local].variant
                                         if slot.ty == self.fn.locals[slot.local] else None)
            else:
                freed = field_bit(slot.ty, self.cache) == 1 and not is_manual_wrapper(slot.ty, self.cache)
                mask = (0,) if freed else (1,)
        except EncodingError as exc:
            self.untracked(str(exc))
            return
        old, new = self._update(state, slot)
        if len(mask) != len(old):
            mask = (1,) * len(old)
        self.emit(EqMeet(new, (old,), mask), "DROP", self._field_tags(slot))

    def _consume(self, state: State, slot: _Slot) -> None:
        """Ordinary callee takes ownership: run its destructor, then nothing may remain."""
        if slot.bit is None:
            mask = destructor_rtoken(slot.ty, self.cache)
        else:
            freed = field_bit(slot.ty, self.cache) == 1 and not is_manual_wrapper(slot.ty, self.cache)
            mask = (0,) if freed else (1,)
        old, new = self._update(state, slot)
        if len(mask) != len(old):
            mask = (1,) * len(old)
        tags = self._field_tags(slot)
        self.emit(EqMeet(new, (old,), mask), "CALL-CONSUME", tags)
        self.emit(EqConst(new, (0,) * len(new)), "CALL-CONSUME", tags, check=True)

    def apply_call(self, state: State, call: Call) -> None:
        self.span = call.span
        sig = self.program.signature(call.callee)
        if sig is None:
            self.untracked(f"unresolved callee {call.callee!r}")
            return
        params, ret, override = sig
        if len(params) != len(call.args):
            self.untracked(f"arity mismatch calling {call.callee}")
            return
        try:
            kind = classify_call(params, ret, override, self.cache)
            arg_slots: list[Optional[_Slot]] = [
                None if isinstance(a, Const) else self.resolve(a.place, state) for a in call.args
            ]
            dst = self.resolve(call.dest, state)
        except (UntrackedAccess, EncodingError) as exc:
            self.untracked(str(exc))
            return

        picked: Optional[int] = None
        if kind == "source":
            picked = next((i for i, p in enumerate(params) if arg_slots[i] is not None
                           and _heap_object(p, self.cache)), None)
        elif kind == "sanitizer":
            picked = next((i for i, p in enumerate(params) if arg_slots[i] is not None
                           and _pointer_like(p, self.cache)), None)
        elif kind == "free":
            picked = next((i for i in range(len(params)) if arg_slots[i] is not None), None)

        # arguments not involved in the transfer follow ordinary semantics
        for i, (arg, slot) in enumerate(zip(call.args, arg_slots)):
            if i == picked or slot is None or not isinstance(arg, Move) or not _is_object(slot.ty):
                continue
            if slot.local == dst.local:
                continue
            self._consume(state, slot)

        if kind == "free":
            if picked is not None:
                slot = arg_slots[picked]
                _, new = self._update(state, slot)
                self.emit(EqConst(new, (0,) * len(new)), "CALL-FREE", self._field_tags(slot))
            self._call_result(state, dst, None, ret)
            return
        if kind in ("source", "sanitizer") and picked is not None:
            src = arg_slots[picked]
            old_src = src.read(state)
            tags = self._field_tags(src, dst)
            rule = "CALL-SOURCE" if kind == "source" else "CALL-SANITIZER"
            old_dst = dst.read(state)
            self.emit(EqConst(old_dst, (0,) * len(old_dst)), rule, tags, check=True)
            _, new_src = self._update(state, src)
            _, new_dst = self._update(state, dst)
            if kind == "source":
                value = self._value(old_src, new_dst, self._mask_for(dst), read_field=False)
            else:
                ctor = encode_type(ret, self.cache) if dst.bit is None else (1,)
                if len(ctor) != len(new_dst):
                    ctor = self._mask_for(dst)
                value = (EqMeet(new_dst, (old_src,), ctor) if len(old_src) == len(new_dst)
                         else EqExt(old_src, new_dst, ctor)) if len(new_dst) else None
            self.emit(EqConst(new_src, (0,) * len(new_src)), rule, tags)
            if value is not None:
                self.emit(value, rule, tags)
            if kind == "source":
                self.sys.taints.append(TaintRecord(call.span, call.callee, self.fn.name))
            return
        if kind == "source":
            self.sys.taints.append(TaintRecord(call.span, call.callee, self.fn.name))
        ctor = encode_type(ret, self.cache) if kind == "ordinary" else None
        self._call_result(state, dst, ctor, ret)

    def _call_result(self, state: State, dst: _Slot, ctor: Optional[tuple[int, ...]], ret: Type) -> None:
        """Function constructor: the destination receives the return type's encoding."""
        old = dst.read(state)
        tags = self._field_tags(dst)
        self.emit(EqConst(old, (0,) * len(old)), "CALL-RESULT", tags, check=True)
        _, new = self._update(state, dst)
        width = len(new)
        value = tuple(ctor) if ctor is not None else (0,) * width
        if len(value) != width:
            # reconcile a return encoding with a differently sized destination
            scalar = lattice.join_all(value)
            if width == 1:
                value = (scalar,)
            else:
                mask = self._mask_for(dst)
                value = tuple(lattice.meet(scalar, m) for m in mask)
        self.emit(EqConst(new, value), "CALL-RESULT", tags)

    # -- returns and merges -------------------------------------------------

    def apply_return(self, state: State) -> None:
        for local in sorted(state):
            if local == 0 and not self.fn.is_extern:
                continue
            v = state[local].version
            if v.width:
                self.emit(EqConst(whole(v), (0,) * v.width), "RETURN", check=True)

    def merge_states(self, preds: list[State]) -> State:
        merged: State = {}
        for local in sorted(preds[0]):
            versions: list[VarVersion] = []
            for p in preds:
                if p[local].version not in versions:
                    versions.append(p[local].version)
            variants = {p[local].variant for p in preds}
            new = self.fresh(local)
            self.emit(EqMeet(whole(new), tuple(whole(v) for v in versions)), "MERGE")
            merged[local] = LocalState(new, variants.pop() if len(variants) == 1 else None)
        return merged

    # -- driver -------------------------------------------------------------

    def init_entry_state(self) -> State:
        state: State = {}
        self.span = f"{self.fn.name}:entry"
        for local, ty in enumerate(self.fn.locals):
            v = self.fresh(local)
            if 1 <= local <= self.fn.param_count:
                value = encode_type(ty, self.cache)
                rule = "ENTRY-PARAM"
            else:
                value = (0,) * v.width
                rule = "ENTRY-LOCAL"
            if len(value) != v.width:
                value = (0,) * v.width
            self.emit(EqConst(whole(v), value), rule)
            state[local] = LocalState(v)
        return state

    def build(self, plan: Optional[TraversalPlan] = None) -> ConstraintSystem:
        plan = plan or build_traversal_plan(self.fn)
        self.sys.findings.extend(plan.findings)
        exit_states: dict[int, State] = {}
        entry_state = self.init_entry_state()
        for b in plan.order:
            self.block = b
            block = self.fn.blocks[b]
            self.span = block.stmts[0].span if block.stmts else block.term.span
            incoming = [exit_states[p] for p in plan.predecessors[b] if p in exit_states]
            if b == 0:
                incoming.insert(0, entry_state)
            if not incoming:
                continue
            if b in plan.merge_blocks:
                state = self.merge_states(incoming)
            else:
                state = dict(incoming[0])
            for s in block.stmts:
                self.apply_statement(state, s)
            term = block.term
            self.span = term.span
            if isinstance(term, Drop):
                self.apply_drop(state, term.place)
            elif isinstance(term, Call):
                self.apply_call(state, term)
            elif isinstance(term, Return):
                self.apply_return(state)
            exit_states[b] = state
            self.sys.block_emissions[b] = self.sys.block_emissions.get(b, 0) + 1
        return self.sys


def init_entry_state(program: Program, fn: Function, cache: AnalysisCache) -> tuple[State, ConstraintSystem]:
    builder = FunctionConstraintBuilder(program, fn, cache)
    state = builder.init_entry_state()
    return state, builder.sys


def build_function_constraints(program: Program, fn: Function, cache: AnalysisCache,
                               plan: Optional[TraversalPlan] = None) -> ConstraintSystem:
    return FunctionConstraintBuilder(program, fn, cache).build(plan)
