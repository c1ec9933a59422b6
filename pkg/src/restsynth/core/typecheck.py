"""Semantic typing judgment for programs."""

from __future__ import annotations

from dataclasses import dataclass, field

from .library import SemanticLibrary
from .terms import Bind, Call, Expr, Guard, Let, Program, Proj, Return, Var, check_well_formed
from .types import ArrayT, LocSet, ObjRef, Query, RecordT, Type


class IllTyped(Exception):
    pass


def types_equal(a: Type, b: Type, lib: SemanticLibrary) -> bool:
    if a == b:
        return True
    # an object name is interchangeable with its definition
    if isinstance(a, ObjRef) and isinstance(b, RecordT):
        return lib.unfold(a) == b or _records_equal(lib.unfold(a), b, lib)
    if isinstance(b, ObjRef) and isinstance(a, RecordT):
        return types_equal(b, a, lib)
    if isinstance(a, ArrayT) and isinstance(b, ArrayT):
        return types_equal(a.elem, b.elem, lib)
    if isinstance(a, RecordT) and isinstance(b, RecordT):
        return _records_equal(a, b, lib)
    return False


def _records_equal(a: Type, b: Type, lib: SemanticLibrary) -> bool:
    if not (isinstance(a, RecordT) and isinstance(b, RecordT)):
        return False
    if [(f.label, f.optional) for f in a.fields] != [(f.label, f.optional) for f in b.fields]:
        return False
    return all(types_equal(x.type, y.type, lib) for x, y in zip(a.fields, b.fields))


def field_type(t: Type, label: str, lib: SemanticLibrary) -> Type:
    rec = lib.unfold(t)
    if not isinstance(rec, RecordT):
        raise IllTyped(f"cannot project .{label} from {t}")
    f = rec.get(label)
    if f is None:
        raise IllTyped(f"{t} has no field {label!r}")
    return f.type


@dataclass
class TypeCheckResult:
    ok: bool
    bindings: dict[str, Type] = field(default_factory=dict)
    reason: str = ""

    def __bool__(self) -> bool:
        return self.ok


def type_of(e: Expr, env: dict[str, Type], lib: SemanticLibrary, out: dict[str, Type]) -> Type:
    if isinstance(e, Var):
        if e.name not in env:
            raise IllTyped(f"unbound {e.name}")
        return env[e.name]
    if isinstance(e, Proj):
        return field_type(type_of(e.expr, env, lib, out), e.label, lib)
    if isinstance(e, Return):
        return ArrayT(type_of(e.expr, env, lib, out))
    if isinstance(e, Call):
        sig = lib.methods.get(e.method)
        if sig is None:
            raise IllTyped(f"unknown method {e.method!r}")
        given = {lb: type_of(a, env, lib, out) for lb, a in e.args}
        for lb in given:
            if sig.inp.get(lb) is None:
                raise IllTyped(f"{e.method} has no argument {lb!r}")
        for f in sig.inp.fields:
            if f.label not in given:
                if not f.optional:
                    raise IllTyped(f"{e.method}: missing required argument {f.label!r}")
                continue
            if not types_equal(f.type, given[f.label], lib):
                raise IllTyped(f"{e.method}.{f.label}: expected {f.type}, got {given[f.label]}")
        return sig.out
    if isinstance(e, Guard):
        lt = type_of(e.left, env, lib, out)
        rt = type_of(e.right, env, lib, out)
        if not (isinstance(lt, LocSet) and lt == rt):
            raise IllTyped(f"guard compares {lt} with {rt}")
        bt = type_of(e.body, env, lib, out)
        if not isinstance(bt, ArrayT):
            raise IllTyped("guard body must be an array")
        return bt
    if isinstance(e, Let):
        vt = type_of(e.value, env, lib, out)
        out[e.var] = vt
        return type_of(e.body, {**env, e.var: vt}, lib, out)
    if isinstance(e, Bind):
        st = type_of(e.source, env, lib, out)
        if not isinstance(st, ArrayT):
            raise IllTyped(f"bind source of {e.var} is {st}, not an array")
        out[e.var] = st.elem
        bt = type_of(e.body, {**env, e.var: st.elem}, lib, out)
        if not isinstance(bt, ArrayT):
            raise IllTyped("bind body must be an array")
        return bt
    raise TypeError(e)


def typecheck(lib: SemanticLibrary, prog: Program, query: Query) -> TypeCheckResult:
    """Check ``prog`` against ``query``. Raises ``MalformedProgram`` for
    programs that are not well formed; ill-typed programs give a false
    result with a reason."""
    check_well_formed(prog)
    if list(prog.params) != query.labels:
        return TypeCheckResult(False, reason=f"parameters {prog.params} do not match {query.labels}")
    env = dict(query.args)
    bindings: dict[str, Type] = {}
    try:
        t = type_of(prog.body, env, lib, bindings)
    except IllTyped as exc:
        return TypeCheckResult(False, bindings, str(exc))
    if not types_equal(t, query.out, lib):
        return TypeCheckResult(False, bindings, f"body has type {t}, expected {query.out}")
    return TypeCheckResult(True, bindings)
