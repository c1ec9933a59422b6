"""From TTN paths to array-oblivious ANF programs, and lifting them into
well-typed comprehensions."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterator, Union

from .core.library import SemanticLibrary
from .core.terms import Bind, Call, Expr, Guard, Let, Program, Proj, Return, Var
from .core.typecheck import types_equal
from .core.types import ArrayT, Query, RecordT, Type, array_depth, downgrade
from .ttn.net import COPY, FILTER, METHOD, PROJ
from .ttn.search import Path

DEFAULT_MAX_COMBINATIONS = 64


# -- ANF -----------------------------------------------------------------------------


@dataclass(frozen=True)
class SCall:
    var: str
    method: str
    args: tuple[tuple[str, str], ...]


@dataclass(frozen=True)
class SProj:
    var: str
    src: str
    label: str


@dataclass(frozen=True)
class SGuard:
    left: str
    right: str


@dataclass(frozen=True)
class SBind:
    var: str
    src: str


@dataclass(frozen=True)
class SReturn:
    var: str
    src: str


Stmt = Union[SCall, SProj, SGuard, SBind, SReturn]


@dataclass(frozen=True)
class Anf:
    params: tuple[str, ...]
    stmts: tuple[Stmt, ...]
    result: str

    def render(self) -> str:
        lines = []
        for s in self.stmts:
            if isinstance(s, SCall):
                args = ", ".join(f"{lb}={v}" for lb, v in s.args)
                lines.append(f"let {s.var} = {s.method}({args})")
            elif isinstance(s, SProj):
                lines.append(f"let {s.var} = {s.src}.{s.label}")
            elif isinstance(s, SGuard):
                lines.append(f"if {s.left} == {s.right}")
            elif isinstance(s, SBind):
                lines.append(f"{s.var} <- {s.src}")
            else:
                lines.append(f"let {s.var} = return {s.src}")
        return "\\" + " ".join(self.params) + " ->\n" + "".join(f"  {ln};\n" for ln in lines) + f"  {self.result}"


def to_program(a: Anf) -> Program:
    """Fold the statements into nested bindings."""
    e: Expr = Var(a.result)
    for s in reversed(a.stmts):
        if isinstance(s, SCall):
            e = Let(s.var, Call(s.method, tuple((lb, Var(v)) for lb, v in s.args)), e)
        elif isinstance(s, SProj):
            e = Let(s.var, Proj(Var(s.src), s.label), e)
        elif isinstance(s, SGuard):
            e = Guard(Var(s.left), Var(s.right), e)
        elif isinstance(s, SBind):
            e = Bind(s.var, Var(s.src), e)
        else:
            e = Let(s.var, Return(Var(s.src)), e)
    return Program(a.params, e)


class _Fresh:
    def __init__(self, taken):
        self.taken = set(taken)
        self.n = 0

    def __call__(self) -> str:
        while f"x{self.n}" in self.taken:
            self.n += 1
        name = f"x{self.n}"
        self.taken.add(name)
        return name


# -- paths -> ANF --------------------------------------------------------------------


@dataclass
class ConversionStats:
    programs: int = 0
    dropped: int = 0


def _choose(pool: list[str], k: int) -> list[tuple[str, ...]]:
    """Ordered choices of ``k`` tokens from a multiset pool, distinct by
    variable names."""
    out = set()
    for idx in itertools.permutations(range(len(pool)), k):
        out.add(tuple(pool[i] for i in idx))
    return sorted(out)


def _remove(pool: list[str], names: tuple[str, ...]) -> list[str]:
    pool = list(pool)
    for n in names:
        pool.remove(n)
    return pool


def _next_name(n: int, taken) -> tuple[str, int]:
    while f"x{n}" in taken:
        n += 1
    return f"x{n}", n + 1


def path_to_programs(
    sem: SemanticLibrary,
    path: Path,
    query: Query,
    places: list[Type] | None = None,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
    stats: ConversionStats | None = None,
) -> list[Anf]:
    """Every array-oblivious program for ``path``: one per way of feeding
    same-typed variables to the transitions' inputs. ``places`` maps the
    place indices of optional consumption back to types."""
    stats = stats if stats is not None else ConversionStats()
    params = tuple(query.labels)
    init: dict[Type, list[str]] = {}
    for lb, t in query.args:
        init.setdefault(downgrade(t), []).append(lb)
    results: list[Anf] = []
    seen: set[Anf] = set()
    full = False

    def emit(a: Anf) -> None:
        nonlocal full
        if a in seen:
            return
        if len(results) >= max_combinations:
            stats.dropped += 1
            full = True
            return
        seen.add(a)
        results.append(a)

    def push(ps: dict[Type, list[str]], p: Type, *names: str) -> dict[Type, list[str]]:
        return {**ps, p: ps.get(p, []) + list(names)}

    def go(i: int, pools: dict[Type, list[str]], stmts: tuple[Stmt, ...], n: int, last: str | None) -> None:
        if full:
            return
        if i == len(path.transitions):
            if last is not None:
                emit(Anf(params, stmts, last))
            return
        tr = path.transitions[i]
        if tr.kind == METHOD:
            ft = sem.methods[tr.method]
            want = {places[p]: c for p, c in path.consumed[i]} if places is not None else {}
            needs_req: dict[Type, list[str]] = {}
            for f in ft.inp.required():
                needs_req.setdefault(downgrade(f.type), []).append(f.label)
            opt_by_place: dict[Type, list[str]] = {}
            for f in ft.inp.optional():
                opt_by_place.setdefault(downgrade(f.type), []).append(f.label)
            opt_places = sorted(opt_by_place, key=str)
            opt_choices = []
            for p in opt_places:
                # tokens the approximate semantics consumed but that do not
                # exist leave the argument out
                avail = len(pools.get(p, [])) - len(needs_req.get(p, []))
                k = max(0, min(want.get(p, 0), avail))
                opt_choices.append(list(itertools.combinations(opt_by_place[p], k)))
            x, n2 = _next_name(n, params)
            out_p = downgrade(ft.out)
            for chosen in itertools.product(*opt_choices):
                needs = {p: list(lbs) for p, lbs in needs_req.items()}
                for p, lbs in zip(opt_places, chosen):
                    needs.setdefault(p, []).extend(lbs)
                for args_map, rest in _assignments(needs, pools):
                    call = SCall(x, tr.method, tuple(sorted(args_map.items())))
                    go(i + 1, push(rest, out_p, x), stmts + (call,), n2, x)
        elif tr.kind == PROJ:
            x, n2 = _next_name(n, params)
            lb = tr.path[0]
            out_p = downgrade(_field_type(sem, tr.obj, lb))
            for (y,), rest in _take(pools, tr.obj, 1):
                go(i + 1, push(rest, out_p, x), stmts + (SProj(x, y, lb),), n2, x)
        elif tr.kind == FILTER:
            val_t = _filter_value_type(sem, tr.obj, tr.path)
            for (y,), rest in _take(pools, tr.obj, 1):
                for (v,), rest2 in _take(rest, val_t, 1):
                    new: list[Stmt] = []
                    cur, n2 = y, n
                    for lb in tr.path:
                        x, n2 = _next_name(n2, params)
                        new.append(SProj(x, cur, lb))
                        cur = x
                    new.append(SGuard(cur, v))
                    go(i + 1, push(rest2, tr.obj, y), stmts + tuple(new), n2, y)
        elif tr.kind == COPY:
            # duplicating a token shares the variable; no statement
            for (y,), rest in _take(pools, tr.place, 1):
                go(i + 1, push(rest, tr.place, y, y), stmts, n, y)
        else:
            raise ValueError(f"unknown transition kind {tr.kind}")

    go(0, init, (), 0, None)
    stats.programs += len(results)
    return results


def _take(pools: dict[Type, list[str]], p: Type, k: int):
    pool = pools.get(p, [])
    if len(pool) < k:
        return []
    return [(c, {**pools, p: _remove(pool, c)}) for c in _choose(pool, k)]


def _assignments(needs: dict[Type, list[str]], pools):
    """Ways to feed labelled arguments from the pools; yields
    (label -> variable, remaining pools)."""
    order = sorted(needs, key=str)

    def rec(j: int, ps: dict[Type, list[str]], acc: dict[str, str]):
        if j == len(order):
            yield dict(acc), ps
            return
        labels = needs[order[j]]
        for names, rest in _take(ps, order[j], len(labels)):
            yield from rec(j + 1, rest, {**acc, **dict(zip(labels, names))})

    yield from rec(0, pools, {})


def _field_type(sem: SemanticLibrary, obj: Type, label: str) -> Type:
    rec = sem.unfold(obj)
    assert isinstance(rec, RecordT)
    f = rec.get(label)
    assert f is not None
    return f.type


def _filter_value_type(sem: SemanticLibrary, obj: Type, path: tuple[str, ...]) -> Type:
    t = obj
    for lb in path:
        t = downgrade(_field_type(sem, t, lb))
    return t


# -- lifting -------------------------------------------------------------------------


class IllTypedLift(Exception):
    pass


ILL_TYPED = None


@dataclass
class _LiftState:
    sem: SemanticLibrary
    env: dict[str, Type]
    fresh: _Fresh
    mapping: dict[str, str] = field(default_factory=dict)
    out: list[Stmt] = field(default_factory=list)

    def var(self, x: str, target: Type) -> str:
        t = self.env[x]
        if types_equal(t, target, self.sem):
            return x
        if not types_equal(downgrade(t), downgrade(target), self.sem):
            raise IllTypedLift(f"{x}: {t} cannot become {target}")
        if array_depth(t) > array_depth(target):
            if x in self.mapping:
                return self.var(self.mapping[x], target)
            assert isinstance(t, ArrayT)
            x2 = self.fresh()
            self.env[x2] = t.elem
            self.mapping[x] = x2
            self.out.append(SBind(x2, x))
            return self.var(x2, target)
        x2 = self.fresh()
        self.env[x2] = ArrayT(t)
        self.out.append(SReturn(x2, x))
        return self.var(x2, target)

    def stmt(self, s: Stmt) -> None:
        sem = self.sem
        if isinstance(s, SCall):
            ft = sem.methods[s.method]
            args = []
            for lb, v in s.args:
                f = ft.inp.get(lb)
                if f is None:
                    raise IllTypedLift(f"{s.method} has no argument {lb}")
                args.append((lb, self.var(v, f.type)))
            self.out.append(SCall(s.var, s.method, tuple(args)))
            self.env[s.var] = ft.out
        elif isinstance(s, SProj):
            y = self.var(s.src, downgrade(self.env[s.src]))
            rec = sem.unfold(self.env[y])
            f = rec.get(s.label) if isinstance(rec, RecordT) else None
            if f is None:
                raise IllTypedLift(f"{y} has no field {s.label}")
            self.out.append(SProj(s.var, y, s.label))
            self.env[s.var] = f.type
        elif isinstance(s, SGuard):
            a = self.var(s.left, downgrade(self.env[s.left]))
            b = self.var(s.right, downgrade(self.env[s.right]))
            if not types_equal(self.env[a], self.env[b], sem):
                raise IllTypedLift(f"guard compares {self.env[a]} with {self.env[b]}")
            self.out.append(SGuard(a, b))
        elif isinstance(s, SBind):
            t = self.env[s.src]
            if not isinstance(t, ArrayT):
                raise IllTypedLift(f"{s.src} is not an array")
            self.out.append(s)
            self.env[s.var] = t.elem
            self.mapping.setdefault(s.src, s.var)
        else:
            self.out.append(s)
            self.env[s.var] = ArrayT(self.env[s.src])


def lift(sem: SemanticLibrary, query: Query, a: Anf) -> Anf | None:
    """Repair array mismatches with monadic binds and returns; ``None``
    when some mismatch is not about array nesting."""
    taken = set(a.params)
    for s in a.stmts:
        if hasattr(s, "var"):
            taken.add(s.var)
    st = _LiftState(sem, dict(query.args), _Fresh(taken))
    try:
        for s in a.stmts:
            st.stmt(s)
        res = st.var(a.result, query.lifted().out)
    except IllTypedLift:
        return ILL_TYPED
    return Anf(a.params, tuple(st.out), res)


# -- compaction ----------------------------------------------------------------------


def _shallow(e: Expr, x: str) -> int:
    """Occurrences of ``x`` that are evaluated once, i.e. not under the
    body of a bind or a guard."""
    if isinstance(e, Var):
        return int(e.name == x)
    if isinstance(e, Proj):
        return _shallow(e.expr, x)
    if isinstance(e, Call):
        return sum(_shallow(a, x) for _, a in e.args)
    if isinstance(e, Return):
        return _shallow(e.expr, x)
    if isinstance(e, Let):
        return _shallow(e.value, x) + _shallow(e.body, x)
    if isinstance(e, Bind):
        return _shallow(e.source, x)
    if isinstance(e, Guard):
        return _shallow(e.left, x) + _shallow(e.right, x)
    raise TypeError(e)


def _subst(e: Expr, x: str, by: Expr) -> Expr:
    if isinstance(e, Var):
        return by if e.name == x else e
    if isinstance(e, Proj):
        return Proj(_subst(e.expr, x, by), e.label)
    if isinstance(e, Call):
        return Call(e.method, tuple((lb, _subst(a, x, by)) for lb, a in e.args))
    if isinstance(e, Return):
        return Return(_subst(e.expr, x, by))
    if isinstance(e, Let):
        return Let(e.var, _subst(e.value, x, by), _subst(e.body, x, by))
    if isinstance(e, Bind):
        return Bind(e.var, _subst(e.source, x, by), _subst(e.body, x, by))
    if isinstance(e, Guard):
        return Guard(_subst(e.left, x, by), _subst(e.right, x, by), _subst(e.body, x, by))
    raise TypeError(e)


def _compact(e: Expr) -> Expr:
    from .core.terms import occurrences

    if isinstance(e, Let):
        value, body = _compact(e.value), _compact(e.body)
        n = occurrences(body, e.var)
        if isinstance(body, Bind) and body.source == Var(e.var) and n == 1:
            return Bind(body.var, value, body.body)
        if isinstance(value, Return) and body == Var(e.var):
            return value
        if isinstance(value, (Proj, Var)) and n == 1 and _shallow(body, e.var) == 1:
            return _compact(_subst(body, e.var, value))
        return Let(e.var, value, body)
    if isinstance(e, Bind):
        return Bind(e.var, _compact(e.source), _compact(e.body))
    if isinstance(e, Guard):
        return Guard(_compact(e.left), _compact(e.right), _compact(e.body))
    return e


def compact(prog: Program) -> Program:
    """Inline single-use projections and fuse call/bind and return/result
    pairs, until nothing changes."""
    body = prog.body
    while True:
        new = _compact(body)
        if new == body:
            return Program(prog.params, body)
        body = new


def candidates(sem: SemanticLibrary, path: Path, query: Query, places=None, **kw) -> Iterator[Program]:
    for a in path_to_programs(sem, path, query, places, **kw):
        lifted = lift(sem, query, a)
        if lifted is not None:
            yield compact(to_program(lifted))
