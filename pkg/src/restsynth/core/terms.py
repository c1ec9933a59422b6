"""Terms of the comprehension language."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Proj:
    expr: Expr
    label: str


@dataclass(frozen=True)
class Call:
    method: str
    args: tuple[tuple[str, Expr], ...] = ()


@dataclass(frozen=True)
class Let:
    var: str
    value: Expr
    body: Expr


@dataclass(frozen=True)
class Bind:
    var: str
    source: Expr
    body: Expr


@dataclass(frozen=True)
class Guard:
    left: Expr
    right: Expr
    body: Expr


@dataclass(frozen=True)
class Return:
    expr: Expr


Expr = Union[Var, Proj, Call, Let, Bind, Guard, Return]


@dataclass(frozen=True)
class Program:
    params: tuple[str, ...]
    body: Expr


class MalformedProgram(ValueError):
    """Unbound variable or duplicate binder."""


def children(e: Expr) -> Iterator[Expr]:
    if isinstance(e, Proj):
        yield e.expr
    elif isinstance(e, Call):
        for _, a in e.args:
            yield a
    elif isinstance(e, Let):
        yield e.value
        yield e.body
    elif isinstance(e, Bind):
        yield e.source
        yield e.body
    elif isinstance(e, Guard):
        yield e.left
        yield e.right
        yield e.body
    elif isinstance(e, Return):
        yield e.expr


def size(e: Expr | Program) -> int:
    """AST node count; each call-argument pair also counts one."""
    if isinstance(e, Program):
        return size(e.body)
    n = 1
    if isinstance(e, Call):
        n += len(e.args)
    return n + sum(size(c) for c in children(e))


def occurrences(e: Expr, name: str) -> int:
    if isinstance(e, Var):
        return int(e.name == name)
    if isinstance(e, (Let, Bind)) and e.var == name:
        # shadowing: only the right-hand side can see the outer name
        return occurrences(e.value if isinstance(e, Let) else e.source, name)
    return sum(occurrences(c, name) for c in children(e))


def binders(e: Expr) -> Iterator[str]:
    if isinstance(e, (Let, Bind)):
        yield e.var
    for c in children(e):
        yield from binders(c)


def check_well_formed(prog: Program) -> None:
    seen = set(prog.params)
    if len(seen) != len(prog.params):
        raise MalformedProgram(f"duplicate parameter in {prog.params}")

    def go(e: Expr, scope: frozenset[str]) -> None:
        if isinstance(e, Var):
            if e.name not in scope:
                raise MalformedProgram(f"unbound variable {e.name!r}")
            return
        if isinstance(e, (Let, Bind)):
            go(e.value if isinstance(e, Let) else e.source, scope)
            if e.var in seen:
                raise MalformedProgram(f"duplicate binder {e.var!r}")
            seen.add(e.var)
            go(e.body, scope | {e.var})
            return
        for c in children(e):
            go(c, scope)

    go(prog.body, frozenset(prog.params))


def rename(e: Expr, mapping: dict[str, str]) -> Expr:
    if isinstance(e, Var):
        return Var(mapping.get(e.name, e.name))
    if isinstance(e, Proj):
        return Proj(rename(e.expr, mapping), e.label)
    if isinstance(e, Call):
        return Call(e.method, tuple((lb, rename(a, mapping)) for lb, a in e.args))
    if isinstance(e, Let):
        return Let(mapping.get(e.var, e.var), rename(e.value, mapping), rename(e.body, mapping))
    if isinstance(e, Bind):
        return Bind(mapping.get(e.var, e.var), rename(e.source, mapping), rename(e.body, mapping))
    if isinstance(e, Guard):
        return Guard(rename(e.left, mapping), rename(e.right, mapping), rename(e.body, mapping))
    if isinstance(e, Return):
        return Return(rename(e.expr, mapping))
    raise TypeError(e)


def alpha_normalize(prog: Program) -> Program:
    """Rename binders to x0, x1, ... in traversal order; parameters keep
    their names. Structural equality of the result is alpha-equivalence."""
    params = set(prog.params)
    counter = 0

    def fresh() -> str:
        nonlocal counter
        while f"x{counter}" in params:
            counter += 1
        name = f"x{counter}"
        counter += 1
        return name

    def go(e: Expr, env: dict[str, str]) -> Expr:
        if isinstance(e, Var):
            return Var(env.get(e.name, e.name))
        if isinstance(e, Proj):
            return Proj(go(e.expr, env), e.label)
        if isinstance(e, Call):
            return Call(e.method, tuple((lb, go(a, env)) for lb, a in e.args))
        if isinstance(e, (Let, Bind)):
            rhs = go(e.value if isinstance(e, Let) else e.source, env)
            new = fresh()
            body = go(e.body, {**env, e.var: new})
            return Let(new, rhs, body) if isinstance(e, Let) else Bind(new, rhs, body)
        if isinstance(e, Guard):
            return Guard(go(e.left, env), go(e.right, env), go(e.body, env))
        if isinstance(e, Return):
            return Return(go(e.expr, env))
        raise TypeError(e)

    return Program(prog.params, go(prog.body, {}))


def alpha_equivalent(a: Program, b: Program) -> bool:
    return alpha_normalize(a) == alpha_normalize(b)
