"""Retrospective execution: evaluate a candidate against recorded witnesses
instead of the live service, sampling unused inputs lazily."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core.library import SemanticLibrary, Value, value_key
from .core.terms import Bind, Call, Expr, Guard, Let, Program, Proj, Return, Var
from .core.types import Query, Type
from .ingest import WitnessStore

NO_WITNESS = "no-witness"
UNBOUND = "unbound"
BAD_PROJECTION = "bad-projection"


@dataclass(frozen=True)
class ExecResult:
    """A value, or a failure reason. ``inputs`` records the values the
    run chose for the program parameters."""

    value: Value | None = None
    failure: str | None = None
    inputs: tuple[tuple[str, str], ...] = ()

    @property
    def ok(self) -> bool:
        return self.failure is None

    @staticmethod
    def success(v: Value, inputs=()) -> ExecResult:
        return ExecResult(value=v, inputs=tuple(inputs))

    @staticmethod
    def fail(reason: str, inputs=()) -> ExecResult:
        return ExecResult(failure=reason, inputs=tuple(inputs))

    def __str__(self) -> str:
        return f"FAILURE({self.failure})" if self.failure else f"VALUE({value_key(self.value)})"


class _Failure(Exception):
    def __init__(self, reason: str):
        super().__init__(reason)
        self.reason = reason


def make_rng(seed: int | Sequence[int]) -> np.random.Generator:
    entropy = [int(s) for s in seed] if isinstance(seed, (list, tuple)) else int(seed)
    return np.random.default_rng(np.random.SeedSequence(entropy))


@dataclass
class _Run:
    sem: SemanticLibrary
    store: WitnessStore
    arg_types: dict[str, Type]
    rng: np.random.Generator
    # program inputs bound so far; they stay fixed for the whole run
    inputs: dict[str, Value] = field(default_factory=dict)

    def pick(self, seq: list):
        return seq[int(self.rng.integers(len(seq)))]

    def unbound(self, e: Expr, env: dict[str, Value]) -> str | None:
        if isinstance(e, Var) and e.name not in env and e.name in self.arg_types and e.name not in self.inputs:
            return e.name
        return None

    def sample(self, x: str) -> Value:
        pool = self.sem.bank_values(self.arg_types[x])
        if not pool:
            raise _Failure(UNBOUND)
        v = self.pick(pool)
        self.inputs[x] = v
        return v

    def eval(self, e: Expr, env: dict[str, Value]) -> Value:
        if isinstance(e, Var):
            if e.name in env:
                return env[e.name]
            if e.name in self.inputs:
                return self.inputs[e.name]
            if e.name in self.arg_types:
                return self.sample(e.name)
            raise _Failure(UNBOUND)
        if isinstance(e, Proj):
            v = self.eval(e.expr, env)
            if not isinstance(v, dict) or e.label not in v:
                raise _Failure(BAD_PROJECTION)
            return v[e.label]
        if isinstance(e, Call):
            inp = {lb: self.eval(a, env) for lb, a in e.args}
            pool = self.store.exact(e.method, inp) or self.store.same_labels(e.method, inp)
            if not pool:
                raise _Failure(NO_WITNESS)
            return self.pick(pool).out
        if isinstance(e, Return):
            return [self.eval(e.expr, env)]
        if isinstance(e, Let):
            v = self.eval(e.value, env)
            return self.eval(e.body, {**env, e.var: v})
        if isinstance(e, Bind):
            arr = self.eval(e.source, env)
            if not isinstance(arr, list):
                raise _Failure(BAD_PROJECTION)
            order = list(range(len(arr)))
            if any(x not in self.inputs for x in self.arg_types):
                # visit elements in a seeded order so that lazily bound
                # inputs can pick any element; results keep array order
                order = [int(i) for i in self.rng.permutation(len(arr))]
            parts: dict[int, list] = {}
            for i in order:
                r = self.eval(e.body, {**env, e.var: arr[i]})
                if not isinstance(r, list):
                    raise _Failure(BAD_PROJECTION)
                parts[i] = r
            return [v for i in range(len(arr)) for v in parts[i]]
        if isinstance(e, Guard):
            lx, rx = self.unbound(e.left, env), self.unbound(e.right, env)
            if lx and rx:
                v = self.sample(lx)
                if rx != lx:
                    self.inputs[rx] = v
            elif lx:
                self.inputs[lx] = self.eval(e.right, env)
            elif rx:
                self.inputs[rx] = self.eval(e.left, env)
            a, b = self.eval(e.left, env), self.eval(e.right, env)
            if value_key(a) != value_key(b):
                return []
            return self.eval(e.body, env)
        raise TypeError(f"not an expression: {e!r}")


def execute(
    prog: Program,
    sem: SemanticLibrary,
    store: WitnessStore,
    seed: int | Sequence[int],
    query: Query | dict[str, Type],
) -> ExecResult:
    """One nondeterministic run; the seed fixes every choice."""
    arg_types = dict(query.args) if isinstance(query, Query) else dict(query)
    run = _Run(sem, store, arg_types, make_rng(seed))
    try:
        v = run.eval(prog.body, {})
    except _Failure as f:
        return ExecResult.fail(f.reason, _inputs(run))
    return ExecResult.success(v, _inputs(run))


def _inputs(run: _Run) -> tuple[tuple[str, str], ...]:
    return tuple(sorted((k, value_key(v)) for k, v in run.inputs.items()))
