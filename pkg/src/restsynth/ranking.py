"""Cost of candidates from repeated retrospective runs, and the ranked list."""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field

from .core.library import SemanticLibrary
from .core.syntax import render_program
from .core.terms import Program, size
from .core.types import ArrayT, Query, Type
from .ingest import WitnessStore
from .retro import ExecResult, execute

DEFAULT_ROUNDS = 15


@dataclass(frozen=True)
class Weights:
    failure: int = 1000  # every run failed
    empty: int = 100  # every successful run returned an empty array
    multiplicity: int = 10  # result cardinality disagrees with the query


def penalties(results: list[ExecResult], out: Type, weights: Weights = Weights()) -> dict[str, int]:
    """The penalty clauses that fire, keyed by name."""
    fired: dict[str, int] = {}
    values = [r.value for r in results if r.ok]
    if not values:
        fired["failure"] = weights.failure
        return fired
    lists = [v for v in values if isinstance(v, list)]
    if len(lists) == len(values) and all(len(v) == 0 for v in lists):
        fired["empty"] = weights.empty
    if isinstance(out, ArrayT):
        mismatch = len(lists) == len(values) and all(len(v) == 1 for v in lists)
    else:
        mismatch = any(len(v) > 1 for v in lists)
    if mismatch:
        fired["multiplicity"] = weights.multiplicity
    return fired


def cost(prog: Program, results: list[ExecResult], out: Type, weights: Weights = Weights()) -> int:
    if not results:
        raise ValueError("cost needs at least one run")
    return size(prog) + sum(penalties(results, out, weights).values())


@dataclass
class RankedCandidate:
    program: Program
    original_rank: int
    results: list[ExecResult]
    cost: int

    @property
    def key(self) -> tuple[int, int]:
        return (self.cost, self.original_rank)


@dataclass
class Ranker:
    """Scores candidates as they arrive and keeps them ordered by cost,
    then by arrival."""

    sem: SemanticLibrary
    store: WitnessStore
    query: Query
    rounds: int = DEFAULT_ROUNDS
    seed: int = 0
    weights: Weights = Weights()
    ranked: list[RankedCandidate] = field(default_factory=list)
    arrivals: int = 0

    def __post_init__(self) -> None:
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")

    def evaluate(self, prog: Program, original_rank: int) -> list[ExecResult]:
        return [execute(prog, self.sem, self.store, (self.seed, original_rank, r), self.query) for r in range(self.rounds)]

    def add(self, prog: Program) -> RankedCandidate:
        n = self.arrivals
        self.arrivals += 1
        results = self.evaluate(prog, n)
        c = RankedCandidate(prog, n, results, cost(prog, results, self.query.out, self.weights))
        keys = [x.key for x in self.ranked]
        self.ranked.insert(bisect.bisect_right(keys, c.key), c)
        return c

    def position(self, original_rank: int) -> int | None:
        """Current 1-based rank of a candidate."""
        for i, c in enumerate(self.ranked):
            if c.original_rank == original_rank:
                return i + 1
        return None

    def snapshot(self) -> list[RankedCandidate]:
        return list(self.ranked)


def render_ranked(cands: list[RankedCandidate], ranked: bool = True) -> str:
    blocks = []
    for i, c in enumerate(cands):
        head = f"#{i + 1} cost={c.cost} original={c.original_rank}" if ranked else f"#{i + 1} original={c.original_rank}"
        blocks.append(head + "\n" + render_program(c.program))
    return "\n\n".join(blocks) + ("\n" if blocks else "")
