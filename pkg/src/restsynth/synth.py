"""The synthesis pipeline: net, markings, paths, programs, lifting, the
typecheck gate and ranking."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator

from .core.library import SemanticLibrary
from .core.terms import Program, alpha_normalize
from .core.typecheck import typecheck
from .core.types import Query
from .ingest import WitnessStore
from .proggen import DEFAULT_MAX_COMBINATIONS, ConversionStats, compact, lift, path_to_programs, to_program
from .ranking import DEFAULT_ROUNDS, RankedCandidate, Ranker, Weights
from .ttn.net import build_ttn, place_tokens
from .ttn.search import PathSearch

DEFAULT_MAX_LEN = 8
DEFAULT_TIMEOUT = 150.0


@dataclass
class SynthStats:
    paths: int = 0
    anf: int = 0
    ill_typed: int = 0
    rejected: int = 0
    duplicates: int = 0
    emitted: int = 0
    timed_out: bool = False
    conversion: ConversionStats = field(default_factory=ConversionStats)


def synthesize(
    sem: SemanticLibrary,
    query: Query,
    max_len: int = DEFAULT_MAX_LEN,
    timeout: float | None = DEFAULT_TIMEOUT,
    max_combinations: int = DEFAULT_MAX_COMBINATIONS,
    copy_budget: int = 1,
    backend: str | None = None,
    stats: SynthStats | None = None,
) -> Iterator[Program]:
    """Well-typed candidates in generation order, each alpha-equivalence
    class once."""
    stats = stats if stats is not None else SynthStats()
    deadline = None if timeout is None else time.monotonic() + timeout
    net = build_ttn(sem)
    init, final = place_tokens(net, query)
    search = PathSearch(net, copy_budget, backend)
    goal = query.lifted()
    seen: set[Program] = set()
    for path in search.paths(init, final, max_len, deadline):
        stats.paths += 1
        for anf in path_to_programs(sem, path, query, net.places, max_combinations, stats.conversion):
            stats.anf += 1
            lifted = lift(sem, query, anf)
            if lifted is None:
                stats.ill_typed += 1
                continue
            prog = alpha_normalize(compact(to_program(lifted)))
            if not typecheck(sem, prog, goal):
                stats.rejected += 1
                continue
            if prog in seen:
                stats.duplicates += 1
                continue
            seen.add(prog)
            stats.emitted += 1
            yield prog
        if deadline is not None and time.monotonic() > deadline:
            break
    stats.timed_out = search.stats.timed_out or (deadline is not None and time.monotonic() > deadline)


def synthesize_ranked(
    sem: SemanticLibrary,
    store: WitnessStore,
    query: Query,
    rounds: int = DEFAULT_ROUNDS,
    seed: int = 0,
    weights: Weights = Weights(),
    **kw,
) -> tuple[list[RankedCandidate], Ranker]:
    ranker = Ranker(sem, store, query, rounds, seed, weights)
    for prog in synthesize(sem, query, **kw):
        ranker.add(prog)
    return ranker.snapshot(), ranker
