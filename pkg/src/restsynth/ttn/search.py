"""Enumeration of TTN paths by increasing length."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from ._kernels import Arrays, jit_enabled, make_search
from .net import COPY, TTN, Transition, Variant, variants


@dataclass(frozen=True)
class Path:
    transitions: tuple[Transition, ...]
    # per step: (place index, optional tokens consumed) for optional inputs
    consumed: tuple[tuple[tuple[int, int], ...], ...]
    variant_ids: tuple[int, ...] = field(compare=False, default=())

    def __len__(self) -> int:
        return len(self.transitions)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(t.name for t in self.transitions)

    def __str__(self) -> str:
        return ", ".join(self.names)


@dataclass
class SearchStats:
    nodes: int = 0
    lengths_done: int = 0
    timed_out: bool = False
    raw_solutions: int = 0


class PathSearch:
    """Compiled view of a net for repeated enumeration."""

    def __init__(self, net: TTN, copy_budget: int = 1, backend: str | None = None):
        self.net = net
        self.copy_budget = copy_budget
        self.backend = backend or ("numba" if jit_enabled() else "numpy")
        self.variants: list[Variant] = variants(net)
        copy_place = []
        for v in self.variants:
            tr = net.transitions[v.transition]
            copy_place.append(net.index[tr.place] if tr.kind == COPY else -1)
        self.arrays = Arrays.build(len(net.places), [v.entries for v in self.variants], copy_place)
        self.stats = SearchStats()

    def _path(self, vids: tuple[int, ...]) -> Path:
        vs = [self.variants[v] for v in vids]
        return Path(
            tuple(self.net.transitions[v.transition] for v in vs),
            tuple(v.consumed for v in vs),
            vids,
        )

    def solutions(self, init, final, length: int, deadline: float | None = None) -> list[tuple[int, ...]] | None:
        """All variant sequences of exactly ``length`` steps, or ``None``
        if the deadline passed first."""
        s = make_search(self.arrays, np.asarray(init), np.asarray(final), length, self.copy_budget, self.backend)
        sols: list[tuple[int, ...]] = []
        while not s.done:
            if deadline is not None and time.monotonic() > deadline:
                self.stats.nodes += s.nodes
                return None
            sols.extend(s.step())
        self.stats.nodes += s.nodes
        return sols

    def paths(self, init, final, max_len: int, deadline: float | None = None, min_len: int = 1) -> Iterator[Path]:
        """Paths of length ``min_len..max_len`` in deterministic order:
        by length, then transition ids, then consumption vectors. Each
        transition sequence is reported once."""
        if max_len < 1:
            raise ValueError("max_len must be at least 1")
        for length in range(min_len, max_len + 1):
            sols = self.solutions(init, final, length, deadline)
            if sols is None:
                self.stats.timed_out = True
                return
            self.stats.raw_solutions += len(sols)
            trans = [tuple(self.variants[v].transition for v in s) for s in sols]
            order = sorted(range(len(sols)), key=lambda i: (trans[i], sols[i]))
            seen: set[tuple[int, ...]] = set()
            for i in order:
                if trans[i] in seen:
                    continue
                seen.add(trans[i])
                yield self._path(sols[i])
            self.stats.lengths_done = length


def enumerate_paths(
    net: TTN,
    init,
    final,
    max_len: int,
    deadline: float | None = None,
    copy_budget: int = 1,
    backend: str | None = None,
) -> Iterator[Path]:
    return PathSearch(net, copy_budget, backend).paths(init, final, max_len, deadline)


def replay_exact(net: TTN, init, path: Path) -> bool:
    """Whether ``path`` fires under exact semantics: optional tokens can
    only be consumed when present."""
    req, opt, out = net.matrices()
    m = np.asarray(init, dtype=np.int64).copy()
    for tr, consumed in zip(path.transitions, path.consumed):
        t = net.tindex[tr.name]
        take = req[t].copy()
        for p, c in consumed:
            take[p] += c
        if np.any(m < take):
            return False
        m = m - take + out[t]
    return True


def final_marking(net: TTN, init, path: Path) -> np.ndarray:
    """Marking after ``path`` under the approximate semantics."""
    req, opt, out = net.matrices()
    m = np.asarray(init, dtype=np.int64).copy()
    for tr, consumed in zip(path.transitions, path.consumed):
        t = net.tindex[tr.name]
        take = req[t].copy()
        for p, c in consumed:
            take[p] += c
        m = m - take + out[t]
    return m
