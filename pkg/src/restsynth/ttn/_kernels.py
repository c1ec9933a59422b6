"""Depth-bounded path search kernels.

Two interchangeable backends enumerate every variant sequence of an exact
length that leads from an initial to a final marking:

* ``dfs_chunk``: an iterative DFS over plain arrays, compiled with numba
  when available. Its whole state lives in arrays, so it can stop after a
  node budget and resume later (the caller checks the deadline in between).
* ``NumpySearch``: a generator-based DFS that tests every variant at a node
  with vectorised numpy operations.

Both visit variants in index order, prune with the same admissible bound
and memoise dead states, so they report identical solution lists. Setting
``RESTSYNTH_DISABLE_JIT=1`` selects the numpy backend.
"""

from __future__ import annotations

import os
import types
from dataclasses import dataclass

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    _HAVE_NUMBA = False

FINISHED, PAUSED, BUFFER_FULL = 0, 1, 2
INF = 1 << 40
_MASK40 = (1 << 40) - 1


def jit_enabled() -> bool:
    return _HAVE_NUMBA and os.environ.get("RESTSYNTH_DISABLE_JIT", "") not in ("1", "true", "yes")


@dataclass
class Arrays:
    """Flattened variant table. Entries of variant ``v`` are
    ``ent_*[var_ptr[v]:var_ptr[v + 1]]``."""

    n_places: int
    var_ptr: np.ndarray
    ent_place: np.ndarray
    ent_req: np.ndarray
    ent_delta: np.ndarray
    var_copy: np.ndarray  # place index for copy variants, else -1
    max_dec: np.ndarray  # per place: largest single-step decrease
    max_inc: np.ndarray  # per place: largest single-step increase
    tot_dec: int
    tot_inc: int

    @classmethod
    def build(cls, n_places: int, entries: list, copy_place: list[int]) -> Arrays:
        ptr = np.zeros(len(entries) + 1, dtype=np.int64)
        flat = [e for es in entries for e in es]
        for v, es in enumerate(entries):
            ptr[v + 1] = ptr[v] + len(es)
        ent = np.array(flat, dtype=np.int64).reshape(-1, 3)
        max_dec = np.zeros(n_places, dtype=np.int64)
        max_inc = np.zeros(n_places, dtype=np.int64)
        tot_dec = tot_inc = 0
        for es in entries:
            s = 0
            for p, _r, d in es:
                s += d
                if d < 0:
                    max_dec[p] = max(max_dec[p], -d)
                elif d > 0:
                    max_inc[p] = max(max_inc[p], d)
            tot_dec = max(tot_dec, -s)
            tot_inc = max(tot_inc, s)
        return cls(
            n_places,
            ptr,
            np.ascontiguousarray(ent[:, 0]),
            np.ascontiguousarray(ent[:, 1]),
            np.ascontiguousarray(ent[:, 2]),
            np.array(copy_place, dtype=np.int64),
            max_dec,
            max_inc,
            tot_dec,
            tot_inc,
        )


# -- shared helpers (compiled when numba is present) --------------------------------


def _ceil_div(a, b):
    return -((-a) // b)


def _lower_bound(marking, final, max_dec, max_inc, tot_dec, tot_inc):
    """Admissible estimate of the steps still needed to reach ``final``."""
    best = 0
    total = 0
    for p in range(marking.shape[0]):
        diff = marking[p] - final[p]
        total += diff
        if diff > 0:
            if max_dec[p] == 0:
                return INF
            need = _ceil_div(diff, max_dec[p])
        elif diff < 0:
            if max_inc[p] == 0:
                return INF
            need = _ceil_div(-diff, max_inc[p])
        else:
            need = 0
        if need > best:
            best = need
    if total > 0:
        if tot_dec == 0:
            return INF
        need = _ceil_div(total, tot_dec)
        if need > best:
            best = need
    elif total < 0:
        if tot_inc == 0:
            return INF
        need = _ceil_div(-total, tot_inc)
        if need > best:
            best = need
    return best


def _memo_hash(marking, copies, remaining, mask):
    # 40-bit arithmetic keeps every product inside int64
    h = remaining & _MASK40
    for i in range(marking.shape[0]):
        h = ((h * 1000003) ^ (marking[i] & _MASK40)) & _MASK40
        h = ((h * 1000003) ^ (copies[i] & _MASK40)) & _MASK40
    return h & mask


def _memo_slot(memo_keys, memo_used, marking, copies, remaining):
    """Slot holding this state, or the free slot where it would go
    (returned as ``-slot - 1``); -(cap + 1) when the table is full."""
    cap = memo_used.shape[0]
    n = marking.shape[0]
    s = _memo_hash(marking, copies, remaining, cap - 1)
    for _ in range(cap):
        if memo_used[s] == 0:
            return -s - 1
        same = memo_keys[s, 2 * n] == remaining
        if same:
            for i in range(n):
                if memo_keys[s, i] != marking[i] or memo_keys[s, n + i] != copies[i]:
                    same = False
                    break
        if same:
            return s
        s = (s + 1) & (cap - 1)
    return -cap - 1


def _feasible(v, marking, copies, copy_budget, var_ptr, ent_place, ent_req, ent_delta, var_copy):
    c = var_copy[v]
    if c >= 0 and copies[c] >= copy_budget:
        return False
    for k in range(var_ptr[v], var_ptr[v + 1]):
        p = ent_place[k]
        if marking[p] < ent_req[k] or marking[p] + ent_delta[k] < 0:
            return False
    return True


def _apply(v, sign, marking, copies, var_ptr, ent_place, ent_delta, var_copy):
    for k in range(var_ptr[v], var_ptr[v + 1]):
        marking[ent_place[k]] += sign * ent_delta[k]
    c = var_copy[v]
    if c >= 0:
        copies[c] += sign


def _dfs_chunk(
    var_ptr, ent_place, ent_req, ent_delta, var_copy, max_dec, max_inc, tot_dec, tot_inc,
    final, length, copy_budget,
    marking, copies, depth_box, choice, applied, sol_at_entry, counters,
    memo_keys, memo_used, out, max_nodes,
):  # fmt: skip
    """Resume the DFS described by the state arrays. ``counters`` holds
    [solutions found, nodes expanded, memo entries, solutions in ``out``]."""
    n_var = var_ptr.shape[0] - 1
    cap = memo_used.shape[0]
    n = marking.shape[0]
    d = depth_box[0]
    budget_end = counters[1] + max_nodes
    while True:
        if d == length:
            if choice[d] == -1:
                counters[1] += 1
                choice[d] = 0
                same = True
                for p in range(n):
                    if marking[p] != final[p]:
                        same = False
                        break
                if same:
                    if counters[3] >= out.shape[0]:
                        choice[d] = -1
                        counters[1] -= 1
                        depth_box[0] = d
                        return BUFFER_FULL
                    for i in range(length):
                        out[counters[3], i] = applied[i]
                    counters[3] += 1
                    counters[0] += 1
            choice[d] = -1
            if d == 0:
                depth_box[0] = 0
                return FINISHED
            d -= 1
            _apply(applied[d], -1, marking, copies, var_ptr, ent_place, ent_delta, var_copy)
            continue
        if choice[d] == -1:
            if counters[1] >= budget_end:
                depth_box[0] = d
                return PAUSED
            counters[1] += 1
            dead = _lower_bound(marking, final, max_dec, max_inc, tot_dec, tot_inc) > length - d
            if not dead:
                dead = _memo_slot(memo_keys, memo_used, marking, copies, length - d) >= 0
            if dead:
                if d == 0:
                    depth_box[0] = 0
                    return FINISHED
                d -= 1
                _apply(applied[d], -1, marking, copies, var_ptr, ent_place, ent_delta, var_copy)
                continue
            sol_at_entry[d] = counters[0]
            choice[d] = 0
        v = choice[d]
        while v < n_var and not _feasible(
            v, marking, copies, copy_budget, var_ptr, ent_place, ent_req, ent_delta, var_copy
        ):
            v += 1
        if v < n_var:
            choice[d] = v + 1
            applied[d] = v
            _apply(v, 1, marking, copies, var_ptr, ent_place, ent_delta, var_copy)
            d += 1
            choice[d] = -1
            continue
        # subtree exhausted
        if counters[0] == sol_at_entry[d] and counters[2] * 10 < cap * 7:
            s = _memo_slot(memo_keys, memo_used, marking, copies, length - d)
            if s < 0 and s != -cap - 1:
                s = -s - 1
                memo_used[s] = 1
                for i in range(n):
                    memo_keys[s, i] = marking[i]
                    memo_keys[s, n + i] = copies[i]
                memo_keys[s, 2 * n] = length - d
                counters[2] += 1
        choice[d] = -1
        if d == 0:
            depth_box[0] = 0
            return FINISHED
        d -= 1
        _apply(applied[d], -1, marking, copies, var_ptr, ent_place, ent_delta, var_copy)


def _rebound(fn, env: dict):
    return types.FunctionType(fn.__code__, {**globals(), **env}, fn.__name__, fn.__defaults__)


def _compile():
    jit = numba.njit(cache=False)
    env: dict = {}
    for fn in (_ceil_div, _memo_hash, _memo_slot, _feasible, _apply, _lower_bound):
        env[fn.__name__] = jit(_rebound(fn, env))
    return jit(_rebound(_dfs_chunk, env))


_compiled = None


def dfs_chunk_jit():
    """The compiled kernel (built on first use)."""
    global _compiled
    if _compiled is None:
        _compiled = _compile()
    return _compiled


class JitSearch:
    """Drives the array kernel for one path length."""

    CHUNK_NODES = 200_000

    def __init__(self, arrs: Arrays, init: np.ndarray, final: np.ndarray, length: int, copy_budget: int,
                 memo_bits: int = 16, out_rows: int = 4096):
        n = arrs.n_places
        self.a = arrs
        self.final = final.astype(np.int64)
        self.length = length
        self.copy_budget = copy_budget
        self.marking = init.astype(np.int64).copy()
        self.copies = np.zeros(n, dtype=np.int64)
        self.depth = np.zeros(1, dtype=np.int64)
        self.choice = np.full(length + 1, -1, dtype=np.int64)
        self.applied = np.zeros(max(length, 1), dtype=np.int64)
        self.sol_at_entry = np.zeros(length + 1, dtype=np.int64)
        self.counters = np.zeros(4, dtype=np.int64)
        self.memo_keys = np.zeros((1 << memo_bits, 2 * n + 1), dtype=np.int64)
        self.memo_used = np.zeros(1 << memo_bits, dtype=np.int8)
        self.out = np.zeros((out_rows, max(length, 1)), dtype=np.int64)
        self.done = False
        self.kernel = dfs_chunk_jit() if jit_enabled() else _dfs_chunk

    @property
    def nodes(self) -> int:
        return int(self.counters[1])

    def step(self, max_nodes: int | None = None) -> list[tuple[int, ...]]:
        """Run until paused; return the solutions found in this chunk."""
        a = self.a
        self.counters[3] = 0
        status = self.kernel(
            a.var_ptr, a.ent_place, a.ent_req, a.ent_delta, a.var_copy, a.max_dec, a.max_inc,
            a.tot_dec, a.tot_inc, self.final, self.length, self.copy_budget,
            self.marking, self.copies, self.depth, self.choice, self.applied, self.sol_at_entry,
            self.counters, self.memo_keys, self.memo_used, self.out, max_nodes or self.CHUNK_NODES,
        )  # fmt: skip
        self.done = status == FINISHED
        k = int(self.counters[3])
        return [tuple(int(x) for x in row[: self.length]) for row in self.out[:k]]


class NumpySearch:
    """Generator DFS; each node tests all variants at once with numpy."""

    def __init__(self, arrs: Arrays, init: np.ndarray, final: np.ndarray, length: int, copy_budget: int):
        self.a = arrs
        self.init = init.astype(np.int64)
        self.final = final.astype(np.int64)
        self.length = length
        self.copy_budget = copy_budget
        self.nodes_count = 0
        self.memo: set[tuple[bytes, bytes, int]] = set()
        starts = arrs.var_ptr[:-1]
        self._starts = starts
        self._var_of_entry = np.repeat(np.arange(len(starts)), np.diff(arrs.var_ptr))
        n_var = len(starts)
        # dense delta matrix so that applying a variant is one vector add
        self._delta = np.zeros((n_var, arrs.n_places), dtype=np.int64)
        np.add.at(self._delta, (self._var_of_entry, arrs.ent_place), arrs.ent_delta)
        self._gen = self._run()
        self.done = False

    @property
    def nodes(self) -> int:
        return self.nodes_count

    def _feasible(self, marking: np.ndarray, copies: np.ndarray) -> np.ndarray:
        a = self.a
        tok = marking[a.ent_place]
        ok = (tok >= a.ent_req) & (tok + a.ent_delta >= 0)
        bad = np.zeros(len(self._starts), dtype=bool)
        np.logical_or.at(bad, self._var_of_entry, ~ok)
        is_copy = a.var_copy >= 0
        bad[is_copy] |= copies[a.var_copy[is_copy]] >= self.copy_budget
        return np.flatnonzero(~bad)

    def _run(self):
        a = self.a
        marking = self.init.copy()
        copies = np.zeros(a.n_places, dtype=np.int64)
        path: list[int] = []
        found = 0

        def rec(remaining: int):
            nonlocal found
            self.nodes_count += 1
            if remaining == 0:
                if np.array_equal(marking, self.final):
                    found += 1
                    yield tuple(path)
                return
            yield None  # pause point
            if _lower_bound(marking, self.final, a.max_dec, a.max_inc, a.tot_dec, a.tot_inc) > remaining:
                return
            key = (marking.tobytes(), copies.tobytes(), remaining)
            if key in self.memo:
                return
            before = found
            for v in self._feasible(marking, copies):
                np.add(marking, self._delta[v], out=marking)
                c = a.var_copy[v]
                if c >= 0:
                    copies[c] += 1
                path.append(int(v))
                yield from rec(remaining - 1)
                path.pop()
                if c >= 0:
                    copies[c] -= 1
                np.subtract(marking, self._delta[v], out=marking)
            if found == before:
                self.memo.add(key)

        yield from rec(self.length)

    def step(self, max_nodes: int | None = None) -> list[tuple[int, ...]]:
        limit = self.nodes_count + (max_nodes or 20_000)
        sols: list[tuple[int, ...]] = []
        for item in self._gen:
            if item is not None:
                sols.append(item)
            elif self.nodes_count >= limit:
                return sols
        self.done = True
        return sols


def make_search(arrs: Arrays, init, final, length: int, copy_budget: int, backend: str | None = None):
    backend = backend or ("numba" if jit_enabled() else "numpy")
    if backend == "numba":
        return JitSearch(arrs, init, final, length, copy_budget)
    if backend == "python":
        s = JitSearch(arrs, init, final, length, copy_budget)
        s.kernel = _dfs_chunk
        return s
    return NumpySearch(arrs, init, final, length, copy_budget)
