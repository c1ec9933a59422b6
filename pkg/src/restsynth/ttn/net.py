"""Type-transition nets built from a semantic library."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from ..core.library import SemanticLibrary
from ..core.types import LocSet, ObjRef, Query, RecordT, Type, downgrade

METHOD, PROJ, FILTER, COPY = "method", "proj", "filter", "copy"


@dataclass(frozen=True)
class Transition:
    kind: str
    name: str
    # method name; object/record place for projections and filters
    method: str | None = None
    obj: Type | None = None
    path: tuple[str, ...] = ()
    place: Type | None = None  # copy transitions

    def __str__(self) -> str:
        return self.name


def place_name(t: Type) -> str:
    return str(t)


class UnknownPlace(KeyError):
    pass


@dataclass
class TTN:
    """Places, transitions and the multiplicity maps. ``pre[(p, t)]`` is
    the required input multiplicity, ``opt[(p, t)]`` the optional one and
    ``post[(t, p)]`` the output multiplicity; absent keys mean zero."""

    places: list[Type] = field(default_factory=list)
    transitions: list[Transition] = field(default_factory=list)
    pre: dict[tuple[int, int], int] = field(default_factory=dict)
    opt: dict[tuple[int, int], int] = field(default_factory=dict)
    post: dict[tuple[int, int], int] = field(default_factory=dict)
    index: dict[Type, int] = field(default_factory=dict)
    tindex: dict[str, int] = field(default_factory=dict)

    def place(self, t: Type) -> int:
        if t not in self.index:
            self.index[t] = len(self.places)
            self.places.append(t)
        return self.index[t]

    def add_transition(self, tr: Transition) -> int | None:
        if tr.name in self.tindex:
            return None
        self.tindex[tr.name] = len(self.transitions)
        self.transitions.append(tr)
        return self.tindex[tr.name]

    def place_of(self, t: Type) -> int:
        try:
            return self.index[t]
        except KeyError:
            raise UnknownPlace(f"type {t} is not a place of the net") from None

    def E(self, a, b) -> int:
        """Multiplicity of an edge given as (place, transition) or
        (transition, place), by type and transition name."""
        if isinstance(a, str):
            return self.post.get((self.tindex[a], self.index[b]), 0)
        return self.pre.get((self.index[a], self.tindex[b]), 0)

    def O(self, p: Type, t: str) -> int:  # noqa: E743
        return self.opt.get((self.index[p], self.tindex[t]), 0)

    def matrices(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Dense (transition x place) arrays for required, optional and
        output multiplicities."""
        shape = (len(self.transitions), len(self.places))
        req, opt, out = (np.zeros(shape, dtype=np.int64) for _ in range(3))
        for (p, t), n in self.pre.items():
            req[t, p] = n
        for (p, t), n in self.opt.items():
            opt[t, p] = n
        for (t, p), n in self.post.items():
            out[t, p] = n
        return req, opt, out

    def add_copies(self) -> None:
        for t in sorted(self.places, key=place_name):
            i = self.add_transition(Transition(COPY, f"copy_{place_name(t)}", place=t))
            if i is not None:
                p = self.index[t]
                self.pre[(p, i)] = 1
                self.post[(i, p)] = 2

    def to_dot(self) -> str:
        lines = ["digraph ttn {", "  rankdir=LR;"]
        for i, t in enumerate(self.places):
            lines.append(f'  p{i} [shape=ellipse, label="{place_name(t)}"];')
        for j, tr in enumerate(self.transitions):
            lines.append(f'  t{j} [shape=box, label="{tr.name}"];')
        for (p, t), n in sorted(self.pre.items()):
            lines.append(f'  p{p} -> t{t} [label="{n}"];')
        for (p, t), n in sorted(self.opt.items()):
            lines.append(f'  p{p} -> t{t} [label="{n}", style=dashed];')
        for (t, p), n in sorted(self.post.items()):
            lines.append(f'  t{t} -> p{p} [label="{n}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _fields(sem: SemanticLibrary, t: Type) -> RecordT | None:
    rec = sem.unfold(t)
    return rec if isinstance(rec, RecordT) else None


def build_ttn(sem: SemanticLibrary, copies: bool = True) -> TTN:
    """Encode methods, projections, filters and (optionally) copies."""
    net = TTN()
    record_places: list[Type] = []

    def note(t: Type) -> int:
        t = downgrade(t)
        new = t not in net.index
        i = net.place(t)
        if new and isinstance(t, RecordT):
            record_places.append(t)
        return i

    for m in sorted(sem.methods):
        ft = sem.methods[m]
        j = net.add_transition(Transition(METHOD, m, method=m))
        assert j is not None
        for f in ft.inp.fields:
            p = note(f.type)
            table = net.opt if f.optional else net.pre
            table[(p, j)] = table.get((p, j), 0) + 1
        net.post[(j, note(ft.out))] = 1

    def encode_record(obj: Type) -> None:
        rec = _fields(sem, obj)
        if rec is None:
            return
        o = net.place(obj)
        for f in rec.fields:
            j = net.add_transition(Transition(PROJ, f"proj_{place_name(obj)}.{f.label}", obj=obj, path=(f.label,)))
            if j is not None:
                net.pre[(o, j)] = 1
                net.post[(j, note(f.type))] = 1
        for path, val in _filter_paths(sem, obj):
            j = net.add_transition(Transition(FILTER, f"filter_{place_name(obj)}.{'.'.join(path)}", obj=obj, path=path))
            if j is not None:
                v = note(val)
                net.pre[(o, j)] = net.pre.get((o, j), 0) + 1
                net.pre[(v, j)] = net.pre.get((v, j), 0) + 1
                net.post[(j, o)] = 1

    for o in sorted(sem.objects):
        encode_record(ObjRef(o))
    done: set[Type] = set()
    while len(done) < len(record_places):
        for r in list(record_places):
            if r not in done:
                done.add(r)
                encode_record(r)
    if copies:
        net.add_copies()
    return net


def _filter_paths(sem: SemanticLibrary, obj: Type) -> list[tuple[tuple[str, ...], Type]]:
    """Field paths from ``obj`` ending at a primitive, recursing through
    nested objects and records; an object met twice on a path stops it."""
    out: list[tuple[tuple[str, ...], Type]] = []

    def go(t: Type, path: tuple[str, ...], seen: frozenset[str]) -> None:
        rec = _fields(sem, t)
        if rec is None:
            return
        for f in rec.fields:
            ft = downgrade(f.type)
            if isinstance(ft, LocSet):
                out.append((path + (f.label,), ft))
            elif isinstance(ft, ObjRef):
                if ft.name not in seen:
                    go(ft, path + (f.label,), seen | {ft.name})
            elif isinstance(ft, RecordT):
                go(ft, path + (f.label,), seen)

    go(obj, (), frozenset([obj.name]) if isinstance(obj, ObjRef) else frozenset())
    return out


# -- markings ----------------------------------------------------------------


def place_tokens(net: TTN, query: Query) -> tuple[np.ndarray, np.ndarray]:
    """Initial marking from the query arguments and the final marking with
    one token at the downgraded result type."""
    init = np.zeros(len(net.places), dtype=np.int64)
    final = np.zeros(len(net.places), dtype=np.int64)
    for _, t in query.args:
        init[net.place_of(downgrade(t))] += 1
    final[net.place_of(downgrade(query.out))] = 1
    return init, final


def marking_dict(net: TTN, m: np.ndarray) -> dict[str, int]:
    return {place_name(net.places[i]): int(n) for i, n in enumerate(m) if n}


@dataclass(frozen=True)
class Variant:
    """One concrete firing of a transition: the optional consumption per
    place and the resulting (required, delta) entries."""

    transition: int
    consumed: tuple[tuple[int, int], ...]  # (place, optional tokens taken)
    entries: tuple[tuple[int, int, int], ...]  # (place, required, delta)


def variants(net: TTN) -> list[Variant]:
    """Firing variants ordered by transition, then total optional
    consumption, then lexicographically by consumption vector."""
    req, opt, out = net.matrices()
    res: list[Variant] = []
    for t in range(len(net.transitions)):
        places = sorted(set(np.nonzero(req[t])[0]) | set(np.nonzero(opt[t])[0]) | set(np.nonzero(out[t])[0]))
        optional = [p for p in places if opt[t, p] > 0]
        choices = sorted(itertools.product(*[range(opt[t, p] + 1) for p in optional]), key=lambda c: (sum(c), c))
        for c in choices:
            taken = dict(zip(optional, c))
            entries = tuple(
                (int(p), int(req[t, p]), int(out[t, p] - req[t, p] - taken.get(p, 0))) for p in places
            )
            res.append(Variant(t, tuple((int(p), int(taken[p])) for p in optional), entries))
    return res
