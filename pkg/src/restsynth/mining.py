"""Location-based type inference and value-driven type mining."""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable

from .core.library import Library, LibraryError, SemanticLibrary, Value, value_key
from .core.types import (
    ELEM,
    IN,
    OUT,
    ArrayT,
    Field,
    FunType,
    Label,
    Location,
    LocSet,
    ObjRef,
    RecordT,
    StringT,
    Type,
    label_str,
)
from .ingest import Witness, WitnessStore

SMALL_INT_LIMIT = 1000
_INT = re.compile(r"[+-]?\d+\Z")


# -- location-based inference -----------------------------------------------------


def _lookup(lib: Library, head: str, path: tuple[Label, ...], method: bool) -> Type | None:
    if method and not path:
        return None
    return lib.lookup(Location(head, path, method))


def _infer_acc(lib: Library, head: str, path: tuple[Label, ...], method: bool, rest: tuple[Label, ...]) -> Type:
    if not rest:
        if not method and not path:
            return ObjRef(head)
        return LocSet.of(Location(head, path, method))
    l1, tail = rest[0], rest[1:]
    sub = path + (l1,)
    t = _lookup(lib, head, sub, method)
    if t is None:
        raise LibraryError(f"unaddressable location {Location(head, sub, method) if sub else head}")
    if isinstance(t, ObjRef):
        # fold the prefix into the object name
        return _infer_acc(lib, t.name, (), False, tail)
    if not tail:
        if isinstance(t, ArrayT):
            return ArrayT(_infer_acc(lib, head, sub, method, (ELEM,)))
        if isinstance(t, RecordT):
            return RecordT.of(
                Field(f.label, _infer_acc(lib, head, sub, method, (f.label,)), f.optional) for f in t.fields
            )
    return _infer_acc(lib, head, sub, method, tail)


def infer_location_type(lib: Library, loc: Location) -> Type:
    """Location-based semantic type of ``loc`` (before any merging)."""
    if loc.method:
        if loc.head not in lib.methods:
            raise LibraryError(f"unknown method {loc.head!r}")
        return _infer_acc(lib, loc.head, (), True, loc.path)
    if loc.head not in lib.objects:
        raise LibraryError(f"unknown object {loc.head!r}")
    return _infer_acc(lib, loc.head, (), False, loc.path)


def canonical(lib: Library, loc: Location) -> Location:
    """Canonical form of a location naming a primitive."""
    t = infer_location_type(lib, loc)
    if not isinstance(t, LocSet):
        raise LibraryError(f"{loc} does not denote a primitive")
    (c,) = t.locs
    return c


# -- disjoint sets --------------------------------------------------------------------


@dataclass
class MergeSet:
    """Union-find over locations and string values. Each root carries the
    member locations and values of its group."""

    parent: dict[tuple, tuple] = field(default_factory=dict)
    members: dict[tuple, tuple[set[Location], set[str]]] = field(default_factory=dict)

    def _add(self, key: tuple) -> None:
        if key not in self.parent:
            self.parent[key] = key
            locs: set[Location] = {key[1]} if key[0] == "L" else set()
            vals: set[str] = {key[1]} if key[0] == "V" else set()
            self.members[key] = (locs, vals)

    def _find(self, key: tuple) -> tuple:
        root = key
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[key] != root:
            self.parent[key], key = root, self.parent[key]
        return root

    def _union(self, a: tuple, b: tuple) -> None:
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        la, va = self.members[ra]
        lb, vb = self.members[rb]
        if len(la) + len(va) < len(lb) + len(vb):
            ra, rb, la, va, lb, vb = rb, ra, lb, vb, la, va
        self.parent[rb] = ra
        la |= lb
        va |= vb
        del self.members[rb]

    def add_location(self, loc: Location) -> None:
        self._add(("L", loc))

    def insert(self, loc: Location, value: str) -> None:
        self._add(("L", loc))
        self._add(("V", value))
        self._union(("L", loc), ("V", value))

    def __contains__(self, loc: Location) -> bool:
        return ("L", loc) in self.parent

    def find(self, loc: Location) -> frozenset[Location]:
        return frozenset(self.members[self._find(("L", loc))][0])

    def values_of(self, loc: Location) -> frozenset[str]:
        return frozenset(self.members[self._find(("L", loc))][1])

    def partition(self) -> set[frozenset[Location]]:
        return {frozenset(locs) for locs, _ in self.members.values() if locs}


def merge_eligible(value: str, kind: str) -> bool:
    """Values that may join two locations: non-empty strings and integers
    above the small-integer threshold; never booleans."""
    if kind == "boolean" or value == "":
        return False
    if _INT.match(value):
        return int(value) > SMALL_INT_LIMIT
    return kind == "string"


# -- witnesses -> merge set ---------------------------------------------------------


@dataclass
class _Walk:
    lib: Library
    ds: MergeSet
    seen: dict[Location, dict[str, Value]] = field(default_factory=dict)

    def value(self, loc: Location, t: Type, v: Value) -> None:
        if isinstance(t, ObjRef):
            rec = self.lib.objects.get(t.name)
            if rec is None:
                return
            loc, t = Location(t.name), rec
        self.seen.setdefault(loc, {})[value_key(v)] = v
        if isinstance(t, StringT):
            if not isinstance(v, str):
                return
            if merge_eligible(v, t.kind):
                self.ds.insert(loc, v)
            else:
                self.ds.add_location(loc)
        elif isinstance(t, ArrayT):
            if isinstance(v, list):
                for x in v:
                    self.value(loc.child(ELEM), t.elem, x)
        elif isinstance(t, RecordT):
            if isinstance(v, dict):
                for k, x in v.items():
                    f = t.get(k)
                    if f is not None:
                        self.value(loc.child(k), f.type, x)

    def witness(self, w: Witness) -> None:
        ft = self.lib.methods.get(w.method)
        if ft is None:
            raise LibraryError(f"witness for unknown method {w.method!r}")
        self.value(Location(w.method, (IN,), True), ft.inp, w.inp)
        self.value(Location(w.method, (OUT,), True), ft.out, w.out)


def build_merge_set(lib: Library, witnesses: Iterable[Witness]) -> tuple[MergeSet, dict[Location, dict[str, Value]]]:
    walk = _Walk(lib, MergeSet())
    for w in witnesses:
        walk.witness(w)
    return walk.ds, walk.seen


def mine_types(lib: Library, witnesses: WitnessStore | Iterable[Witness]) -> SemanticLibrary:
    """Merge locations that share values and rebuild every signature over
    the mined loc-sets; also collects the value bank."""
    ds, seen = build_merge_set(lib, witnesses)
    groups: dict[Location, LocSet] = {}
    for part in ds.partition():
        ls = LocSet(part)
        for loc in part:
            groups[loc] = ls
    sem = SemanticLibrary({}, {}, {}, lib, groups)
    for o, rec in lib.objects.items():
        sem.objects[o] = RecordT.of(Field(f.label, sem.resolve(Location(o, (f.label,))), f.optional) for f in rec.fields)
    for m in lib.methods:
        inp = sem.resolve(Location(m, (IN,), True))
        assert isinstance(inp, RecordT)
        sem.methods[m] = FunType(inp, sem.resolve(Location(m, (OUT,), True)))
    for loc in sorted(seen):
        bank = sem.bank.setdefault(sem.resolve(loc), {})
        bank.update(seen[loc])
    return sem


def partition_of(sem: SemanticLibrary) -> set[frozenset[Location]]:
    return {ls.locs for ls in sem.groups.values()}


# -- export ------------------------------------------------------------------------------


def type_to_json(t: Type):
    if isinstance(t, LocSet):
        return sorted(str(loc) for loc in t.locs)
    if isinstance(t, ObjRef):
        return {"ref": t.name}
    if isinstance(t, StringT):
        return {"string": t.kind}
    if isinstance(t, ArrayT):
        return {"array": type_to_json(t.elem)}
    if isinstance(t, RecordT):
        return {"record": {("?" if f.optional else "") + f.label: type_to_json(f.type) for f in t.fields}}
    raise TypeError(t)


def semlib_to_json(sem: SemanticLibrary) -> dict:
    return {
        "objects": {o: type_to_json(r) for o, r in sorted(sem.objects.items())},
        "methods": {
            m: {"in": type_to_json(ft.inp), "out": type_to_json(ft.out)} for m, ft in sorted(sem.methods.items())
        },
        "groups": sorted(sorted(str(loc) for loc in part) for part in partition_of(sem) if len(part) > 1),
    }


def bank_to_json(sem: SemanticLibrary) -> list[dict]:
    rows = [{"type": type_to_json(t), "name": str(t), "values": sem.bank_values(t)} for t in sem.bank]
    return sorted(rows, key=lambda r: json.dumps(r["type"], sort_keys=True))


__all__ = [
    "MergeSet",
    "build_merge_set",
    "canonical",
    "infer_location_type",
    "label_str",
    "merge_eligible",
    "mine_types",
    "partition_of",
    "semlib_to_json",
]
