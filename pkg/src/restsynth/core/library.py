"""Syntactic and semantic libraries."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

from .types import (
    ELEM,
    IN,
    OUT,
    ArrayT,
    FunType,
    Label,
    Location,
    LocSet,
    ObjRef,
    RecordT,
    Special,
    StringT,
    Type,
    iter_locsets,
    iter_objrefs,
)

Value = Any  # str | list[Value] | dict[str, Value]


class LibraryError(ValueError):
    pass


def value_key(v: Value) -> str:
    """Canonical text of a value; used for hashing and set semantics."""
    return json.dumps(v, sort_keys=True, separators=(",", ":"), ensure_ascii=False)


def check_value(v: Value) -> None:
    if isinstance(v, str):
        return
    if isinstance(v, list):
        for x in v:
            check_value(x)
        return
    if isinstance(v, dict):
        for k, x in v.items():
            if not isinstance(k, str):
                raise LibraryError(f"object label {k!r} is not a string")
            check_value(x)
        return
    raise LibraryError(f"not a value: {v!r}")


def child_type(t: Type, label: Label) -> Type | None:
    """Type one step below ``t`` (no object unfolding)."""
    if isinstance(t, ArrayT):
        return t.elem if label is ELEM else None
    if isinstance(t, RecordT) and isinstance(label, str):
        f = t.get(label)
        return f.type if f else None
    return None


@dataclass
class Library:
    objects: dict[str, RecordT] = field(default_factory=dict)
    methods: dict[str, FunType] = field(default_factory=dict)

    def validate(self) -> None:
        types: list[Type] = list(self.objects.values())
        for ft in self.methods.values():
            types += [ft.inp, ft.out]
        for t in types:
            for name in iter_objrefs(t):
                if name not in self.objects:
                    raise LibraryError(f"dangling object reference {name!r}")

    def root_type(self, loc: Location) -> Type:
        if loc.method:
            return self.methods[loc.head].inp  # caller steps into IN/OUT
        return self.objects[loc.head]

    def lookup(self, loc: Location) -> Type | None:
        """Syntactic type written at ``loc`` without following object
        references (the lookup is only defined on canonical locations)."""
        if loc.method:
            ft = self.methods.get(loc.head)
            if ft is None or not loc.path:
                return None
            first, rest = loc.path[0], loc.path[1:]
            if first is IN:
                t: Type | None = ft.inp
            elif first is OUT:
                t = ft.out
            else:
                return None
        else:
            t = self.objects.get(loc.head)
            rest = loc.path
            if t is None:
                return None
            if not rest:
                return ObjRef(loc.head)
        for lb in rest:
            if t is None:
                return None
            t = child_type(t, lb)
        return t

    def parse_location(self, text: str) -> Location:
        """Parse ``Head.label.label``; the head is the longest known object
        or method name that prefixes the text."""
        best: tuple[str, bool] | None = None
        for name, is_method in [(o, False) for o in self.objects] + [(m, True) for m in self.methods]:
            if text == name or text.startswith(name + "."):
                if best is None or len(name) > len(best[0]):
                    best = (name, is_method)
        if best is None:
            raise LibraryError(f"unknown location {text!r}")
        head, is_method = best
        rest = text[len(head) + 1 :].split(".") if len(text) > len(head) else []
        path: list[Label] = []
        for i, part in enumerate(rest):
            if is_method and i == 0:
                if part not in ("in", "out"):
                    raise LibraryError(f"method location {text!r} must continue with in/out")
                path.append(IN if part == "in" else OUT)
            elif part == "0":
                path.append(ELEM)
            else:
                path.append(part)
        if is_method and not path:
            raise LibraryError(f"method location {text!r} must continue with in/out")
        return Location(head, tuple(path), is_method)

    def all_locations(self) -> list[Location]:
        """Every canonical location written in the library."""
        out: list[Location] = []

        def walk(loc: Location, t: Type) -> None:
            out.append(loc)
            if isinstance(t, ArrayT):
                walk(loc.child(ELEM), t.elem)
            elif isinstance(t, RecordT):
                for f in t.fields:
                    walk(loc.child(f.label), f.type)

        for o, rec in self.objects.items():
            out.append(Location(o))
            for f in rec.fields:
                walk(Location(o, (f.label,)), f.type)
        for m, ft in self.methods.items():
            walk(Location(m, (IN,), True), ft.inp)
            walk(Location(m, (OUT,), True), ft.out)
        return out


@dataclass
class SemanticLibrary:
    """Mined signatures plus the value bank.

    ``groups`` maps every location that took part in mining to its loc-set;
    locations absent from it keep their singleton location-based type.
    """

    objects: dict[str, RecordT]
    methods: dict[str, FunType]
    bank: dict[Type, dict[str, Value]]
    syntactic: Library
    groups: dict[Location, LocSet] = field(default_factory=dict)

    def unfold(self, t: Type) -> Type:
        if isinstance(t, ObjRef) and t.name in self.objects:
            return self.objects[t.name]
        return t

    def resolve(self, loc: Location) -> Type:
        from ..mining import infer_location_type

        t = infer_location_type(self.syntactic, loc)
        return self.rewrite(t)

    def rewrite(self, t: Type) -> Type:
        from .types import map_locsets

        def sub(ls: LocSet) -> LocSet:
            (loc,) = ls.locs
            return self.groups.get(loc, ls)

        return map_locsets(t, sub)

    def resolve_text(self, text: str) -> Type:
        if text in self.objects:
            return ObjRef(text)
        return self.resolve(self.syntactic.parse_location(text))

    def bank_values(self, t: Type) -> list[Value]:
        entries = self.bank.get(t, {})
        return [entries[k] for k in sorted(entries)]

    def locsets(self) -> set[LocSet]:
        out: set[LocSet] = set()
        for rec in self.objects.values():
            out.update(iter_locsets(rec))
        for ft in self.methods.values():
            out.update(iter_locsets(ft.inp))
            out.update(iter_locsets(ft.out))
        return out

    def validate(self) -> None:
        for t in [*self.objects.values(), *(x for ft in self.methods.values() for x in (ft.inp, ft.out))]:
            for name in iter_objrefs(t):
                if name not in self.objects:
                    raise LibraryError(f"dangling object reference {name!r}")
            for ls in iter_locsets(t):
                if len(ls.locs) > 1 and any(self.groups.get(loc) != ls for loc in ls.locs):
                    raise LibraryError(f"loc-set {ls} is not a mined group")


def is_primitive(t: Type) -> bool:
    return isinstance(t, (StringT, LocSet))


__all__ = [
    "Library",
    "LibraryError",
    "SemanticLibrary",
    "Special",
    "Value",
    "check_value",
    "child_type",
    "is_primitive",
    "value_key",
]
