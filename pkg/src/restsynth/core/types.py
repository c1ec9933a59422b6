"""Locations, syntactic types and semantic types.

Syntactic and semantic types share the object-reference, array and record
constructors; they differ only in their primitive: ``StringT`` for the
syntactic side, ``LocSet`` for the semantic side.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Union


class Special(enum.Enum):
    """Reserved location labels, kept apart from spec field names."""

    IN = "in"
    OUT = "out"
    ELEM = "0"

    def __repr__(self) -> str:
        return f"Special.{self.name}"


IN = Special.IN
OUT = Special.OUT
ELEM = Special.ELEM

Label = Union[str, Special]


def _label_key(label: Label) -> tuple[int, str]:
    if isinstance(label, Special):
        return (0, label.value)
    return (1, label)


def label_str(label: Label) -> str:
    return label.value if isinstance(label, Special) else label


@dataclass(frozen=True)
class Location:
    """A head (object or method name) followed by a path of labels."""

    head: str
    path: tuple[Label, ...] = ()
    method: bool = False

    def __post_init__(self) -> None:
        if self.method and not self.path:
            raise ValueError(f"method location {self.head!r} needs a path")

    def child(self, label: Label) -> Location:
        return Location(self.head, self.path + (label,), self.method)

    @property
    def is_object_root(self) -> bool:
        return not self.method and not self.path

    def sort_key(self) -> tuple:
        return (self.head, tuple(_label_key(lb) for lb in self.path), self.method)

    def __lt__(self, other: Location) -> bool:
        return self.sort_key() < other.sort_key()

    def __str__(self) -> str:
        return ".".join([self.head, *(label_str(lb) for lb in self.path)])

    def __repr__(self) -> str:
        return f"Location({str(self)!r})"


# -- types -----------------------------------------------------------------


class Type:
    """Base class for both type languages."""

    __slots__ = ()


@dataclass(frozen=True)
class StringT(Type):
    """Syntactic primitive. ``kind`` keeps the original spec primitive so the
    miner can refuse to merge booleans and small integers."""

    kind: str = "string"

    def __str__(self) -> str:
        return "String" if self.kind == "string" else f"String<{self.kind}>"


@dataclass(frozen=True)
class LocSet(Type):
    locs: frozenset[Location]

    def __post_init__(self) -> None:
        if not self.locs:
            raise ValueError("empty loc-set")

    @classmethod
    def of(cls, *locs: Location) -> LocSet:
        return cls(frozenset(locs))

    @property
    def name(self) -> str:
        objs = [loc for loc in self.locs if not loc.method]
        pool = objs or list(self.locs)
        return str(min(pool, key=str))

    def sorted_locs(self) -> list[Location]:
        return sorted(self.locs, key=str)

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ObjRef(Type):
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class ArrayT(Type):
    elem: Type

    def __str__(self) -> str:
        return f"[{self.elem}]"


@dataclass(frozen=True)
class Field:
    label: str
    type: Type
    optional: bool = False


@dataclass(frozen=True)
class RecordT(Type):
    fields: tuple[Field, ...] = ()

    def __post_init__(self) -> None:
        labels = [f.label for f in self.fields]
        if len(set(labels)) != len(labels):
            raise ValueError(f"duplicate record labels in {labels}")
        # canonical order makes structural equality order-insensitive
        object.__setattr__(self, "fields", tuple(sorted(self.fields, key=lambda f: f.label)))

    @classmethod
    def of(cls, fields: Iterable[Field]) -> RecordT:
        return cls(tuple(fields))

    def get(self, label: str) -> Field | None:
        for f in self.fields:
            if f.label == label:
                return f
        return None

    def __iter__(self) -> Iterator[Field]:
        return iter(self.fields)

    def required(self) -> list[Field]:
        return [f for f in self.fields if not f.optional]

    def optional(self) -> list[Field]:
        return [f for f in self.fields if f.optional]

    def __str__(self) -> str:
        inner = ", ".join(f"{'?' if f.optional else ''}{f.label}: {f.type}" for f in self.fields)
        return "{" + inner + "}"


@dataclass(frozen=True)
class FunType:
    inp: RecordT
    out: Type

    def __str__(self) -> str:
        return f"{self.inp} -> {self.out}"


def downgrade(t: Type) -> Type:
    """Erase array constructors: ``[[a]] -> a``."""
    while isinstance(t, ArrayT):
        t = t.elem
    return t


def array_depth(t: Type) -> int:
    n = 0
    while isinstance(t, ArrayT):
        t = t.elem
        n += 1
    return n


def wrap(t: Type, depth: int) -> Type:
    for _ in range(depth):
        t = ArrayT(t)
    return t


def map_locsets(t: Type, fn) -> Type:
    """Rebuild ``t`` with every ``LocSet`` replaced by ``fn(locset)``."""
    if isinstance(t, LocSet):
        return fn(t)
    if isinstance(t, ArrayT):
        return ArrayT(map_locsets(t.elem, fn))
    if isinstance(t, RecordT):
        return RecordT(tuple(Field(f.label, map_locsets(f.type, fn), f.optional) for f in t.fields))
    return t


def iter_locsets(t: Type) -> Iterator[LocSet]:
    if isinstance(t, LocSet):
        yield t
    elif isinstance(t, ArrayT):
        yield from iter_locsets(t.elem)
    elif isinstance(t, RecordT):
        for f in t.fields:
            yield from iter_locsets(f.type)


def iter_objrefs(t: Type) -> Iterator[str]:
    if isinstance(t, ObjRef):
        yield t.name
    elif isinstance(t, ArrayT):
        yield from iter_objrefs(t.elem)
    elif isinstance(t, RecordT):
        for f in t.fields:
            yield from iter_objrefs(f.type)


@dataclass(frozen=True)
class Query:
    """A semantic function type used as a synthesis goal."""

    args: tuple[tuple[str, Type], ...]
    out: Type = field(default=None)  # type: ignore[assignment]

    @property
    def labels(self) -> list[str]:
        return [a for a, _ in self.args]

    def arg_type(self, label: str) -> Type:
        return dict(self.args)[label]

    def lifted(self) -> Query:
        """The same query with an array-typed result, as every program
        in the comprehension language returns an array."""
        if isinstance(self.out, ArrayT):
            return self
        return Query(self.args, ArrayT(self.out))

    def __str__(self) -> str:
        inner = ", ".join(f"{a}: {t}" for a, t in self.args)
        return "{" + inner + "} -> " + str(self.out)
