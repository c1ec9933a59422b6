"""Parsing type queries such as ``{channel_name: Channel.name} -> [Profile.email]``."""

from __future__ import annotations

import difflib
import re

from .core.library import LibraryError, SemanticLibrary
from .core.types import ArrayT, Query, Type

_TOKEN = re.compile(r"\s*(?:(->|[{}\[\]:,])|`([^`]+)`|([A-Za-z0-9_.$/\-]+))")


class QueryError(ValueError):
    pass


class UnknownType(QueryError):
    def __init__(self, name: str, suggestions: list[str]):
        hint = f"; did you mean {', '.join(suggestions)}?" if suggestions else ""
        super().__init__(f"unknown type {name!r}{hint}")
        self.name = name
        self.suggestions = suggestions


def _tokens(text: str) -> list[tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise QueryError(f"unexpected character at {pos}: {text[pos:pos + 10]!r}")
        op, quoted, name = m.groups()
        out.append(("op", op) if op else ("name", quoted or name))
        pos = m.end()
    return out


def type_names(sem: SemanticLibrary) -> list[str]:
    """Every name a query may use for a type."""
    names = set(sem.objects)
    names.update(str(loc) for loc in sem.syntactic.all_locations())
    return sorted(names)


def resolve_name(sem: SemanticLibrary, name: str) -> Type:
    try:
        return sem.resolve_text(name)
    except LibraryError:
        close = difflib.get_close_matches(name, type_names(sem), n=5, cutoff=0.5)
        raise UnknownType(name, close) from None


def default_label(name: str) -> str:
    """``Channel.name`` becomes ``channel_name``; a bare object name is
    lower-cased."""
    parts = name.split(".")
    if len(parts) == 1:
        return parts[0].lower()
    return f"{parts[0].lower()}_{parts[-1]}"


class _Parser:
    def __init__(self, text: str, sem: SemanticLibrary):
        self.toks = _tokens(text)
        self.i = 0
        self.sem = sem

    def peek(self) -> tuple[str, str] | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def expect(self, op: str) -> None:
        t = self.peek()
        if t != ("op", op):
            raise QueryError(f"expected {op!r}, found {t[1] if t else 'end of query'!r}")
        self.i += 1

    def name(self) -> str:
        t = self.peek()
        if t is None or t[0] != "name":
            raise QueryError(f"expected a name, found {t[1] if t else 'end of query'!r}")
        self.i += 1
        return t[1]

    def type_(self) -> Type:
        if self.peek() == ("op", "["):
            self.i += 1
            t = self.type_()
            self.expect("]")
            return ArrayT(t)
        return resolve_name(self.sem, self.name())

    def args(self) -> tuple[tuple[str, Type], ...]:
        if self.peek() == ("op", "{"):
            self.i += 1
            out: list[tuple[str, Type]] = []
            while self.peek() != ("op", "}"):
                if out:
                    self.expect(",")
                lb = self.name()
                self.expect(":")
                out.append((lb, self.type_()))
            self.i += 1
            labels = [lb for lb, _ in out]
            if len(set(labels)) != len(labels):
                raise QueryError("duplicate argument label")
            return tuple(out)
        depth = 0
        while self.peek() == ("op", "["):
            depth += 1
            self.i += 1
        name = self.name()
        t = resolve_name(self.sem, name)
        for _ in range(depth):
            self.expect("]")
            t = ArrayT(t)
        return ((default_label(name), t),)

    def query(self) -> Query:
        args = self.args()
        self.expect("->")
        out = self.type_()
        if self.peek() is not None:
            raise QueryError(f"trailing input {self.peek()[1]!r}")
        return Query(args, out)


def parse_query(text: str, sem: SemanticLibrary) -> Query:
    return _Parser(text, sem).query()
