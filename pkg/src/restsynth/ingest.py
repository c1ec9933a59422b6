"""Loading API specifications and witness files."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Iterable, Iterator

from .core.library import Library, LibraryError, Value, check_value, value_key
from .core.types import ArrayT, Field, FunType, ObjRef, RecordT, StringT, Type

log = logging.getLogger(__name__)

_PRIMS = {
    "string": "string",
    "integer": "integer",
    "int": "integer",
    "number": "number",
    "boolean": "boolean",
    "bool": "boolean",
}


class SpecError(LibraryError):
    pass


def _no_dup_pairs(pairs: list[tuple[str, Any]]) -> dict:
    out: dict = {}
    for k, v in pairs:
        if k in out:
            raise SpecError(f"duplicate key {k!r}")
        out[k] = v
    return out


def read_json(path: str | Path) -> Any:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh, object_pairs_hook=_no_dup_pairs)


# -- fixture dialect -----------------------------------------------------------


def _dialect_type(t: Any) -> Type:
    if isinstance(t, dict):
        return _dialect_record(t)
    if not isinstance(t, str):
        raise SpecError(f"bad type {t!r}")
    t = t.strip()
    if t.startswith("[") and t.endswith("]"):
        return ArrayT(_dialect_type(t[1:-1]))
    if t.lower() in _PRIMS:
        return StringT(_PRIMS[t.lower()])
    return ObjRef(t)


def _dialect_record(d: dict) -> RecordT:
    fields = []
    for k, v in d.items():
        opt = k.startswith("?")
        fields.append(Field(k[1:] if opt else k, _dialect_type(v), opt))
    return RecordT.of(fields)


def _load_dialect(doc: dict) -> Library:
    lib = Library()
    for name, rec in doc.get("objects", {}).items():
        if not isinstance(rec, dict):
            raise SpecError(f"object {name!r} is not a record")
        lib.objects[name] = _dialect_record(rec)
    for name, m in doc.get("methods", {}).items():
        if not isinstance(m.get("in", {}), dict):
            raise SpecError(f"method {name!r}: input is not a record")
        lib.methods[name] = FunType(_dialect_record(m.get("in", {})), _dialect_type(m["out"]))
    return lib


# -- OpenAPI subset ------------------------------------------------------------


def _ref_name(ref: str) -> str:
    return ref.rsplit("/", 1)[-1]


class _OpenApi:
    def __init__(self, doc: dict):
        self.doc = doc
        self.schemas = doc.get("components", {}).get("schemas") or doc.get("definitions") or {}

    def is_object_schema(self, s: dict) -> bool:
        return s.get("type") == "object" or "properties" in s

    def convert(self, s: Any, where: str) -> Type:
        if not isinstance(s, dict):
            raise SpecError(f"{where}: schema is not an object")
        if "$ref" in s:
            name = _ref_name(s["$ref"])
            target = self.schemas.get(name)
            if target is None:
                raise SpecError(f"{where}: dangling reference {s['$ref']!r}")
            if self.is_object_schema(target):
                return ObjRef(name)
            return self.convert(target, name)
        ty = s.get("type")
        if ty == "array":
            return ArrayT(self.convert(s.get("items", {"type": "string"}), where + ".items"))
        if self.is_object_schema(s):
            required = set(s.get("required", []))
            props = s.get("properties", {})
            return RecordT.of(Field(k, self.convert(v, f"{where}.{k}"), k not in required) for k, v in props.items())
        if ty in _PRIMS:
            return StringT(_PRIMS[ty])
        log.warning("%s: unsupported schema %s treated as string", where, sorted(s))
        return StringT()

    def load(self) -> Library:
        lib = Library()
        for name, s in self.schemas.items():
            if self.is_object_schema(s):
                t = self.convert(s, name)
                assert isinstance(t, RecordT)
                lib.objects[name] = t
        for path, item in self.doc.get("paths", {}).items():
            for verb, op in item.items():
                if verb.lower() not in {"get", "post", "put", "patch", "delete"}:
                    continue
                name = op.get("operationId") or f"{path}_{verb.upper()}"
                if name in lib.methods:
                    raise SpecError(f"duplicate method name {name!r}")
                lib.methods[name] = self.method(name, op)
        return lib

    def method(self, name: str, op: dict) -> FunType:
        fields = []
        for p in op.get("parameters", []):
            if "$ref" in p:
                log.warning("%s: parameter references are ignored", name)
                continue
            schema = p.get("schema") or {"type": p.get("type", "string"), **({"items": p["items"]} if "items" in p else {})}
            fields.append(Field(p["name"], self.convert(schema, f"{name}.{p['name']}"), not p.get("required", False)))
        if "requestBody" in op:
            log.warning("%s: request bodies are ignored", name)
        out: Type | None = None
        for code, resp in sorted(op.get("responses", {}).items()):
            if not str(code).startswith("2"):
                continue
            schema = resp.get("schema")
            if schema is None:
                content = resp.get("content", {})
                media = content.get("application/json") or next(iter(content.values()), {})
                schema = media.get("schema")
            if schema is not None:
                out = self.convert(schema, f"{name}.out")
                break
        if out is None:
            log.warning("%s: no success response schema, output taken as an empty record", name)
            out = RecordT()
        try:
            return FunType(RecordT.of(fields), out)
        except ValueError as exc:
            raise SpecError(f"{name}: {exc}") from None


def load_spec(doc: dict | str | Path) -> Library:
    """Build a syntactic library from a spec document (parsed JSON or a path)."""
    if not isinstance(doc, dict):
        doc = read_json(doc)
    if "openapi" in doc or "swagger" in doc or "paths" in doc:
        lib = _OpenApi(doc).load()
    else:
        lib = _load_dialect(doc)
    lib.validate()
    return lib


# -- witnesses -----------------------------------------------------------------


@dataclass(frozen=True)
class Witness:
    method: str
    inp: dict[str, Value]
    out: Value

    @property
    def key(self) -> tuple[str, str, str]:
        return (self.method, value_key(self.inp), value_key(self.out))

    @property
    def labels(self) -> frozenset[str]:
        return frozenset(self.inp)

    def to_json(self) -> dict:
        return {"method": self.method, "in": self.inp, "out": self.out}

    def __hash__(self) -> int:
        return hash(self.key)

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Witness) and self.key == other.key


@dataclass
class WitnessStore:
    """Ordered witnesses with lookup indices by method, by argument-label
    set and by exact input."""

    items: list[Witness] = field(default_factory=list)
    by_method: dict[str, list[int]] = field(default_factory=dict, repr=False)
    by_labels: dict[tuple[str, frozenset[str]], list[int]] = field(default_factory=dict, repr=False)
    by_input: dict[tuple[str, str], list[int]] = field(default_factory=dict, repr=False)
    keys: set[tuple[str, str, str]] = field(default_factory=set, repr=False)

    def __post_init__(self) -> None:
        items, self.items = self.items, []
        for w in items:
            self.append(w)

    def append(self, w: Witness) -> None:
        i = len(self.items)
        self.items.append(w)
        self.by_method.setdefault(w.method, []).append(i)
        self.by_labels.setdefault((w.method, w.labels), []).append(i)
        self.by_input.setdefault((w.method, value_key(w.inp)), []).append(i)
        self.keys.add(w.key)

    def add(self, w: Witness) -> bool:
        """Append unless an identical witness is present."""
        if w.key in self.keys:
            return False
        self.append(w)
        return True

    def __contains__(self, w: Witness) -> bool:
        return w.key in self.keys

    def __iter__(self) -> Iterator[Witness]:
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)

    def for_method(self, method: str) -> list[Witness]:
        return [self.items[i] for i in self.by_method.get(method, [])]

    def exact(self, method: str, inp: dict[str, Value]) -> list[Witness]:
        return [self.items[i] for i in self.by_input.get((method, value_key(inp)), [])]

    def same_labels(self, method: str, labels: Iterable[str]) -> list[Witness]:
        return [self.items[i] for i in self.by_labels.get((method, frozenset(labels)), [])]

    def copy(self) -> WitnessStore:
        return WitnessStore(list(self.items))

    def to_json(self) -> list[dict]:
        return [w.to_json() for w in self.items]


def normalize_value(v: Any) -> Value:
    """Map raw JSON onto the value language: scalars become strings and
    null-valued object fields are dropped (treated as absent)."""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float)):
        return str(v)
    if isinstance(v, list):
        return [normalize_value(x) for x in v if x is not None]
    if isinstance(v, dict):
        return {k: normalize_value(x) for k, x in v.items() if x is not None}
    return v


def parse_witnesses(records: Any, lib: Library | None = None) -> WitnessStore:
    if not isinstance(records, list):
        raise LibraryError("witness file must hold a JSON array")
    store = WitnessStore()
    for n, r in enumerate(records):
        if not isinstance(r, dict) or set(r) != {"method", "in", "out"}:
            raise LibraryError(f"witness #{n}: expected keys method/in/out")
        if lib is not None and r["method"] not in lib.methods:
            raise LibraryError(f"witness #{n}: unknown method {r['method']!r}")
        if not isinstance(r["in"], dict):
            raise LibraryError(f"witness #{n}: input is not an object")
        inp, out = normalize_value(r["in"]), normalize_value(r["out"])
        check_value(inp)
        check_value(out)
        store.append(Witness(r["method"], inp, out))
    return store


def load_witnesses(path: str | Path, lib: Library | None = None) -> WitnessStore:
    return parse_witnesses(read_json(path), lib)


def dump_witnesses(store: WitnessStore) -> str:
    return json.dumps(store.to_json(), indent=2, ensure_ascii=False) + "\n"


def save_witnesses(store: WitnessStore, path: str | Path) -> None:
    Path(path).write_text(dump_witnesses(store), encoding="utf-8")
