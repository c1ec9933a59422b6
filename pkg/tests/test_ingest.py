from __future__ import annotations

import json

import pytest
from hypothesis import given, settings, strategies as st

from conftest import DATA
from restsynth.core import ArrayT, Field, FunType, LibraryError, ObjRef, RecordT, StringT
from restsynth.ingest import (
    SpecError,
    Witness,
    WitnessStore,
    dump_witnesses,
    load_spec,
    load_witnesses,
    normalize_value,
    parse_witnesses,
    read_json,
    save_witnesses,
)

S = StringT()


def test_fixture_library(lib):
    assert lib.methods["conversations_list"] == FunType(RecordT(), ArrayT(ObjRef("Channel")))
    assert lib.methods["users_info"] == FunType(RecordT.of([Field("user", S)]), ObjRef("User"))
    assert lib.methods["conversations_members"] == FunType(RecordT.of([Field("channel", S)]), ArrayT(S))
    assert lib.methods["users_profile_get"] == FunType(RecordT.of([Field("user", S)]), ObjRef("Profile"))
    opened = lib.methods["conversations_open"].inp
    assert [f.optional for f in opened.fields] == [True, True]
    assert lib.objects["User"].get("profile").type == ObjRef("Profile")


def test_openapi_and_dialect_agree(lib):
    assert load_spec(DATA / "spec_openapi.json") == lib


def test_empty_document():
    lib = load_spec({})
    assert lib.objects == {} and lib.methods == {}
    assert load_spec({"openapi": "3.0.0", "paths": {}}).methods == {}


def test_dangling_reference():
    with pytest.raises(LibraryError):
        load_spec({"objects": {"A": {"b": "B"}}, "methods": {}})
    with pytest.raises(SpecError):
        load_spec({"openapi": "3.0.0", "paths": {"/x": {"get": {"responses": {"200": {"schema": {"$ref": "#/definitions/Nope"}}}}}}})


def test_duplicate_method_name(tmp_path):
    op = {"operationId": "same", "responses": {"200": {"schema": {"type": "string"}}}}
    with pytest.raises(SpecError):
        load_spec({"swagger": "2.0", "paths": {"/a": {"get": op}, "/b": {"get": op}}})
    p = tmp_path / "dup.json"
    p.write_text('{"objects": {}, "methods": {"m": {"out": "String"}, "m": {"out": "String"}}}')
    with pytest.raises(ValueError):
        load_spec(p)


def test_non_record_input():
    with pytest.raises(SpecError):
        load_spec({"methods": {"m": {"in": "String", "out": "String"}}})


def test_openapi_parameters_and_numeric_tags():
    doc = {
        "swagger": "2.0",
        "definitions": {"Thing": {"type": "object", "required": ["id"], "properties": {"id": {"type": "integer"}, "tag": {"type": "string"}}}},
        "paths": {
            "/things": {
                "get": {
                    "parameters": [{"name": "limit", "in": "query", "type": "integer"}, {"name": "q", "in": "query", "required": True, "type": "string"}],
                    "responses": {"200": {"schema": {"type": "array", "items": {"$ref": "#/definitions/Thing"}}}},
                }
            }
        },
    }
    lib = load_spec(doc)
    ft = lib.methods["/things_GET"]
    assert ft.out == ArrayT(ObjRef("Thing"))
    assert ft.inp.get("limit").optional and not ft.inp.get("q").optional
    assert ft.inp.get("limit").type == StringT("integer")
    thing = lib.objects["Thing"]
    assert not thing.get("id").optional and thing.get("tag").optional


def test_witness_errors(lib):
    with pytest.raises(LibraryError):
        parse_witnesses([{"method": "nope", "in": {}, "out": "x"}], lib)
    with pytest.raises(LibraryError):
        parse_witnesses([{"method": "users_info", "in": "x", "out": "x"}], lib)
    with pytest.raises(LibraryError):
        parse_witnesses([{"method": "users_info", "in": {}}], lib)
    with pytest.raises(LibraryError):
        parse_witnesses({"method": "users_info"}, lib)


def test_normalize_value():
    assert normalize_value({"a": 1, "b": True, "c": None, "d": [1.5, None]}) == {"a": "1", "b": "true", "d": ["1.5"]}


def test_store_indices(fig_store):
    assert len(fig_store) == 3
    assert [w.method for w in fig_store.for_method("users_info")] == ["users_info"]
    hit = fig_store.exact("users_info", {"user": "UJ5RHEG4S"})
    assert len(hit) == 1 and hit[0].out["name"] == "peter"
    assert fig_store.exact("users_info", {"user": "nobody"}) == []
    assert len(fig_store.same_labels("users_info", {"user": "nobody"})) == 1
    assert fig_store.same_labels("users_info", {}) == []


def test_store_dedup():
    store = WitnessStore()
    w = Witness("m", {"a": "1"}, ["x"])
    assert store.add(w)
    assert not store.add(Witness("m", {"a": "1"}, ["x"]))
    assert store.add(Witness("m", {"a": "1"}, ["y"]))
    assert len(store) == 2


def test_fixture_round_trip(tmp_path, service_store, lib):
    p = tmp_path / "w.json"
    save_witnesses(service_store, p)
    again = load_witnesses(p, lib)
    assert [w.key for w in again] == [w.key for w in service_store]
    assert p.read_text(encoding="utf-8") == dump_witnesses(again)


values = st.recursive(
    st.text(max_size=6),
    lambda inner: st.lists(inner, max_size=3) | st.dictionaries(st.text(max_size=4), inner, max_size=3),
    max_leaves=10,
)


@settings(max_examples=200, deadline=None)
@given(st.lists(st.tuples(st.sampled_from(["a", "b.c", "d"]), st.dictionaries(st.text(max_size=4), values, max_size=3), values), max_size=6))
def test_witness_round_trip(records):
    store = WitnessStore()
    for m, i, o in records:
        store.append(Witness(m, i, o))
    text = dump_witnesses(store)
    again = parse_witnesses(json.loads(text))
    assert [w.key for w in again] == [w.key for w in store]
    assert [w.inp for w in again] == [w.inp for w in store]
    assert dump_witnesses(again) == text


def test_read_json_rejects_duplicate_keys(tmp_path):
    p = tmp_path / "d.json"
    p.write_text('{"a": 1, "a": 2}')
    with pytest.raises(ValueError):
        read_json(p)
