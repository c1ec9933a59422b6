from __future__ import annotations

import pytest

from restsynth.core import ArrayT, ObjRef, Query
from restsynth.query import QueryError, UnknownType, default_label, parse_query


def test_single_argument_sugar(sem):
    q = parse_query("Channel.name -> [Profile.email]", sem)
    assert q == Query((("channel_name", sem.resolve_text("Channel.name")),), ArrayT(sem.resolve_text("Profile.email")))


def test_record_arguments(sem):
    q = parse_query("{c: Channel.id, u: User} -> [[User.name]]", sem)
    assert q.args == (("c", sem.resolve_text("Channel.id")), ("u", ObjRef("User")))
    assert q.out == ArrayT(ArrayT(sem.resolve_text("User.name")))
    assert parse_query("{} -> [Channel]", sem) == Query((), ArrayT(ObjRef("Channel")))


def test_any_location_of_a_group(sem):
    a = parse_query("Channel.creator -> User", sem)
    b = parse_query("users_info.in.user -> User", sem)
    assert a.args[0][1] == b.args[0][1] == sem.resolve_text("User.id")
    assert b.args[0][0] == "users_info_user"


def test_default_labels():
    assert default_label("Channel.name") == "channel_name"
    assert default_label("User") == "user"


def test_unknown_name_suggests(sem):
    with pytest.raises(UnknownType) as ei:
        parse_query("Channel.nam -> [Profile.email]", sem)
    assert "Channel.name" in ei.value.suggestions
    assert "did you mean" in str(ei.value)


@pytest.mark.parametrize(
    "text",
    ["Channel.name", "Channel.name -> ", "{a: Channel.name -> User", "{a: User, a: User} -> User",
     "Channel.name -> User extra", "Channel.name -> [User", "Channel.name ~> User"],
)
def test_malformed(sem, text):
    with pytest.raises(QueryError):
        parse_query(text, sem)
