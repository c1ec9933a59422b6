from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CREATOR_DISTRACTOR, SLACK_SOLUTION, email_query
from restsynth.core import (
    ELEM,
    IN,
    OUT,
    ArrayT,
    Bind,
    Call,
    Field,
    Guard,
    Let,
    Location,
    LocSet,
    MalformedProgram,
    ObjRef,
    ParseError,
    Program,
    Proj,
    Query,
    RecordT,
    Return,
    Var,
    downgrade,
    parse_program,
    render_program,
    size,
    typecheck,
)
from restsynth.core.terms import alpha_equivalent, alpha_normalize, check_well_formed
from restsynth.core.types import array_depth

EMAIL = LocSet.of(Location("Profile", ("email",)))


def test_downgrade_examples():
    assert downgrade(ArrayT(ArrayT(EMAIL))) == EMAIL
    assert downgrade(ObjRef("User")) == ObjRef("User")
    uid = LocSet.of(Location("User", ("id",)))
    assert downgrade(ArrayT(uid)) == uid


@given(st.integers(0, 6))
def test_downgrade_strips_every_array(depth):
    t = EMAIL
    for _ in range(depth):
        t = ArrayT(t)
    assert array_depth(t) == depth
    assert downgrade(t) == EMAIL
    assert downgrade(downgrade(t)) == downgrade(t)


def test_location_invariants():
    with pytest.raises(ValueError):
        Location("users_info", (), method=True)
    loc = Location("users_info", (IN, "user"), method=True)
    assert str(loc) == "users_info.in.user"
    # a spec field literally called "in" is a different label
    assert Location("X", ("in",)) != Location("X", (IN,))
    assert str(Location("m", (OUT, ELEM), True)) == "m.out.0"


def test_locset_is_a_set():
    a, b = Location("User", ("id",)), Location("Channel", ("creator",))
    assert LocSet.of(a, b) == LocSet.of(b, a, a)
    assert LocSet.of(a, b).name == "Channel.creator"
    with pytest.raises(ValueError):
        LocSet(frozenset())


def test_record_labels_unique():
    with pytest.raises(ValueError):
        RecordT.of([Field("a", EMAIL), Field("a", EMAIL)])


def test_size_counts_call_arguments():
    assert size(parse_program(SLACK_SOLUTION)) == 19
    assert size(parse_program(r"\x -> { x }")) == 1
    assert size(parse_program(r"\x -> { f(a=x, b=x) }")) == 5


def test_render_slack_solution():
    text = render_program(parse_program(SLACK_SOLUTION))
    lines = [ln.strip() for ln in text.splitlines()]
    assert lines == [
        "\\channel_name -> {",
        "c <- conversations_list()",
        "if c.name == channel_name",
        "uid <- conversations_members(channel=c.id)",
        "let u = users_info(user=uid)",
        "return u.profile.email",
        "}",
    ]


def test_render_trivial():
    assert render_program(Program(("x",), Var("x"))) == "\\x -> { x }"


def test_parse_error_position():
    with pytest.raises(ParseError) as ei:
        parse_program("\\x -> {\n  let y = \n}")
    assert ei.value.line == 3
    with pytest.raises(ParseError) as ei:
        parse_program("\\x -> { x ! }")
    assert (ei.value.line, ei.value.col) == (1, 11)


def test_parse_accepts_semicolons_and_comments():
    a = parse_program("\\p -> { let y = p.a; # note\n return y }")
    b = parse_program("\\p -> {\n  let y = p.a\n  return y\n}")
    assert a == b


def test_keyword_and_odd_names_are_quoted():
    prog = Program(("return",), Call("users.profile.get", (("let", Var("return")),)))
    text = render_program(prog)
    assert "`return`" in text and "`let`" in text
    assert parse_program(text) == prog
    odd = Program(("p",), Call("/users/{id}_GET", (("id", Proj(Var("p"), "if")),)))
    assert parse_program(render_program(odd)) == odd


# -- random programs ---------------------------------------------------------------

LABELS = ["id", "name", "email", "in", "let", "user-id", "a b"]
METHODS = ["f", "users_info", "users.profile.get", "if.then", "/a/{b}_GET"]


@st.composite
def programs(draw):
    params = tuple(draw(st.lists(st.sampled_from(["p", "q", "channel_name", "r"]), min_size=0, max_size=3, unique=True)))
    counter = [0]

    def fresh() -> str:
        counter[0] += 1
        return f"v{counter[0]}"

    def atom(scope, depth):
        if not scope:
            return Call(draw(st.sampled_from(METHODS)), ())
        choice = draw(st.integers(0, 3 if depth < 3 else 1))
        if choice == 0:
            return Var(draw(st.sampled_from(sorted(scope))))
        if choice == 1:
            return Proj(atom(scope, depth + 1), draw(st.sampled_from(LABELS)))
        if choice == 2:
            labels = draw(st.lists(st.sampled_from(LABELS), max_size=3, unique=True))
            return Call(draw(st.sampled_from(METHODS)), tuple((lb, atom(scope, depth + 1)) for lb in labels))
        return Return(atom(scope, depth + 1))

    def expr(scope, depth):
        kind = draw(st.integers(0, 4 if depth < 6 else 0))
        if kind == 0:
            return atom(scope, 0)
        if kind == 1:
            x = fresh()
            return Let(x, expr(scope, depth + 1), expr(scope | {x}, depth + 1))
        if kind == 2:
            x = fresh()
            return Bind(x, atom(scope, 0), expr(scope | {x}, depth + 1))
        if kind == 3:
            return Guard(atom(scope, 0), atom(scope, 0), expr(scope, depth + 1))
        return Return(expr(scope, depth + 1))

    return Program(params, expr(frozenset(params), 0))


@settings(max_examples=1000, deadline=None)
@given(programs())
def test_render_parse_round_trip(prog):
    check_well_formed(prog)
    assert parse_program(render_program(prog)) == prog


@settings(max_examples=200, deadline=None)
@given(programs())
def test_alpha_normalize_is_canonical(prog):
    norm = alpha_normalize(prog)
    assert alpha_normalize(norm) == norm
    renamed = alpha_normalize(Program(prog.params, norm.body))
    assert alpha_equivalent(prog, renamed)
    assert size(norm) == size(prog)


def test_alpha_equivalence_ignores_binder_names():
    a = parse_program(SLACK_SOLUTION)
    b = parse_program(SLACK_SOLUTION.replace("uid", "member").replace("u ", "usr ").replace("u.", "usr."))
    assert a != b and alpha_equivalent(a, b)
    assert not alpha_equivalent(a, parse_program(CREATOR_DISTRACTOR))


def test_well_formedness():
    with pytest.raises(MalformedProgram):
        check_well_formed(parse_program("\\x -> { y }"))
    with pytest.raises(MalformedProgram):
        check_well_formed(parse_program("\\x -> { let y = x; let y = x; y }"))


# -- typing --------------------------------------------------------------------------

LEFT_ANF = r"""
\channel_name -> {
  let x1 = conversations_list()
  let x2 = x1.name
  if x2 == channel_name
  let x3 = x1.id
  let x4 = conversations_members(channel=x3)
  let x5 = users_info(user=x4)
  let x6 = x5.profile
  let x7 = x6.email
  x7
}
"""


def test_typecheck_slack_solution(fig_sem):
    q = email_query(fig_sem)
    res = typecheck(fig_sem, parse_program(SLACK_SOLUTION), q)
    assert res, res.reason
    assert res.bindings["uid"] == fig_sem.resolve_text("User.id")
    assert res.bindings["c"] == ObjRef("Channel")


def test_typecheck_return_var(fig_sem):
    for ls in sorted(fig_sem.locsets(), key=str):
        assert typecheck(fig_sem, parse_program("\\x -> { return x }"), Query((("x", ls),), ArrayT(ls)))


def test_array_oblivious_program_is_ill_typed(fig_sem):
    res = typecheck(fig_sem, parse_program(LEFT_ANF), email_query(fig_sem))
    assert not res
    assert "name" in res.reason


def test_typecheck_rules(fig_sem):
    q = email_query(fig_sem)
    bad = {
        # missing required argument
        "\\channel_name -> { c <- conversations_list(); u <- conversations_members(); return channel_name }": "missing",
        # guard between different loc-sets
        "\\channel_name -> { c <- conversations_list(); if c.id == channel_name; return channel_name }": "guard",
        # bind over a non-array
        "\\channel_name -> { c <- conversations_list(); n <- c.name; return n }": "not an array",
        # unknown argument label
        "\\channel_name -> { c <- conversations_list(bogus=channel_name); return channel_name }": "no argument",
    }
    for text, why in bad.items():
        res = typecheck(fig_sem, parse_program(text), q)
        assert not res and why in res.reason, (text, res.reason)
    # parameter names must match the query labels
    assert not typecheck(fig_sem, parse_program("\\other -> { return other }"), q)
    with pytest.raises(MalformedProgram):
        typecheck(fig_sem, parse_program("\\channel_name -> { return nope }"), q)


def test_object_unfolding_is_transparent(fig_sem):
    user_rec = fig_sem.objects["User"]
    prog = parse_program("\\u -> { return u.profile.email }")
    email = fig_sem.resolve_text("Profile.email")
    assert typecheck(fig_sem, prog, Query((("u", ObjRef("User")),), ArrayT(email)))
    assert typecheck(fig_sem, prog, Query((("u", user_rec),), ArrayT(email)))
    ident = parse_program("\\u -> { return u }")
    assert typecheck(fig_sem, ident, Query((("u", ObjRef("User")),), ArrayT(user_rec)))
