from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from conftest import CREATOR_DISTRACTOR, OPEN_DISTRACTOR, SLACK_SOLUTION, email_query
from restsynth.core import ArrayT, parse_program, size
from restsynth.retro import NO_WITNESS, ExecResult
from restsynth.ranking import Ranker, Weights, cost, penalties, render_ranked

W = Weights()
OK = ExecResult.success
FAIL = ExecResult.fail(NO_WITNESS)
# a program of seven AST nodes
SEVEN = parse_program(r"\p -> { x <- f(a=p); return x.id }")


def test_size_of_seven():
    assert size(SEVEN) == 7


@pytest.fixture
def arr(fig_sem):
    return ArrayT(fig_sem.resolve_text("Profile.email"))


@pytest.fixture
def scalar(fig_sem):
    return fig_sem.resolve_text("Profile.email")


def test_all_failure(arr):
    assert penalties([FAIL, FAIL], arr) == {"failure": W.failure}
    assert cost(SEVEN, [FAIL] * 5, arr) == 7 + W.failure


def test_all_empty(arr):
    assert penalties([OK([]), OK([]), FAIL], arr) == {"empty": W.empty}


def test_singleton_against_array(arr):
    assert penalties([OK(["a"]), OK(["b"]), FAIL], arr) == {"multiplicity": W.multiplicity}
    assert penalties([OK(["a"]), OK(["b", "c"])], arr) == {}


def test_many_against_scalar(scalar):
    assert penalties([OK(["a"]), OK(["b", "c"])], scalar) == {"multiplicity": W.multiplicity}
    assert penalties([OK(["a"]), OK(["b"])], scalar) == {}


def test_clean_success_costs_size(arr):
    results = [OK(["a", "b"]), OK(["c", "d", "e"])]
    assert penalties(results, arr) == {}
    assert cost(SEVEN, results, arr) == 7


def test_partial_failure_is_not_penalised(arr):
    assert penalties([FAIL, OK(["a", "b"])], arr) == {}


def test_cost_needs_runs(arr):
    with pytest.raises(ValueError):
        cost(SEVEN, [], arr)


def test_custom_weights(arr):
    w = Weights(failure=5, empty=3, multiplicity=1)
    assert cost(SEVEN, [FAIL], arr, w) == 12
    assert cost(SEVEN, [OK(["x"])], arr, w) == 8


results_st = st.lists(
    st.one_of(
        st.just(FAIL),
        st.lists(st.sampled_from(["a", "b", "c"]), max_size=3).map(OK),
    ),
    min_size=1,
    max_size=8,
)


@settings(max_examples=300, deadline=None)
@given(results_st, st.booleans())
def test_cost_at_least_size(fig_sem, results, as_array):
    out = ArrayT(fig_sem.resolve_text("Profile.email")) if as_array else fig_sem.resolve_text("Profile.email")
    c = cost(SEVEN, results, out)
    fired = penalties(results, out)
    assert c >= size(SEVEN)
    assert (c == size(SEVEN)) == (not fired)


@settings(max_examples=300, deadline=None)
@given(results_st, results_st)
def test_more_runs_never_invent_failure(fig_sem, few, more):
    out = ArrayT(fig_sem.resolve_text("Profile.email"))
    if "failure" not in penalties(few, out):
        assert "failure" not in penalties(few + more, out)


def test_tie_break_by_arrival(analysis):
    sem, store = analysis.semlib, analysis.witnesses
    r = Ranker(sem, store, email_query(sem), rounds=3)
    prog = parse_program(SLACK_SOLUTION)
    a, b = r.add(prog), r.add(prog)
    assert a.cost == b.cost
    assert [c.original_rank for c in r.snapshot()] == [0, 1]
    assert r.position(1) == 2 and r.position(9) is None


def test_rounds_must_be_positive(analysis):
    with pytest.raises(ValueError):
        Ranker(analysis.semlib, analysis.witnesses, email_query(analysis.semlib), rounds=0)


@pytest.mark.parametrize("seed", range(10))
def test_gold_above_distractors(analysis, seed):
    sem, store = analysis.semlib, analysis.witnesses
    r = Ranker(sem, store, email_query(sem), seed=seed)
    creator = r.add(parse_program(CREATOR_DISTRACTOR))
    opened = r.add(parse_program(OPEN_DISTRACTOR))
    gold = r.add(parse_program(SLACK_SOLUTION))
    assert r.position(gold.original_rank) < r.position(creator.original_rank)
    assert r.position(gold.original_rank) < r.position(opened.original_rank)
    assert gold.cost == size(gold.program)
    assert creator.cost == size(creator.program) + W.multiplicity
    assert all(x.failure == NO_WITNESS for x in opened.results)
    assert opened.cost - gold.cost >= W.failure - (size(gold.program) - size(opened.program))


def test_rendering(analysis):
    sem = analysis.semlib
    r = Ranker(sem, analysis.witnesses, email_query(sem), rounds=2)
    r.add(parse_program(CREATOR_DISTRACTOR))
    r.add(parse_program(SLACK_SOLUTION))
    text = render_ranked(r.snapshot())
    assert text.startswith("#1 cost=19 original=1\n\\channel_name -> {")
    assert "\n\n#2 cost=" in text
    assert render_ranked([]) == ""
    assert render_ranked(r.snapshot(), ranked=False).startswith("#1 original=1")
