from __future__ import annotations

from importlib import resources
from pathlib import Path

import pytest

from restsynth.core.types import ArrayT, Query
from restsynth.ingest import load_spec, load_witnesses
from restsynth.mining import mine_types
from restsynth.testgen import WitnessSimulator, analyze_api, load_annotations

DATA = Path(str(resources.files("restsynth") / "data" / "slack"))

SLACK_SOLUTION = r"""
\channel_name -> {
  c <- conversations_list()
  if c.name == channel_name
  uid <- conversations_members(channel=c.id)
  let u = users_info(user=uid)
  return u.profile.email
}
"""

# creator's email instead of all members' emails
CREATOR_DISTRACTOR = r"""
\channel_name -> {
  c <- conversations_list()
  if c.name == channel_name
  let uid = c.creator
  let u = users_info(user=uid)
  return u.profile.email
}
"""

# channels from the direct-message opener, called without arguments
OPEN_DISTRACTOR = r"""
\channel_name -> {
  let c = conversations_open()
  if c.name == channel_name
  let u = users_info(user=c.creator)
  return u.profile.email
}
"""


@pytest.fixture(scope="session")
def lib():
    return load_spec(DATA / "spec.json")


@pytest.fixture(scope="session")
def fig_store(lib):
    return load_witnesses(DATA / "witnesses_fig.json", lib)


@pytest.fixture(scope="session")
def fig_sem(lib, fig_store):
    return mine_types(lib, fig_store)


@pytest.fixture(scope="session")
def service_store(lib):
    return load_witnesses(DATA / "service.json", lib)


@pytest.fixture(scope="session")
def annotations(lib):
    return load_annotations(DATA / "annotations.json", lib)


@pytest.fixture(scope="session")
def w0(lib):
    return load_witnesses(DATA / "w0.json", lib)


@pytest.fixture(scope="session")
def analysis(lib, w0, service_store, annotations):
    return analyze_api(lib, w0, WitnessSimulator(service_store, seed=7), budget=3, seed=7, annotations=annotations)


@pytest.fixture(scope="session")
def sem(analysis):
    return analysis.semlib


def email_query(sem) -> Query:
    return Query((("channel_name", sem.resolve_text("Channel.name")),), ArrayT(sem.resolve_text("Profile.email")))


@pytest.fixture(scope="session")
def query(sem):
    return email_query(sem)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
