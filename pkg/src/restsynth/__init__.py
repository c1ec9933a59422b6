"""Type-directed synthesis of REST API compositions."""

from .core import Program, Query, SemanticLibrary, parse_program, render_program, typecheck
from .ingest import load_spec, load_witnesses
from .mining import mine_types
from .query import parse_query
from .ranking import Ranker, cost
from .retro import ExecResult, execute
from .synth import synthesize, synthesize_ranked
from .testgen import WitnessSimulator, analyze_api

__all__ = [
    "ExecResult", "Program", "Query", "Ranker", "SemanticLibrary", "WitnessSimulator", "analyze_api",
    "cost", "execute", "load_spec", "load_witnesses", "mine_types", "parse_program", "parse_query",
    "render_program", "synthesize", "synthesize_ranked", "typecheck",
]
