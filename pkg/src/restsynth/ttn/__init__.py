"""Type-transition nets and path search."""

from .net import COPY, FILTER, METHOD, PROJ, TTN, Transition, UnknownPlace, build_ttn, marking_dict, place_tokens
from .search import Path, PathSearch, enumerate_paths, final_marking, replay_exact

__all__ = [
    "COPY", "FILTER", "METHOD", "PROJ", "TTN", "Path", "PathSearch", "Transition", "UnknownPlace",
    "build_ttn", "enumerate_paths", "final_marking", "marking_dict", "place_tokens", "replay_exact",
]
