"""Path search timing: numba kernel against the numpy fallback.

Runs the fixture email query and a few wider queries on the analyzed Slack
fixture, checks that every backend reports the same paths and prints the
best wall time of each.

    python3 benchmarks/bench_search.py --max-len 8 --repeat 3
"""

from __future__ import annotations

import argparse
import time
from importlib import resources
from pathlib import Path

from restsynth.core.types import ArrayT, Query
from restsynth.ingest import load_spec, load_witnesses
from restsynth.testgen import WitnessSimulator, analyze_api, load_annotations
from restsynth.ttn import PathSearch, build_ttn, place_tokens
from restsynth.ttn._kernels import jit_enabled

QUERIES = [
    ("channel_name", "Channel.name", "Profile.email"),
    ("user_id", "User.id", "Profile.email"),
    ("email", "Profile.email", "User.name"),
]


def fixture_semlib():
    data = Path(str(resources.files("restsynth") / "data" / "slack"))
    lib = load_spec(data / "spec.json")
    w0 = load_witnesses(data / "w0.json", lib)
    service = WitnessSimulator(load_witnesses(data / "service.json", lib), seed=7)
    return analyze_api(lib, w0, service, 3, 7, annotations=load_annotations(data / "annotations.json", lib)).semlib


def run(search: PathSearch, init, final, max_len: int) -> list:
    return [(p.names, p.consumed) for p in search.paths(init, final, max_len)]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-len", type=int, default=8)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--python", action="store_true", help="also time the pure-python kernel")
    args = ap.parse_args()

    backends = ["numba", "numpy"] + (["python"] if args.python else [])
    if not jit_enabled():
        print("numba disabled (RESTSYNTH_DISABLE_JIT or not installed); timing numpy only")
        backends = [b for b in backends if b != "numba"]

    sem = fixture_semlib()
    net = build_ttn(sem)
    print(f"net: {len(net.places)} places, {len(net.transitions)} transitions, max_len={args.max_len}")
    if "numba" in backends:
        t0 = time.perf_counter()
        q = Query((("a", sem.resolve_text("Channel.name")),), ArrayT(sem.resolve_text("User.name")))
        run(PathSearch(net, backend="numba"), *place_tokens(net, q), 2)
        print(f"numba warm-up (compilation): {time.perf_counter() - t0:.2f}s")

    print(f"{'query':40s} {'paths':>7s} " + " ".join(f"{b:>9s}" for b in backends))
    for label, arg, out in QUERIES:
        q = Query(((label, sem.resolve_text(arg)),), ArrayT(sem.resolve_text(out)))
        init, final = place_tokens(net, q)
        times, results = {}, {}
        for b in backends:
            best = float("inf")
            for _ in range(args.repeat):
                search = PathSearch(net, backend=b)
                t0 = time.perf_counter()
                results[b] = run(search, init, final, args.max_len)
                best = min(best, time.perf_counter() - t0)
            times[b] = best
        ref = results[backends[0]]
        assert all(results[b] == ref for b in backends), "backends disagree"
        name = f"{arg} -> [{out}]"
        print(f"{name:40s} {len(ref):7d} " + " ".join(f"{times[b]:8.3f}s" for b in backends))


if __name__ == "__main__":
    main()
