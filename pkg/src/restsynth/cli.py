"""Command line entry point: ``analyze`` mines types and generates tests,
``synth`` answers type queries."""

from __future__ import annotations

import argparse
import json
import logging
import shutil
import sys
from importlib import resources
from pathlib import Path

from .core.library import LibraryError
from .ingest import load_spec, load_witnesses, save_witnesses
from .mining import bank_to_json, mine_types, semlib_to_json
from .query import parse_query
from .ranking import DEFAULT_ROUNDS, Ranker, render_ranked
from .synth import DEFAULT_MAX_LEN, DEFAULT_TIMEOUT, SynthStats, synthesize
from .testgen import DEFAULT_MAX_OPTIONAL, WitnessSimulator, analyze_api, load_annotations
from .ttn.net import build_ttn

EXIT_OK, EXIT_USAGE, EXIT_INPUT = 0, 2, 3

log = logging.getLogger("restsynth")


def _write_json(path: str, data) -> None:
    Path(path).write_text(json.dumps(data, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def cmd_analyze(args: argparse.Namespace) -> int:
    lib = load_spec(args.spec)
    w0 = load_witnesses(args.witnesses, lib)
    service_store = load_witnesses(args.service, lib) if args.service else w0
    annotations = load_annotations(args.annotations, lib) if args.annotations else None
    service = WitnessSimulator(service_store, seed=args.seed)
    res = analyze_api(lib, w0, service, args.rounds, args.seed, args.max_optional, annotations)
    _write_json(args.out_lib, semlib_to_json(res.semlib))
    save_witnesses(res.witnesses, args.out_witnesses)
    if args.out_bank:
        _write_json(args.out_bank, bank_to_json(res.semlib))
    state = "fixpoint" if res.fixpoint else "budget exhausted"
    print(f"rounds: {res.rounds} ({state})")
    print(f"witnesses: {len(w0)} -> {len(res.witnesses)}")
    print(f"merged groups: {sum(1 for p in res.history[-1] if len(p) > 1)}")
    return EXIT_OK


def cmd_synth(args: argparse.Namespace) -> int:
    lib = load_spec(args.spec)
    store = load_witnesses(args.witnesses, lib)
    sem = mine_types(lib, store)
    query = parse_query(args.query, sem)
    if args.dot:
        Path(args.dot).write_text(build_ttn(sem).to_dot(), encoding="utf-8")
    stats = SynthStats()
    progs = synthesize(sem, query, max_len=args.max_len, timeout=args.timeout, stats=stats)
    ranker = Ranker(sem, store, query, args.rounds, args.seed)
    for p in progs:
        ranker.add(p)
    cands = ranker.snapshot()
    if args.no_rank:
        cands.sort(key=lambda c: c.original_rank)
    print(f"query: {query}")
    print(f"candidates: {len(cands)}")
    if stats.timed_out:
        print("search stopped at the timeout")
    print()
    sys.stdout.write(render_ranked(cands[: args.top], ranked=not args.no_rank))
    log.info("paths %d, programs %d, ill-typed %d, duplicates %d", stats.paths, stats.anf, stats.ill_typed, stats.duplicates)
    return EXIT_OK


def cmd_fixture(args: argparse.Namespace) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    src = resources.files("restsynth") / "data" / "slack"
    for f in sorted(src.iterdir(), key=lambda p: p.name):
        if f.name.endswith(".json"):
            with resources.as_file(f) as p:
                shutil.copy(p, out / f.name)
                print(out / f.name)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="restsynth", description="Type-directed synthesis of REST API compositions.")
    ap.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = ap.add_subparsers(dest="cmd", required=True)

    a = sub.add_parser("analyze", help="mine semantic types and generate tests from witnesses")
    a.add_argument("--spec", required=True, help="OpenAPI or fixture-dialect spec (JSON)")
    a.add_argument("--witnesses", required=True, help="initial witnesses (JSON array)")
    a.add_argument("--service", help="witnesses replayed as the service under test (default: --witnesses)")
    a.add_argument("--annotations", help="argument annotations (JSON)")
    a.add_argument("--rounds", type=int, default=3, help="test generation budget (default: 3)")
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--max-optional", type=int, default=DEFAULT_MAX_OPTIONAL)
    a.add_argument("--out-lib", required=True, help="where to write the semantic library")
    a.add_argument("--out-witnesses", required=True, help="where to write the augmented witnesses")
    a.add_argument("--out-bank", help="where to write the value bank")
    a.set_defaults(func=cmd_analyze)

    s = sub.add_parser("synth", help="synthesize programs for a type query")
    s.add_argument("--spec", required=True)
    s.add_argument("--witnesses", required=True, help="witnesses, typically the output of analyze")
    s.add_argument("--query", required=True, help='e.g. "Channel.name -> [Profile.email]"')
    s.add_argument("--top", type=int, default=10)
    s.add_argument("--timeout", type=float, default=DEFAULT_TIMEOUT, help="seconds (default: 150)")
    s.add_argument("--rounds", type=int, default=DEFAULT_ROUNDS, help="executions per candidate (default: 15)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--max-len", type=int, default=DEFAULT_MAX_LEN)
    s.add_argument("--no-rank", action="store_true", help="print candidates in generation order")
    s.add_argument("--dot", help="write the type-transition net as DOT to this file")
    s.set_defaults(func=cmd_synth)

    f = sub.add_parser("fixture", help="copy the bundled Slack fixture to a directory")
    f.add_argument("--out", required=True)
    f.set_defaults(func=cmd_fixture)
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    lows = {"analyze": {"rounds": 0, "max_optional": 0}, "synth": {"rounds": 1, "top": 1, "max_len": 1}}
    for name, low in lows.get(args.cmd, {}).items():
        if getattr(args, name) < low:
            ap.error(f"--{name.replace('_', '-')} must be at least {low}")
    try:
        return args.func(args)
    except (OSError, ValueError, LibraryError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
