"""Test generation against a service and the analysis fixpoint loop."""

from __future__ import annotations

import hashlib
import itertools
import logging
import random
from dataclasses import dataclass, field
from typing import Iterator, Protocol

from .core.library import Library, LibraryError, SemanticLibrary, Value, value_key
from .core.types import Type
from .ingest import Witness, WitnessStore, read_json
from .mining import mine_types, partition_of

log = logging.getLogger(__name__)

DEFAULT_MAX_OPTIONAL = 2
DEFAULT_BATCH = 4
_RESAMPLE = 8


class Service(Protocol):
    def call(self, method: str, inp: dict[str, Value]) -> Value | None:
        """Response value, or ``None`` when the call fails."""


def _digest_seed(*parts: object) -> int:
    h = hashlib.sha256("\x1f".join(map(str, parts)).encode()).digest()
    return int.from_bytes(h[:8], "little")


@dataclass
class WitnessSimulator:
    """Replays a recorded store: exact input match first, then a seeded
    choice among calls with the same argument labels, else failure.
    The choice depends only on (seed, method, input), so replays agree."""

    store: WitnessStore
    seed: int = 0
    calls: int = 0

    def call(self, method: str, inp: dict[str, Value]) -> Value | None:
        self.calls += 1
        exact = self.store.exact(method, inp)
        pool = exact or self.store.same_labels(method, inp)
        if not pool:
            return None
        rng = random.Random(_digest_seed(self.seed, method, value_key(inp)))
        return rng.choice(pool).out


@dataclass
class FailingService:
    calls: int = 0

    def call(self, method: str, inp: dict[str, Value]) -> None:
        self.calls += 1
        return None


Annotations = dict[str, dict[str, str]]


def load_annotations(path, lib: Library) -> Annotations:
    data = read_json(path)
    if not isinstance(data, dict):
        raise LibraryError("annotations must be a JSON object")
    for m, args in data.items():
        ft = lib.methods.get(m)
        if ft is None:
            raise LibraryError(f"annotation for unknown method {m!r}")
        for lb, loc in args.items():
            if ft.inp.get(lb) is None:
                raise LibraryError(f"annotation {m}.{lb}: no such argument")
            lib.parse_location(loc)
    return data


@dataclass
class GenReport:
    calls: int = 0
    failures: int = 0
    skipped: int = 0
    failed_inputs: set[tuple[str, str]] = field(default_factory=set)


def _arg_type(sem: SemanticLibrary, method: str, label: str, annotations: Annotations) -> Type:
    text = annotations.get(method, {}).get(label)
    if text is not None:
        return sem.resolve_text(text)
    f = sem.methods[method].inp.get(label)
    assert f is not None
    return f.type


def generate_tests(
    sem: SemanticLibrary,
    service: Service,
    seed: int = 0,
    max_optional: int = DEFAULT_MAX_OPTIONAL,
    annotations: Annotations | None = None,
    known: WitnessStore | None = None,
    batch: int = DEFAULT_BATCH,
    report: GenReport | None = None,
) -> Iterator[Witness]:
    """Call every method on inputs drawn from the value bank, for each
    subset of optional arguments up to ``max_optional``, yielding the
    successful calls. Inputs already present in ``known`` or that failed
    earlier are avoided when the bank offers alternatives."""
    annotations = annotations or {}
    report = report if report is not None else GenReport()
    rng = random.Random(seed)
    for method in sorted(sem.methods):
        ft = sem.methods[method]
        required = [f.label for f in ft.inp.required()]
        optional = [f.label for f in ft.inp.optional()]
        for k in range(min(max_optional, len(optional)) + 1):
            for subset in itertools.combinations(optional, k):
                labels = sorted(required + list(subset))
                pools = {lb: sem.bank_values(_arg_type(sem, method, lb, annotations)) for lb in labels}
                if any(not pools[lb] for lb in labels):
                    report.skipped += 1
                    continue
                tried: set[str] = set()
                for _ in range(batch):
                    inp = None
                    for _attempt in range(_RESAMPLE):
                        cand = {lb: rng.choice(pools[lb]) for lb in labels}
                        key = value_key(cand)
                        if key in tried:
                            continue
                        inp = cand
                        stale = (method, key) in report.failed_inputs or (
                            known is not None and known.exact(method, cand)
                        )
                        if not stale:
                            break
                    if inp is None:
                        break
                    key = value_key(inp)
                    tried.add(key)
                    report.calls += 1
                    out = service.call(method, inp)
                    if out is None:
                        report.failures += 1
                        report.failed_inputs.add((method, key))
                        continue
                    yield Witness(method, inp, out)


@dataclass
class AnalysisResult:
    semlib: SemanticLibrary
    witnesses: WitnessStore
    rounds: int
    fixpoint: bool
    history: list[set] = field(default_factory=list)  # partition after each mining
    report: GenReport = field(default_factory=GenReport)


def _signatures(sem: SemanticLibrary):
    return (sem.objects, sem.methods)


def analyze_api(
    lib: Library,
    w0: WitnessStore,
    service: Service,
    budget: int = 3,
    seed: int = 0,
    max_optional: int = DEFAULT_MAX_OPTIONAL,
    annotations: Annotations | None = None,
) -> AnalysisResult:
    """Alternate mining and test generation until a round adds no witness
    and leaves every signature unchanged, or ``budget`` rounds elapse."""
    store = w0.copy()
    sem = mine_types(lib, store)
    history = [partition_of(sem)]
    report = GenReport()
    rounds = 0
    fixpoint = False
    while rounds < budget:
        rounds += 1
        added = 0
        for w in generate_tests(sem, service, seed + rounds, max_optional, annotations, store, report=report):
            added += store.add(w)
        new = mine_types(lib, store)
        history.append(partition_of(new))
        changed = _signatures(new) != _signatures(sem)
        sem = new
        log.info("round %d: %d new witnesses, signatures %s", rounds, added, "changed" if changed else "stable")
        if not added and not changed:
            fixpoint = True
            break
    return AnalysisResult(sem, store, rounds, fixpoint, history, report)
