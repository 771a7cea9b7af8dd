"""Corpus sweeps over heuristic proportions."""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from fractions import Fraction
from pathlib import Path

from .corpus import HEURISTICS, MANIFEST
from .engine import Budget
from .optimization import CLASSES, SWEEP_GRID, as_fraction, load_heuristic_base, select_heuristics
from .pipeline import load_problem, verify
from .solver import make_handle

EXPECTED = ("violated", "not-violated-within-budget")


@dataclass(frozen=True)
class CorpusEntry:
    id: str
    cls: str
    contract: Path
    property: Path
    snapshot: Path
    expected: str
    budget: dict = field(default_factory=dict, hash=False)

    @property
    def vulnerable(self) -> bool:
        return self.expected == "violated"


def load_manifest(path: str | Path = MANIFEST) -> list[CorpusEntry]:
    path = Path(path)
    data = json.loads(path.read_text())
    records = data["entries"] if isinstance(data, dict) else data
    out = []
    for r in records:
        if r["class"] not in CLASSES:
            raise ValueError(f"entry {r['id']}: unknown class {r['class']!r}")
        if r["expected"] not in EXPECTED:
            raise ValueError(f"entry {r['id']}: expected must be one of {EXPECTED}")
        base = path.parent
        out.append(
            CorpusEntry(
                r["id"],
                r["class"],
                base / r["contract"],
                base / r["property"],
                base / r["snapshot"],
                r["expected"],
                dict(r.get("budget", {})),
            )
        )
    return out


@dataclass(frozen=True)
class EntryResult:
    id: str
    cls: str
    expected: str
    seed: int
    verdict: str
    reason: str | None
    vector_length: int | None
    solver_calls: int
    transitions: int
    elapsed: float
    error: str | None = None

    @property
    def detected(self) -> bool:
        return self.verdict == "violated"


@dataclass(frozen=True)
class ProportionSummary:
    proportion: Fraction
    detected: int
    vulnerable: int
    vectors: int
    mean_elapsed: float
    entries: tuple[EntryResult, ...]


@dataclass(frozen=True)
class SweepReport:
    rows: tuple[ProportionSummary, ...] = ()

    def to_json(self, timing: bool = True) -> dict:
        rows = []
        for r in self.rows:
            entries = []
            for e in r.entries:
                d = asdict(e)
                d["class"] = d.pop("cls")
                elapsed = d.pop("elapsed")
                d["elapsed_s"] = round(elapsed, 3) if timing else 0
                entries.append(d)
            rows.append(
                {
                    "proportion": str(r.proportion),
                    "detected": r.detected,
                    "vulnerable": r.vulnerable,
                    "attack_vectors": r.vectors,
                    "mean_elapsed_s": round(r.mean_elapsed, 3) if timing else 0,
                    "entries": entries,
                }
            )
        return {"sweep": rows}


@dataclass(frozen=True)
class _Task:
    entry: CorpusEntry
    proportion: Fraction
    seed: int
    heuristics: Path
    budget: Budget
    solver: str
    solver_cmd: str | None
    builtin_range: tuple[int, int]
    constantization: bool


def _run_task(t: _Task) -> EntryResult:
    e = t.entry
    start = time.monotonic()
    try:
        problem = load_problem(e.contract, e.property, e.snapshot)
        hs = select_heuristics(load_heuristic_base(t.heuristics), t.proportion, t.seed)
        budget = replace(t.budget, **e.budget)
        solver = make_handle(t.solver, t.solver_cmd, builtin_range=t.builtin_range)
        v = verify(problem, budget, solver, hs, constantization=t.constantization)
    except Exception as exc:  # recorded, never aborts the sweep
        return EntryResult(e.id, e.cls, e.expected, t.seed, "error", None, None, 0, 0,
                           time.monotonic() - start, f"{type(exc).__name__}: {exc}")
    return EntryResult(
        e.id,
        e.cls,
        e.expected,
        t.seed,
        v.kind,
        v.reason,
        len(v.vector) if v.vector is not None else None,
        v.stats.solver_calls,
        v.stats.transitions,
        v.stats.elapsed,
    )


def run_corpus(
    manifest: str | Path | list[CorpusEntry] = MANIFEST,
    proportions=SWEEP_GRID,
    seeds=(0,),
    heuristics: str | Path = HEURISTICS,
    budget: Budget | None = None,
    jobs: int = 1,
    solver: str = "auto",
    solver_cmd: str | None = None,
    builtin_range: tuple[int, int] = (0, 64),
    constantization: bool = True,
) -> SweepReport:
    """Verify every (proportion, seed, entry); results keep that nesting order."""
    entries = manifest if isinstance(manifest, list) else load_manifest(manifest)
    budget = budget or Budget()
    props = [as_fraction(p) for p in proportions]
    tasks = [
        _Task(e, p, s, Path(heuristics), budget, solver, solver_cmd, tuple(builtin_range), constantization)
        for p in props
        for s in seeds
        for e in entries
    ]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_task, tasks))
    else:
        results = [_run_task(t) for t in tasks]
    rows = []
    per = len(seeds) * len(entries)
    for i, p in enumerate(props):
        chunk = tuple(results[i * per : (i + 1) * per])
        vulnerable = [r for r in chunk if r.expected == "violated"]
        rows.append(
            ProportionSummary(
                p,
                sum(r.detected for r in vulnerable),
                len(vulnerable),
                sum(r.detected for r in chunk),
                sum(r.elapsed for r in chunk) / len(chunk) if chunk else 0.0,
                chunk,
            )
        )
    return SweepReport(tuple(rows))
