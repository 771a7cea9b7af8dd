"""Command-line interface: ``cscv verify | analyze | context | corpus``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .analysis import access_sets, dependency_graph
from .context import build_context
from .corpus import HEURISTICS, MANIFEST
from .engine import Budget, report_json
from .errors import BackendUnavailable, CSCVError, ReplayDivergence
from .frontend import parse_contract, parse_property, parse_snapshot
from .optimization import SWEEP_GRID, HeuristicSet, as_fraction, load_heuristic_base, select_heuristics
from .pipeline import Problem, verify
from .solver import make_handle

EXIT_VERIFIED, EXIT_VIOLATED, EXIT_UNKNOWN = 0, 1, 2
EXIT_USAGE, EXIT_INPUT = 64, 65

log = logging.getLogger("cscv")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def _range(text: str) -> tuple[int, int]:
    lo, sep, hi = text.partition("..")
    try:
        lo_i, hi_i = int(lo), int(hi)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected LO..HI, got {text!r}") from None
    if not sep or lo_i > hi_i:
        raise argparse.ArgumentTypeError(f"expected LO..HI with LO <= HI, got {text!r}")
    return lo_i, hi_i


def _proportion(text: str):
    try:
        p = as_fraction(float(text)) if "/" not in text else as_fraction(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a proportion: {text!r}") from None
    if not 0 <= p <= 1:
        raise argparse.ArgumentTypeError(f"proportion {text} outside [0, 1]")
    return p


def _positive(text: str) -> float:
    v = float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _engine_flags(p: argparse.ArgumentParser) -> None:
    d = Budget()
    p.add_argument("--diameter", type=_nonneg_int, default=d.diameter, help="max transitions from s0")
    p.add_argument("--time-budget", type=_positive, default=d.time_limit, help="wall-clock seconds per run")
    p.add_argument("--branch-flips", type=_nonneg_int, default=d.branch_flips, help="constraint negations per transition")
    p.add_argument("--reentry-depth", type=_nonneg_int, default=d.reentry_depth, help="max nesting of reentrant calls")
    p.add_argument("--heuristics", type=Path, help="heuristic base (JSON list)")
    p.add_argument("--heuristic-proportion", type=_proportion, default=as_fraction(0), help="fraction of the base to sample")
    p.add_argument("--seed", type=int, default=0, help="heuristic sampling seed")
    p.add_argument("--solver", choices=("auto", "builtin", "external"), default="auto")
    p.add_argument("--solver-cmd", help="SMT-LIB2 solver command reading from stdin (e.g. 'z3 -in')")
    p.add_argument("--builtin-range", type=_range, default=(0, 64), metavar="LO..HI")
    p.add_argument("--default-zero", action="store_true", help="zero-fill variables with no value")
    p.add_argument("--no-constantize", action="store_true", help="skip function constantization")


def _problem_flags(p: argparse.ArgumentParser, snapshot: bool = True) -> None:
    p.add_argument("--contract", type=Path, required=True)
    p.add_argument("--property", type=Path, required=True)
    if snapshot:
        p.add_argument("--snapshot", type=Path, required=True)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cscv", description="Context-sensitive concolic verification of MCL contracts.")
    parser.add_argument("--version", action="version", version=f"cscv {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="verify a property against a contract and snapshot")
    _problem_flags(v)
    _engine_flags(v)
    v.add_argument("--report", type=Path, help="write the JSON report here")
    v.add_argument("--emit-deps", type=Path, help="also write access sets and dependency edges")

    a = sub.add_parser("analyze", help="dump access sets and dependency edges")
    a.add_argument("--contract", type=Path, required=True)
    a.add_argument("--emit-deps", type=Path, help="write JSON here instead of stdout")

    c = sub.add_parser("context", help="print the verification context")
    _problem_flags(c)
    c.add_argument("--heuristics", type=Path)
    c.add_argument("--heuristic-proportion", type=_proportion, default=as_fraction(0))
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--default-zero", action="store_true")
    c.add_argument("--emit", type=Path, help="write JSON here instead of stdout")

    s = sub.add_parser("corpus", help="sweep the corpus over heuristic proportions")
    s.add_argument("--manifest", type=Path, default=MANIFEST)
    s.add_argument("--proportions", type=_proportion, nargs="+", default=list(SWEEP_GRID))
    s.add_argument("--seeds", type=int, nargs="+", default=[0])
    s.add_argument("--jobs", type=int, default=1)
    _engine_flags(s)
    s.set_defaults(heuristics=None)
    s.add_argument("--report", type=Path, help="write the SweepReport JSON here")
    return parser


def _read(path: Path) -> str:
    try:
        return path.read_text()
    except OSError as exc:
        raise CSCVError(f"cannot read {path}: {exc.strerror}") from exc


def _write_json(obj, path: Path | None) -> None:
    text = json.dumps(obj, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        path.write_text(text)


def _heuristics(args) -> HeuristicSet | None:
    if args.heuristics is None:
        if args.heuristic_proportion:
            args.heuristics = HEURISTICS
        else:
            return None
    try:
        base = load_heuristic_base(args.heuristics)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise CSCVError(f"bad heuristic base {args.heuristics}: {exc}") from exc
    return select_heuristics(base, args.heuristic_proportion, args.seed)


def _deps_json(contract) -> dict:
    return {
        "access_sets": access_sets(contract).to_json(),
        "dependencies": dependency_graph(contract).to_json(),
    }


def _load(args, snapshot: bool = True):
    contract = parse_contract(_read(args.contract))
    prop = parse_property(_read(args.property), contract)
    snap = parse_snapshot(_read(args.snapshot), contract) if snapshot else None
    return contract, prop, snap


def cmd_verify(args) -> int:
    contract, prop, snap = _load(args)
    if args.emit_deps:
        _write_json(_deps_json(contract), args.emit_deps)
    budget = Budget(args.diameter, args.time_budget, args.branch_flips, args.reentry_depth)
    try:
        solver = make_handle(args.solver, args.solver_cmd, builtin_range=args.builtin_range)
    except BackendUnavailable as exc:
        raise CSCVError(str(exc)) from exc
    verdict = verify(
        Problem(contract, prop, snap),
        budget,
        solver,
        _heuristics(args),
        args.default_zero,
        not args.no_constantize,
    )
    report = report_json(verdict, prop.source)
    if args.report:
        _write_json(report, args.report)
    print(f"{contract.name}: {verdict}")
    if verdict.vector is not None:
        for i, inv in enumerate(verdict.vector.invocations, 1):
            print(f"  {i}. {inv}")
    st = verdict.stats
    print(f"  {st.transitions} transitions, {st.states} states, {st.solver_calls} solver calls, {st.elapsed:.2f}s")
    return {"verified": EXIT_VERIFIED, "violated": EXIT_VIOLATED}.get(verdict.kind, EXIT_UNKNOWN)


def cmd_analyze(args) -> int:
    contract = parse_contract(_read(args.contract))
    _write_json(_deps_json(contract), args.emit_deps)
    return 0


def cmd_context(args) -> int:
    contract, prop, snap = _load(args)
    from .optimization import apply_heuristics

    ctx = build_context(prop, contract, snap, default_zero=args.default_zero)
    hs = _heuristics(args)
    if hs is not None:
        ctx = apply_heuristics(ctx, hs)
    _write_json(ctx.to_json(), args.emit)
    return 0


def cmd_corpus(args) -> int:
    from .harness import load_manifest, run_corpus

    try:
        entries = load_manifest(args.manifest)
    except (OSError, ValueError, KeyError) as exc:
        raise CSCVError(f"bad manifest {args.manifest}: {exc}") from exc
    sweep = run_corpus(
        entries,
        args.proportions,
        args.seeds,
        args.heuristics or HEURISTICS,
        Budget(args.diameter, args.time_budget, args.branch_flips, args.reentry_depth),
        args.jobs,
        args.solver,
        args.solver_cmd,
        args.builtin_range,
        not args.no_constantize,
    )
    if args.report:
        _write_json(sweep.to_json(), args.report)
    for row in sweep.rows:
        print(f"proportion {row.proportion}: detected {row.detected}/{row.vulnerable}, mean {row.mean_elapsed:.2f}s")
        for e in row.entries:
            extra = f" (len {e.vector_length})" if e.vector_length is not None else ""
            print(f"  {e.id:22s} {e.verdict}{extra}" + (f" [{e.reason}]" if e.reason else ""))
    return 0


COMMANDS = {"verify": cmd_verify, "analyze": cmd_analyze, "context": cmd_context, "corpus": cmd_corpus}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return COMMANDS[args.command](args)
    except ReplayDivergence:
        raise  # an engine bug, not an input problem
    except CSCVError as exc:
        print(f"cscv: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
