"""Command line entry point: every pipeline behind one dispatcher.

Commands mirror the library layout (density, commuting, rf, faithful,
assembly, selftest).  Exit codes: 0 when every certificate passes,
1 when a run-time invariant fails (the failing check is named on
stderr), 2 for usage errors including infeasible configurations.
Passing --report writes the canonical JSON payload to the given path
with delimited tables and rendered figures alongside, plus a manifest
naming the digests of every written file.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import sys
import time
from fractions import Fraction
from pathlib import Path
from typing import Callable, Sequence

from . import __version__
from .assembly import (
    ConfigInfeasible,
    PipelineConfig,
    PipelineResult,
    folner_witness,
    run_pipeline,
    schreier_orbit,
    stabilizer_signature,
    t_interval,
)
from .commuting import random_cycle_factor, reconstruct_all
from .cycles import Graphing, match_equal_measure
from .density import (
    LevelTooSmall,
    NoPlanEntry,
    TooLarge,
    assemble_U,
    perm_to_exchange,
    plan_sequences,
    synthesize_word,
)
from .dyadic import Dyadic, DyadicError, check_word, dset
from .faithful import free_product_tower
from .rfactions import CarrierTooLarge, action_sequence, freeness_certificate, translation_action
from .report import (
    canonical_json,
    digest_file,
    emit_density,
    emit_folner,
    emit_pipeline,
    emit_schreier,
    emit_selftest,
    emit_table,
    resolve_report_path,
    schreier_dot,
    sibling,
    write_json,
    LEDGER_HEADER,
    SYNTHESIS_HEADER,
    ledger_rows,
    synthesis_rows,
)
from .selftest import selftest_certificate, summary_table
from .transform import finite_odometer
import random


class UsageError(Exception):
    """Bad flags or an infeasible configuration; exits with code 2."""


# -- small parsers


def _parse_dyadic(text: str) -> Dyadic:
    try:
        if "^" in text:
            num, _, rest = text.partition("/")
            base, _, exp = rest.partition("^")
            if base != "2":
                raise ValueError
            return Dyadic.make(int(num), int(exp))
        if "/" in text:
            return Dyadic.from_fraction(Fraction(text))
        return Dyadic.make(int(text), 0)
    except (ValueError, DyadicError):
        raise UsageError(
            f"cannot read {text!r} as a dyadic (try 3/2^5, 1/8, or 2)"
        ) from None


def _parse_ints(text: str, flag: str) -> tuple[int, ...]:
    try:
        values = tuple(int(part) for part in text.split(","))
    except ValueError:
        raise UsageError(f"{flag} wants comma-separated integers") from None
    if not values:
        raise UsageError(f"{flag} must not be empty")
    return values


def _parse_pairs(entries: Sequence[str]) -> Graphing:
    members = []
    for entry in entries:
        source, sep, target = entry.partition(":")
        if not sep:
            raise UsageError("--pair wants the form WORD:WORD")
        try:
            check_word(source)
            check_word(target)
            members.append(match_equal_measure(dset(source), dset(target)))
        except DyadicError as exc:
            raise UsageError(f"bad --pair {entry!r}: {exc}") from None
    return Graphing(tuple(members))


# -- output plumbing


def _echo_config(args: argparse.Namespace) -> dict:
    skip = {"handler", "argv_echo", "report", "format"}
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in skip or key.startswith("_"):
            continue
        if isinstance(value, (str, int, bool, type(None))):
            echo[key] = value
        elif isinstance(value, (list, tuple)):
            echo[key] = [str(v) for v in value]
        else:
            echo[key] = str(value)
    return echo


def _write_manifest(
    args: argparse.Namespace, written: list[Path], started: float
) -> Path:
    base = resolve_report_path(args.report)
    manifest = {
        "command": list(args.argv_echo),
        "config": _echo_config(args),
        "version": __version__,
        "seed": getattr(args, "seed", None),
        "elapsed_ms": int((time.monotonic() - started) * 1000),
        "reports": {path.name: digest_file(path) for path in written},
    }
    return write_json(sibling(base, "manifest", ".json"), manifest)


def _finish(
    args: argparse.Namespace,
    payload: dict,
    *,
    started: float,
    table: tuple[Sequence[str], list] | None = None,
    dot: str | None = None,
    reporter: Callable[[str], list[Path]] | None = None,
) -> int:
    fmt = getattr(args, "format", "json")
    if fmt == "json":
        sys.stdout.write(canonical_json(payload))
    elif fmt == "csv":
        if table is None:
            raise UsageError("this command has no delimited view")
        writer = csv.writer(sys.stdout)
        writer.writerow(table[0])
        writer.writerows(table[1])
    elif fmt == "dot":
        if dot is None:
            raise UsageError("dot output only applies to schreier graphs")
        sys.stdout.write(dot)
    if args.report:
        if reporter is not None:
            written = reporter(args.report)
        else:
            written = [write_json(resolve_report_path(args.report), payload)]
        written.append(_write_manifest(args, written, started))
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    return 0


# -- density commands


def _build_plan(args: argparse.Namespace):
    try:
        return plan_sequences(
            _parse_dyadic(args.epsilon), args.factors, args.level
        )
    except (TooLarge, LevelTooSmall) as exc:
        raise UsageError(str(exc)) from None


def _cmd_density_plan(args: argparse.Namespace) -> int:
    started = time.monotonic()
    plan = _build_plan(args)
    rows = [
        [k, n, str(plan.eps_seq[k]), str(plan.delta_seq[k])]
        for k, n in enumerate(plan.n_seq)
    ]
    return _finish(
        args,
        plan.to_json(),
        started=started,
        table=(("k", "n", "eps", "delta"), rows),
        reporter=lambda path: emit_density(path, plan),
    )


def _cmd_density_assemble(args: argparse.Namespace) -> int:
    started = time.monotonic()
    plan = _build_plan(args)
    u, ledger = assemble_U(plan)
    if not ledger.ok:
        raise DyadicError("generator ledger exceeded a bound")
    payload = {
        "plan": plan.to_json(),
        "ledger": ledger.to_json(),
        "support": u.support().measure().to_json(),
    }
    return _finish(
        args,
        payload,
        started=started,
        table=(LEDGER_HEADER, ledger_rows(ledger)),
        reporter=lambda path: emit_density(path, plan, ledger),
    )


def _cmd_density_synthesize(args: argparse.Namespace) -> int:
    started = time.monotonic()
    plan = _build_plan(args)
    n = args.all_targets
    if n not in plan.n_seq:
        raise UsageError(
            f"level {n} is not in the plan sequence {list(plan.n_seq)}"
        )
    k = plan.n_seq.index(n)
    u, ledger = assemble_U(plan)
    if not ledger.ok:
        raise DyadicError("generator ledger exceeded a bound")
    results = [
        synthesize_word(perm_to_exchange(perm, n), plan, u, k)
        for perm in itertools.permutations(range(1 << n))
    ]
    payload = {
        "plan": plan.to_json(),
        "targets": len(results),
        "synthesis": [row.to_json() for row in results],
    }
    return _finish(
        args,
        payload,
        started=started,
        table=(SYNTHESIS_HEADER, synthesis_rows(results)),
        reporter=lambda path: emit_density(path, plan, ledger, results),
    )


# -- commuting demo


def _cmd_commuting_demo(args: argparse.Namespace) -> int:
    started = time.monotonic()
    bases = _parse_ints(args.bases, "--bases")
    for i, p in enumerate(bases):
        for q in bases[i + 1 :]:
            if math.gcd(p, q) != 1:
                raise UsageError(f"bases {p} and {q} are not coprime")
    count = len(bases)
    regions = [dset("0" * i + "1") for i in range(count - 1)]
    regions.append(dset("0" * (count - 1)))
    for region, base in zip(regions, bases):
        cells = region.measure().as_fraction() * (1 << args.level)
        if cells < base:
            raise UsageError(
                f"level {args.level} leaves only {cells} cells for base {base}"
            )
    rng = random.Random(args.seed)
    rows = []
    exact_all = True
    for trial in range(args.trials):
        specs = [
            random_cycle_factor(rng, region, base, args.level)
            for region, base in zip(regions, bases)
        ]
        recovered = reconstruct_all(specs)
        for spec, image in zip(specs, recovered):
            exact = image == spec.map
            exact_all = exact_all and exact
            rows.append(
                [trial, spec.base, str(spec.map.support().measure()), exact]
            )
    payload = {
        "bases": list(bases),
        "level": args.level,
        "trials": args.trials,
        "rows": [
            {"trial": t, "base": b, "support": s, "exact": e}
            for t, b, s, e in rows
        ],
        "all_exact": exact_all,
    }
    code = _finish(
        args,
        payload,
        started=started,
        table=(("trial", "base", "support", "exact"), rows),
        reporter=lambda path: emit_table(
            path,
            payload,
            ("trial", "base", "support", "exact"),
            rows,
            tag="trials",
            figure=(
                [f"{t}:{b}" for t, b, _, _ in rows],
                [1.0 if e else 0.0 for _, _, _, e in rows],
                "exact recoveries per factor",
            ),
        ),
    )
    if not exact_all:
        raise DyadicError("a commuting factor was not recovered exactly")
    return code


# -- residual finiteness


def _cmd_rf_check(args: argparse.Namespace) -> int:
    started = time.monotonic()
    if args.q % 2 == 0 or args.q < 3:
        raise UsageError("--q wants an odd prime")
    if args.m < 1 or args.maxword < 1 or args.maxdepth < 1:
        raise UsageError("--m, --maxword, --maxdepth must be positive")
    records = freeness_certificate(args.q, args.m, args.maxword, args.maxdepth)
    histogram: dict[str, int] = {}
    missing = []
    for word, depth in records:
        if depth is None:
            missing.append(word)
        else:
            histogram[str(depth)] = histogram.get(str(depth), 0) + 1
    actions = []
    for d in range(1, args.maxdepth + 1):
        try:
            action = translation_action(args.q, args.m, d)
        except CarrierTooLarge:
            break
        actions.append(
            {
                "depth": d,
                "carrier": action.carrier_size,
                "tables": [list(p) for p in action.generator_perms],
            }
        )
    payload = {
        "q": args.q,
        "m": args.m,
        "max_word": args.maxword,
        "max_depth": args.maxdepth,
        "words": len(records),
        "separation_depths": histogram,
        "unseparated": [list(w) for w in missing],
        "actions": actions,
    }
    table_rows = [
        ["".join(str(x) + "." for x in word), depth] for word, depth in records
    ]
    depth_keys = sorted(histogram, key=int)
    code = _finish(
        args,
        payload,
        started=started,
        table=(("word", "least_depth"), table_rows),
        reporter=lambda path: emit_table(
            path,
            payload,
            ("word", "least_depth"),
            table_rows,
            tag="words",
            figure=(
                depth_keys,
                [float(histogram[k]) for k in depth_keys],
                "least separating degree",
            ),
        ),
    )
    if missing:
        raise DyadicError(
            f"{len(missing)} words were not separated by degree {args.maxdepth}"
        )
    return code


# -- faithful tower


def _cmd_faithful_tower(args: argparse.Namespace) -> int:
    started = time.monotonic()
    if args.depth < 0:
        raise UsageError("--depth must not be negative")
    depths = _parse_ints(args.action_depths, "--action-depths")
    starts = []
    position = 1
    for n in range(args.depth + 1):
        starts.append(position + n)
        position += 2 * n + 2
    level = max(4, (starts[-1] + args.depth + 1).bit_length() + 1)
    t = finite_odometer(level)
    stage_sets = []
    for n, start in enumerate(starts):
        word = "".join("01"[(start >> i) & 1] for i in range(level))
        stage_sets.append(dset(word))
    try:
        actions = action_sequence(args.q, args.m, depths)
        tower = free_product_tower(t, actions, stage_sets)
    except (CarrierTooLarge, DyadicError) as exc:
        raise DyadicError(f"tower construction failed: {exc}") from None
    payload = {
        "q": args.q,
        "m": args.m,
        "depth": args.depth,
        "level": level,
        "epsilons": [e.to_json() for e in tower.epsilons],
        "carriers": list(tower.carrier_sizes),
        "stage_word_counts": [len(words) for words in tower.stage_words],
        "slacks": [s.to_json() for s in tower.certificate.slacks],
        "family": tower.certificate.family.to_json(),
        "generator_resolutions": [g.resolution for g in tower.generators],
    }
    rows = [
        [
            n,
            str(stage_sets[n].measure()),
            str(tower.epsilons[n]),
            tower.carrier_sizes[n],
            len(tower.stage_words[n]),
        ]
        for n in range(args.depth + 1)
    ]
    header = ("stage", "set_measure", "epsilon", "carrier", "words")
    return _finish(
        args,
        payload,
        started=started,
        table=(header, rows),
        reporter=lambda path: emit_table(
            path,
            payload,
            header,
            rows,
            tag="stages",
            figure=(
                [row[0] for row in rows],
                [float(row[4]) for row in rows],
                "stage word counts",
            ),
        ),
    )


# -- assembly commands


def _config_from(args: argparse.Namespace) -> PipelineConfig:
    try:
        return PipelineConfig(
            m=args.m,
            p=args.p,
            q=args.q,
            level=args.level,
            factors=args.factors,
            phi=_parse_pairs(args.pair or []),
            tower_depth=args.tower_depth,
            action_depths=_parse_ints(args.action_depths, "--action-depths"),
            hf_radius=args.hf_radius,
            orbit_bound=args.orbit_bound,
        )
    except ConfigInfeasible as exc:
        raise UsageError(str(exc)) from None


def _run_configured(args: argparse.Namespace) -> PipelineResult:
    return run_pipeline(_config_from(args))


def _cmd_assembly_run(args: argparse.Namespace) -> int:
    started = time.monotonic()
    result = _run_configured(args)
    for line in result.summary():
        print(line, file=sys.stderr)
    return _finish(
        args,
        result.to_json(),
        started=started,
        table=(LEDGER_HEADER, ledger_rows(result.ledger)),
        reporter=lambda path: emit_pipeline(path, result),
    )


def _orbit_word(result: PipelineResult, text: str | None) -> str:
    level = result.schreier_level
    if text is None:
        return result.basepoint(0)
    try:
        check_word(text)
    except DyadicError as exc:
        raise UsageError(str(exc)) from None
    if len(text) > level:
        raise UsageError(
            f"--word is longer than the orbit level {level}"
        )
    return text + "0" * (level - len(text))


def _cmd_assembly_schreier(args: argparse.Namespace) -> int:
    started = time.monotonic()
    result = _run_configured(args)
    w = _orbit_word(result, args.word)
    graph = schreier_orbit(
        result.generators,
        w,
        result.schreier_level,
        labels=result.labels,
        bound=args.bound or result.config.orbit_bound,
    )
    table = None
    if args.format == "csv":
        table = (
            ("source", "label", "target"),
            [
                [graph.vertices[i], label, graph.vertices[j]]
                for i, label, j in graph.edges()
            ],
        )
    dot = schreier_dot(graph) if args.format == "dot" else ""
    return _finish(
        args,
        graph.to_json(),
        started=started,
        table=table,
        dot=dot,
        reporter=lambda path: emit_schreier(path, graph),
    )


def _cmd_assembly_folner(args: argparse.Namespace) -> int:
    started = time.monotonic()
    result = _run_configured(args)
    candidates = []
    if args.word is not None:
        w = _orbit_word(result, args.word)
        lengths = (
            _parse_ints(args.lengths, "--lengths") if args.lengths else (1,)
        )
        graph = schreier_orbit(
            result.generators,
            w,
            result.schreier_level,
            labels=result.labels,
            bound=result.config.orbit_bound,
        )
        for length in lengths:
            candidates.append(t_interval(graph, w, length, "T"))
    else:
        graph = None
        for n in range(result.config.tower_depth + 1):
            w = result.basepoint(n)
            if graph is None or w not in graph.vertices:
                graph = schreier_orbit(
                    result.generators,
                    w,
                    result.schreier_level,
                    labels=result.labels,
                    bound=result.config.orbit_bound,
                )
            candidates.append(t_interval(graph, w, 2 * n + 1, "T"))
    for interval in candidates:
        for vertex in interval:
            if vertex not in graph.vertices:
                raise DyadicError(
                    "stage basepoints sit in different orbits; pass --word"
                )
    report = folner_witness(graph, candidates)
    rows = [
        [row.index, row.size, label, f"{r.numerator}/{r.denominator}", row.flagged]
        for row in report.rows
        for label, r in row.ratios
    ]
    return _finish(
        args,
        report.to_json(),
        started=started,
        table=(("candidate", "size", "label", "ratio", "flagged"), rows),
        reporter=lambda path: emit_folner(path, report),
    )


def _cmd_assembly_stab(args: argparse.Namespace) -> int:
    started = time.monotonic()
    result = _run_configured(args)
    w = _orbit_word(result, args.word)
    if args.radius < 0:
        raise UsageError("--radius must not be negative")
    signature = stabilizer_signature(
        result.generators, w, args.radius, result.schreier_level
    )
    rows = [
        ["".join(f"{x}." for x in word) or "e"] for word in signature.words
    ]
    return _finish(
        args,
        signature.to_json(),
        started=started,
        table=(("fixing_word",), rows),
        reporter=lambda path: emit_table(
            path, signature.to_json(), ("fixing_word",), rows, tag="words"
        ),
    )


# -- selftest


def _cmd_selftest(args: argparse.Namespace) -> int:
    started = time.monotonic()
    certificate = selftest_certificate(args.quick, args.seed)
    if args.format == "json":
        sys.stdout.write(canonical_json(certificate))
    else:
        for line in summary_table(certificate):
            print(line)
    if args.report:
        written = emit_selftest(args.report, certificate)
        written.append(_write_manifest(args, written, started))
        for path in written:
            print(f"wrote {path}", file=sys.stderr)
    if not certificate["all_passed"]:
        failing = [
            row["name"]
            for row in certificate["criteria"]
            if row["status"] != "pass"
        ]
        print(f"invariant failed: {', '.join(failing)}", file=sys.stderr)
        return 1
    return 0


# -- parser


def _add_common(parser: argparse.ArgumentParser, formats=("json", "csv")) -> None:
    parser.add_argument("--report", help="write report files with this stem")
    parser.add_argument(
        "--format", choices=formats, default="json", help="stdout format"
    )


def _add_plan_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--epsilon", default="1", help="budget, e.g. 3/2^5")
    parser.add_argument("--factors", type=int, default=2)
    parser.add_argument("--level", type=int, default=7)


def _add_pipeline_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--m", type=int, default=1)
    parser.add_argument("--p", type=int, default=5)
    parser.add_argument("--q", type=int, default=3)
    parser.add_argument("--level", type=int, default=14)
    parser.add_argument("--factors", type=int, default=2)
    parser.add_argument("--tower-depth", type=int, default=1)
    parser.add_argument("--action-depths", default="1,2,3")
    parser.add_argument("--hf-radius", type=int, default=2)
    parser.add_argument("--orbit-bound", type=int, default=1 << 20)
    parser.add_argument(
        "--pair",
        action="append",
        metavar="WORD:WORD",
        help="input graphing member matching two cylinder sets",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dyadlab",
        description="exact constructions on the binary sequence space",
    )
    parser.add_argument("--version", action="version", version=__version__)
    groups = parser.add_subparsers(dest="group", required=True)

    density = groups.add_parser("density", help="generator plans and words")
    density_cmds = density.add_subparsers(dest="command", required=True)
    plan = density_cmds.add_parser("plan", help="choose levels and budgets")
    _add_plan_flags(plan)
    _add_common(plan)
    plan.set_defaults(handler=_cmd_density_plan)
    assemble = density_cmds.add_parser("assemble", help="build U and its ledger")
    _add_plan_flags(assemble)
    _add_common(assemble)
    assemble.set_defaults(handler=_cmd_density_assemble)
    synthesize = density_cmds.add_parser(
        "synthesize", help="replay every target at one level"
    )
    _add_plan_flags(synthesize)
    synthesize.add_argument("--all-targets", type=int, required=True, metavar="N")
    _add_common(synthesize)
    synthesize.set_defaults(handler=_cmd_density_synthesize)

    commuting = groups.add_parser("commuting", help="disjoint factor recovery")
    commuting_cmds = commuting.add_subparsers(dest="command", required=True)
    demo = commuting_cmds.add_parser("demo", help="seeded recovery trials")
    demo.add_argument("--bases", default="2,3,5")
    demo.add_argument("--level", type=int, default=8)
    demo.add_argument("--trials", type=int, default=5)
    demo.add_argument("--seed", type=int, default=0)
    _add_common(demo)
    demo.set_defaults(handler=_cmd_commuting_demo)

    rf = groups.add_parser("rf", help="residual finiteness checks")
    rf_cmds = rf.add_subparsers(dest="command", required=True)
    check = rf_cmds.add_parser("check-freeness", help="separate short words")
    check.add_argument("--q", type=int, default=3)
    check.add_argument("--m", type=int, default=2)
    check.add_argument("--maxword", type=int, default=6)
    check.add_argument("--maxdepth", type=int, default=6)
    _add_common(check)
    check.set_defaults(handler=_cmd_rf_check)

    faithful = groups.add_parser("faithful", help="faithfulness towers")
    faithful_cmds = faithful.add_subparsers(dest="command", required=True)
    tower = faithful_cmds.add_parser("tower", help="build a witness tower")
    tower.add_argument("--depth", type=int, default=1)
    tower.add_argument("--q", type=int, default=3)
    tower.add_argument("--m", type=int, default=1)
    tower.add_argument("--action-depths", default="1,2,3")
    _add_common(tower)
    tower.set_defaults(handler=_cmd_faithful_tower)

    assembly = groups.add_parser("assembly", help="the full generator pipeline")
    assembly_cmds = assembly.add_subparsers(dest="command", required=True)
    run = assembly_cmds.add_parser("run", help="assemble and certify")
    _add_pipeline_flags(run)
    _add_common(run)
    run.set_defaults(handler=_cmd_assembly_run)
    schreier = assembly_cmds.add_parser("schreier", help="orbit graph of a word")
    _add_pipeline_flags(schreier)
    schreier.add_argument("--word", help="basepoint; zero-padded to the orbit level")
    schreier.add_argument("--bound", type=int, default=0, help="orbit size cap")
    _add_common(schreier, formats=("json", "csv", "dot"))
    schreier.set_defaults(handler=_cmd_assembly_schreier)
    folner = assembly_cmds.add_parser("folner", help="boundary ratios of intervals")
    _add_pipeline_flags(folner)
    folner.add_argument("--word", help="interval start; default loop basepoints")
    folner.add_argument("--lengths", help="comma-separated interval lengths")
    _add_common(folner)
    folner.set_defaults(handler=_cmd_assembly_folner)
    stab = assembly_cmds.add_parser("stab", help="short fixing words at a point")
    _add_pipeline_flags(stab)
    stab.add_argument("--word", help="basepoint; zero-padded to the orbit level")
    stab.add_argument("--radius", type=int, default=4)
    _add_common(stab)
    stab.set_defaults(handler=_cmd_assembly_stab)

    selftest = groups.add_parser("selftest", help="run the acceptance criteria")
    selftest.add_argument("--quick", action="store_true")
    selftest.add_argument("--seed", type=int, default=0)
    selftest.add_argument("--report", help="write report files with this stem")
    selftest.add_argument(
        "--format", choices=("table", "json"), default="table"
    )
    selftest.set_defaults(handler=_cmd_selftest)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        return int(exc.code or 0)
    args.argv_echo = list(argv)
    try:
        return args.handler(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DyadicError as exc:
        print(f"invariant failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
