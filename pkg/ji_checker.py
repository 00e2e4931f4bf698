#!/usr/bin/env python3
"""Check bisimilarity, simulation and environment-parameterized relations between finite processes.

Exit codes: 0 related / holds / all passed, 1 not related / violated, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path
from typing import AbstractSet, Any, Dict, List, Optional, Sequence, Set, Tuple

try:
    import tomllib  # Python 3.11+
except ModuleNotFoundError:  # pragma: no cover
    import tomli as tomllib  # type: ignore

import discrimination
import golden_examples
from equivalence import RefinementChain, bisim_partition
from hml_formulas import ModelChecker, format_formula, parse_formula
from interaction import join_lts, joindot_lts
from lts_core import (
    STATE_BUDGET_ENV,
    BudgetExceededError,
    InputDomainError,
    LtsError,
    Process,
    merge_processes,
    restrict_reachable,
    set_state_budget,
    to_dot,
    to_json,
)
from param_relations import ENV_RELATIONS, RELATION_SYMBOLS, MismatchTrace, prepare_triple
from process_syntax import compile_text

logger = logging.getLogger("ji_checker")

DEFAULT_CONFIG = Path("ji_checker_config.toml")

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2

PLAIN_RELATIONS = ("bisim", "sim", "sim-equiv")


class UsageError(Exception):
    pass


_UNSET = object()


def explicit_options(
    parser: argparse.ArgumentParser,
    subparser: argparse.ArgumentParser,
    args: argparse.Namespace,
    argv: Optional[Sequence[str]],
) -> Set[str]:
    """Destinations given on the command line, even when equal to their default."""
    defaults = {key: subparser.get_default(key) for key in vars(args) if key != "command"}
    scalar = [key for key, default in defaults.items() if not isinstance(default, list)]
    subparser.set_defaults(**{key: _UNSET for key in scalar})
    try:
        marked = vars(parser.parse_args(argv))
    finally:
        subparser.set_defaults(**{key: defaults[key] for key in scalar})
    given = {key for key in scalar if marked.get(key) is not _UNSET}
    given.update(key for key, default in defaults.items() if key not in scalar and getattr(args, key) != default)
    return given


def apply_config_defaults(
    parser: argparse.ArgumentParser,
    args: argparse.Namespace,
    data: Dict[str, Any],
    explicit: AbstractSet[str] = frozenset(),
) -> None:
    """Copy TOML values onto every option not given on the command line."""
    for raw_key, value in data.items():
        if isinstance(value, dict):
            continue
        key = raw_key.replace("-", "_")
        if not hasattr(args, key) or key in explicit:
            continue
        current = getattr(args, key)
        default = parser.get_default(key)
        if current == default:
            if isinstance(default, Path):
                setattr(args, key, Path(value))
            else:
                setattr(args, key, value)


def load_config(path: Path, explicit: bool) -> Dict[str, Any]:
    if not path.exists():
        if explicit:
            raise FileNotFoundError(f"Config file not found: {path}")
        return {}
    with path.open("rb") as handle:
        return tomllib.load(handle)


def read_term(text: str) -> str:
    """Inline term text, or the contents of a file when written as ``@path``."""
    if text.startswith("@"):
        path = Path(text[1:])
        if not path.exists():
            raise FileNotFoundError(f"Process file not found: {path}")
        try:
            return path.read_text(encoding="utf-8")
        except UnicodeDecodeError as exc:
            raise InputDomainError(f"Process file {path} is not valid UTF-8: {exc}") from exc
    return text


def load_process(text: str) -> Process:
    return compile_text(read_term(text))


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        type=Path,
        default=None,
        help=f"TOML file supplying flag defaults (default: {DEFAULT_CONFIG} when present).",
    )
    parser.add_argument(
        "--state-budget",
        type=int,
        default=None,
        help=f"Maximum states of any constructed LTS (overrides {STATE_BUDGET_ENV}; default 10000).",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="Logging level for progress messages on stderr.",
    )
    parser.add_argument(
        "--json",
        action="store_true",
        help="Print machine-readable JSON instead of text.",
    )
    parser.add_argument(
        "--workers",
        type=int,
        default=1,
        help="Parallel workers for per-environment experiment work (1 = sequential).",
    )


def build_parser() -> Tuple[argparse.ArgumentParser, Dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        description=(
            "Decide bisimilarity, simulation, Larsen-style and join-interaction parameterized "
            "relations between processes, evaluate modal formulas and run discrimination experiments."
        )
    )
    commands = parser.add_subparsers(dest="command", required=True)

    check = commands.add_parser("check", help="Decide one relation between two processes.")
    _add_common(check)
    check.add_argument("left", help="Left process term (or @file).")
    check.add_argument("right", help="Right process term (or @file).")
    check.add_argument(
        "--rel",
        default="bisim",
        help=f"Relation: one of {', '.join(PLAIN_RELATIONS + ENV_RELATIONS)}.",
    )
    check.add_argument("--env", default=None, help="Environment term (or @file) for parameterized relations.")
    check.add_argument("--explain", action="store_true", help="Print a witness when the relation fails.")

    evaluate = commands.add_parser("eval", help="Model-check a formula at the root of a process.")
    _add_common(evaluate)
    evaluate.add_argument("term", help="Process term (or @file).")
    evaluate.add_argument("formula", help="Formula text, e.g. '<a>!<b>T'.")

    examples = commands.add_parser("examples", help="Replay the registered golden examples.")
    _add_common(examples)
    examples.add_argument(
        "--only",
        action="append",
        default=[],
        help=f"Restrict to a group ({', '.join(golden_examples.GROUPS)}) or example name; repeatable.",
    )

    experiment = commands.add_parser("experiment", help="Run discrimination experiment suites over a universe.")
    _add_common(experiment)
    experiment.add_argument(
        "--suite",
        action="append",
        default=[],
        help=f"Suite to run ({', '.join(discrimination.SUITES)}, or all); repeatable.",
    )
    _add_universe_flags(experiment)
    experiment.add_argument("--formula-depth", type=int, default=2, help="Formula depth bound for logic suites.")
    experiment.add_argument("--formula-width", type=int, default=2, help="Conjunction width bound for logic suites.")
    experiment.add_argument("--samples", type=int, default=1000, help="Random LTSs for the pr-parity suite.")
    experiment.add_argument("--seed", type=int, default=0, help="Seed for the pr-parity suite.")
    experiment.add_argument("--report", type=Path, default=None, help="Write the JSON report to this path.")

    export = commands.add_parser("export", help="Print the LTS of terms, or a product with an environment.")
    _add_common(export)
    export.add_argument("terms", nargs="+", help="Process terms (or @file).")
    export.add_argument("--dot", action="store_true", help="Graphviz output (the default unless --json).")
    export.add_argument("--product", choices=["join", "joindot"], default=None, help="Export a product with --env.")
    export.add_argument("--env", default=None, help="Environment term for --product.")
    export.add_argument("--output", type=Path, default=None, help="Write to this file instead of stdout.")

    distinguish = commands.add_parser("distinguish", help="Print a formula separating two processes.")
    _add_common(distinguish)
    distinguish.add_argument("left", help="Process the formula holds for (or @file).")
    distinguish.add_argument("right", help="Process the formula fails for (or @file).")
    distinguish.add_argument("--rel", choices=["bisim", "sim"], default="bisim", help="Relation to refute.")

    universe = commands.add_parser("universe", help="Build and list a process universe.")
    _add_common(universe)
    _add_universe_flags(universe)
    return parser, commands.choices


def _add_universe_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--alphabet", default="a,b", help="Comma-separated action names.")
    parser.add_argument("--size", type=int, default=4, help="Largest enumerated term size.")
    parser.add_argument("--join-rounds", type=int, default=1, help="Rounds of closure under joins.")
    parser.add_argument(
        "--universal",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="Include the universal process over the alphabet.",
    )


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    explicit_budget = args.state_budget
    explicit_config = args.config is not None
    config_path = args.config if explicit_config else DEFAULT_CONFIG
    data = load_config(config_path, explicit_config)
    subparser = subparsers[args.command]
    explicit = explicit_options(parser, subparser, args, argv)
    apply_config_defaults(subparser, args, data, explicit)
    section = data.get(args.command)
    if isinstance(section, dict):
        apply_config_defaults(subparser, args, section, explicit)
    # flag > env var > config file > built-in default
    if explicit_budget is not None:
        args.state_budget = explicit_budget
    elif os.environ.get(STATE_BUDGET_ENV, "").strip():
        args.state_budget = None
    return args


def _emit(args: argparse.Namespace, payload: Dict[str, Any], text: str) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False, indent=2))
    else:
        print(text)


def _plain_relation(name: str, left: Process, right: Process, explain: bool) -> Dict[str, Any]:
    merged, roots = merge_processes([left, right])
    lts, mapping = restrict_reachable(merged, roots)
    s, t = mapping[roots[0]], mapping[roots[1]]
    chain = RefinementChain(lts, symmetric=(name == "bisim"))
    forward = chain.related(s, t)
    backward = chain.related(t, s)
    related = forward and backward if name == "sim-equiv" else forward
    result: Dict[str, Any] = {"relation": name, "related": related, "witness": None}
    if explain and not related:
        if forward:
            result["witness"] = format_formula(chain.distinguish(t, s))
            result["note"] = "holds for the right process, fails for the left"
        else:
            result["witness"] = format_formula(chain.distinguish(s, t))
            result["note"] = "holds for the left process, fails for the right"
    return result


def cmd_check(args: argparse.Namespace) -> int:
    if args.rel not in PLAIN_RELATIONS + ENV_RELATIONS:
        raise UsageError(f"Unknown relation {args.rel!r}; choose from {list(PLAIN_RELATIONS + ENV_RELATIONS)}")
    left, right = load_process(args.left), load_process(args.right)
    symbol = RELATION_SYMBOLS.get(args.rel, "<=>" if args.rel == "sim-equiv" else args.rel)
    trace_text = None
    if args.rel in PLAIN_RELATIONS:
        if args.env is not None:
            logger.warning(f"--env is ignored for {args.rel}")
        result = _plain_relation(args.rel, left, right, args.explain)
        heading = f"{left.label} {symbol} {right.label}"
    else:
        if args.env is None:
            raise UsageError(f"--env is required for {args.rel}")
        env = load_process(args.env)
        batch, p_root, q_root = prepare_triple(left, env, right, budget=args.state_budget)
        related = batch.holds(args.rel, p_root, q_root)
        result = {"relation": args.rel, "env": env.label, "related": related, "witness": None}
        if args.explain and not related:
            witness, note = batch.witness(args.rel, p_root, q_root)
            if isinstance(witness, MismatchTrace):
                result["witness"] = witness.to_json()
                trace_text = witness.describe(batch.process_lts, batch.env_lts)
            elif witness is not None:
                result["witness"] = format_formula(witness)
            if note:
                result["note"] = note
        heading = f"{left.label} {symbol}[{env.label}] {right.label}"
    lines = [f"{heading}: {'holds' if result['related'] else 'does not hold'}"]
    if trace_text is not None:
        lines.append("mismatch trace:")
        lines.append(trace_text)
    elif result.get("witness") is not None:
        lines.append(f"witness: {result['witness']}")
    if result.get("note"):
        lines.append(f"note: {result['note']}")
    _emit(args, result, "\n".join(lines))
    return EXIT_HOLDS if result["related"] else EXIT_FAILS


def cmd_eval(args: argparse.Namespace) -> int:
    proc = load_process(args.term)
    phi = parse_formula(args.formula)
    holds = ModelChecker(proc.lts).satisfies(proc.root, phi)
    _emit(args, {"term": proc.label, "formula": format_formula(phi), "satisfied": holds}, "true" if holds else "false")
    return EXIT_HOLDS if holds else EXIT_FAILS


def cmd_examples(args: argparse.Namespace) -> int:
    try:
        results = golden_examples.run_examples(args.only)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from None
    payload = {"passed": all(r.passed for r in results), "examples": [r.to_json() for r in results]}
    _emit(args, payload, golden_examples.render_table(results))
    return EXIT_HOLDS if payload["passed"] else EXIT_FAILS


def _alphabet(text: str) -> List[str]:
    names = [name.strip() for name in text.split(",") if name.strip()]
    if not names:
        raise UsageError("--alphabet needs at least one action name")
    return names


def _build_universe(args: argparse.Namespace) -> discrimination.Universe:
    return discrimination.build_universe(
        _alphabet(args.alphabet),
        args.size,
        args.join_rounds,
        args.universal,
        budget=args.state_budget,
    )


def cmd_experiment(args: argparse.Namespace) -> int:
    suites = args.suite or ["all"]
    if "all" in suites:
        suites = list(discrimination.SUITES)
    unknown = [name for name in suites if name not in discrimination.SUITES]
    if unknown:
        raise UsageError(f"Unknown suite(s) {unknown}; choose from {list(discrimination.SUITES)} or all")
    universe = _build_universe(args)
    print(f"Universe: {len(universe)} processes, {universe.lts.num_states} states", file=sys.stderr)
    reports = []
    for name in suites:
        print(f"Running suite {name}...", file=sys.stderr)
        try:
            reports.append(discrimination.run_suite(
                name,
                universe,
                workers=args.workers,
                budget=args.state_budget,
                formula_depth=args.formula_depth,
                formula_width=args.formula_width,
                random_samples=args.samples,
                seed=args.seed,
            ))
        except LtsError as exc:
            if len(suites) == 1:
                raise
            print(f"Suite {name} skipped: {exc}", file=sys.stderr)
    payload = {
        "universe_params": universe.params,
        "universe_size": len(universe),
        "passed": all(report.passed for report in reports),
        "reports": [report.to_json() for report in reports],
    }
    if args.report is not None:
        args.report.parent.mkdir(parents=True, exist_ok=True)
        args.report.write_text(json.dumps(payload, ensure_ascii=False, indent=2), encoding="utf-8")
        print(f"Report written to {args.report}", file=sys.stderr)
    _emit(args, payload, "\n\n".join(report.render_table() for report in reports))
    return EXIT_HOLDS if payload["passed"] else EXIT_FAILS


def cmd_export(args: argparse.Namespace) -> int:
    if args.dot and args.json:
        raise UsageError("--dot and --json are mutually exclusive")
    processes = [load_process(text) for text in args.terms]
    merged, roots = merge_processes(processes, budget=args.state_budget)
    lts, mapping = restrict_reachable(merged, roots)
    roots = [mapping[root] for root in roots]
    if args.product is not None:
        if args.env is None:
            raise UsageError("--product needs --env")
        env = load_process(args.env)
        build = join_lts if args.product == "join" else joindot_lts
        product = build(lts, env.lts, [(root, env.root) for root in roots], budget=args.state_budget)
        roots = [product.state_of(root, env.root) for root in roots]
        lts = product
    elif args.env is not None:
        raise UsageError("--env is only meaningful with --product")
    text = to_json(lts, indent=2) + "\n" if args.json else to_dot(lts, roots)
    if args.output is not None:
        args.output.parent.mkdir(parents=True, exist_ok=True)
        args.output.write_text(text, encoding="utf-8")
        print(f"Wrote {lts.num_states} states to {args.output}", file=sys.stderr)
    else:
        sys.stdout.write(text)
    return EXIT_HOLDS


def cmd_distinguish(args: argparse.Namespace) -> int:
    left, right = load_process(args.left), load_process(args.right)
    merged, roots = merge_processes([left, right])
    lts, mapping = restrict_reachable(merged, roots)
    s, t = mapping[roots[0]], mapping[roots[1]]
    chain = RefinementChain(lts, symmetric=(args.rel == "bisim"))
    if chain.related(s, t):
        symbol = RELATION_SYMBOLS[args.rel]
        _emit(args, {"relation": args.rel, "related": True, "formula": None},
              f"{left.label} {symbol} {right.label}: no distinguishing formula exists")
        return EXIT_FAILS
    phi = chain.distinguish(s, t)
    payload = {
        "relation": args.rel,
        "related": False,
        "formula": format_formula(phi),
        "depth": chain.separation_depth(s, t),
    }
    _emit(args, payload, format_formula(phi))
    return EXIT_HOLDS


def cmd_universe(args: argparse.Namespace) -> int:
    universe = _build_universe(args)
    classes = bisim_partition(universe.lts)
    labels = [universe.label(i) for i in range(len(universe))]
    payload = {
        "params": universe.params,
        "size": len(universe),
        "states": universe.lts.num_states,
        "classes": len({classes[root] for root in universe.roots}),
        "processes": labels,
    }
    _emit(args, payload, "\n".join(labels + [f"{len(universe)} processes, {universe.lts.num_states} states"]))
    return EXIT_HOLDS


COMMANDS = {
    "check": cmd_check,
    "eval": cmd_eval,
    "examples": cmd_examples,
    "experiment": cmd_experiment,
    "export": cmd_export,
    "distinguish": cmd_distinguish,
    "universe": cmd_universe,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_HOLDS
    except (OSError, UnicodeDecodeError, tomllib.TOMLDecodeError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=getattr(logging, args.log_level), format="%(asctime)s [%(levelname)s] %(message)s")
    try:
        if args.state_budget is not None:
            set_state_budget(args.state_budget)
        if args.workers < 1:
            raise UsageError("--workers must be at least 1")
        return COMMANDS[args.command](args)
    except BudgetExceededError as exc:
        print(f"Budget exceeded: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (LtsError, UsageError, OSError) as exc:
        print(f"Error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    finally:
        set_state_budget(None)


if __name__ == "__main__":
    sys.exit(main())
