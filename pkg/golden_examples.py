"""Registry of golden cases replayed by ``ji_checker.py examples``.

Every case builds its processes from term text, evaluates one library call and
compares the result against a fixed expectation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from discrimination import Universe, check_larsen_forward, containment_witness, relation_matrix, simulates
from equivalence import bisimilarity_pr
from interaction import join, join_lts, joindot_lts
from lts_core import ContractError, LtsError, Process, is_deterministic, merge_processes, restrict_reachable, successors
from param_relations import (
    EnvironmentRelations,
    explain_param_mismatch,
    ji_param_bisim,
    ji_param_sim,
    ji_param_sim_equiv,
    param_bisim_direct,
    param_bisim_via_joindot,
)
from process_syntax import compile_text

logger = logging.getLogger(__name__)

GROUPS = ("nondet-env", "sim-equiv-gap", "environments", "b-vs-0")
GROUP_ALIASES = {"fig1": "nondet-env"}


@dataclass
class Example:
    name: str
    group: str
    description: str
    run: Callable[[], Any]
    expected: Any


@dataclass
class ExampleResult:
    example: Example
    actual: Any = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and self.actual == self.example.expected

    def to_json(self) -> Dict[str, Any]:
        return {
            "name": self.example.name,
            "group": self.example.group,
            "description": self.example.description,
            "expected": self.example.expected,
            "actual": self.actual,
            "error": self.error,
            "passed": self.passed,
        }


def _procs(*texts: str) -> List[Process]:
    return [compile_text(text) for text in texts]


def _nondet_env_triple() -> Tuple[Process, Process, Process]:
    p, q, e = _procs("a.b", "a.b + a", "a.b + a")
    return p, e, q


def _a_successor_labels(text: str) -> List[str]:
    proc = compile_text(text)
    return sorted(proc.lts.label(t) for t in successors(proc.lts, proc.root, "a"))


def _join_root_pairs(proc_text: str, env_text: str) -> List[str]:
    proc, env = _procs(proc_text, env_text)
    product = join_lts(proc.lts, env.lts, [(proc.root, env.root)])
    pairs = []
    for t in successors(product, 0, "a"):
        left, right = product.component_of(t)
        pairs.append(f"({proc.lts.label(left)}, {env.lts.label(right)})")
    return sorted(pairs)


def _joindot_root_shape(proc_text: str, env_text: str) -> Dict[str, int]:
    proc, env = _procs(proc_text, env_text)
    product = joindot_lts(proc.lts, env.lts, [(proc.root, env.root)])
    return {product.action_names[act]: len(targets) for act, targets in sorted(product.out(0).items())}


def _joins_bisimilar(p: Process, e: Process, q: Process) -> bool:
    merged, roots = merge_processes([join(p, e), join(q, e)])
    small, mapping = restrict_reachable(merged, roots)
    return bisimilarity_pr(small, small).contains(mapping[roots[0]], mapping[roots[1]])


def _nondet_env_trace() -> List[Tuple[str, ...]]:
    p, e, q = _nondet_env_triple()
    trace, process_lts, env_lts, p_root, env_root, q_root = explain_param_mismatch(p, e, q, "bisim")
    if not trace.replay(process_lts, env_lts, p_root, env_root, q_root):
        raise ContractError("mismatch trace does not replay")

    def show(lts, move) -> str:
        src, action, tgt = move
        return f"{lts.label(src)} -{action}-> {lts.label(tgt)}"

    rows = [(show(env_lts, s.env), show(process_lts, s.left), show(process_lts, s.right)) for s in trace.steps]
    rows.append((show(env_lts, trace.unmatched.env), trace.unmatched.side, show(process_lts, trace.unmatched.move)))
    return rows


def _discr_leq(e_text: str, f_text: str, mode: str) -> Tuple[bool, Optional[List[str]]]:
    e, f = _procs(e_text, f_text)
    members = _procs("a.b", "a.b + a")
    merged, roots = merge_processes(members)
    rows = {}
    for name, env in (("e", e), ("f", f)):
        batch = EnvironmentRelations(merged, env.lts, env.root, roots=roots)
        rows[name] = relation_matrix(batch, roots, mode)
    witness = containment_witness(rows["f"], rows["e"])
    if witness is None:
        return True, None
    return False, [merged.label(roots[witness[0]]), merged.label(roots[witness[1]])]


def _larsen_forward_pair(e_text: str, f_text: str) -> Tuple[bool, bool, bool]:
    e, f = _procs(e_text, f_text)
    merged, roots = merge_processes(_procs("a.b", "a.b + a"))
    report = check_larsen_forward(Universe(merged, tuple(roots), {}), [(e, f)])
    row = report.pairs[0]
    return row["sim_leq"], row["discr_leq"], report.passed


EXAMPLES: Tuple[Example, ...] = (
    Example("nondet-env-successors", "nondet-env", "a-successors of a.b + a",
            lambda: _a_successor_labels("a.b + a"), ["0", "b"]),
    Example("nondet-env-two-a-moves", "nondet-env", "a.b + a has two a-transitions",
            lambda: is_deterministic(*compile_text("a.b + a")), False),
    Example("nondet-env-join-p", "nondet-env", "a-successors of (a.b) & (a.b + a)",
            lambda: _join_root_pairs("a.b", "a.b + a"), ["(b, 0)", "(b, b)"]),
    Example("nondet-env-join-q", "nondet-env", "a-successors of (a.b + a) & (a.b + a)",
            lambda: _join_root_pairs("a.b + a", "a.b + a"), ["(0, 0)", "(0, b)", "(b, 0)", "(b, b)"]),
    Example("nondet-env-joindot-p", "nondet-env", "root of (a.b) &• (a.b + a)",
            lambda: _joindot_root_shape("a.b", "a.b + a"), {"a@0": 1, "a@b": 1}),
    Example("nondet-env-joindot-q", "nondet-env", "root of (a.b + a) &• (a.b + a)",
            lambda: _joindot_root_shape("a.b + a", "a.b + a"), {"a@0": 2, "a@b": 2}),
    Example("nondet-env-param-bisim", "nondet-env", "a.b ~_e a.b + a for e = a.b + a",
            lambda: param_bisim_direct(*_nondet_env_triple()).related, False),
    Example("nondet-env-param-bisim-joindot", "nondet-env", "a.b ~_e a.b + a through &• products",
            lambda: param_bisim_via_joindot(*_nondet_env_triple()).related, False),
    Example("nondet-env-joins-bisimilar", "nondet-env", "p & e ~ q & e",
            lambda: _joins_bisimilar(*_nondet_env_triple()), True),
    Example("nondet-env-ji-bisim", "nondet-env", "a.b ~ji_e a.b + a for e = a.b + a",
            lambda: ji_param_bisim(*_nondet_env_triple()).related, True),
    Example("nondet-env-mismatch-trace", "nondet-env", "env a->b with q a->0, then b unanswered",
            _nondet_env_trace, [("a.b + a -a-> b", "a.b -a-> b", "a.b + a -a-> 0"), ("b -b-> 0", "left", "b -b-> 0")]),
    Example("sim-equiv-gap-ji-bisim", "sim-equiv-gap", "a.b ~ji_e a.b + a for e = a.b",
            lambda: ji_param_bisim(*_procs("a.b", "a.b", "a.b + a")).related, False),
    Example("sim-equiv-gap-ji-sim-equiv", "sim-equiv-gap", "a.b ~=ji_e a.b + a for e = a.b",
            lambda: ji_param_sim_equiv(*_procs("a.b", "a.b", "a.b + a")).related, True),
    Example("sim-equiv-gap-ji-sim", "sim-equiv-gap", "a.b <=ji_e a.b + a for e = a.b",
            lambda: ji_param_sim(*_procs("a.b", "a.b", "a.b + a")).related, True),
    Example("environments-sim", "environments", "a.b <= a.b + a",
            lambda: simulates(*_procs("a.b", "a.b + a")), True),
    Example("environments-larsen", "environments", "a.b discriminates at most as much as a.b + a for ~_e",
            lambda: _discr_leq("a.b", "a.b + a", "parambisim"), (True, None)),
    Example("environments-larsen-forward", "environments", "a.b <= a.b + a implies the ~_e containment",
            lambda: _larsen_forward_pair("a.b", "a.b + a"), (True, True, True)),
    Example("environments-ji-bisim", "environments", "~ji_f not contained in ~ji_e for e = a.b, f = a.b + a",
            lambda: _discr_leq("a.b", "a.b + a", "jiparambisim"), (False, ["a.b", "a.b + a"])),
    Example("b-vs-0", "b-vs-0", "b ~_e 0 for e = b",
            lambda: param_bisim_direct(*_procs("b", "b", "0")).related, False),
)


def select(only: Sequence[str] = ()) -> List[Example]:
    """Examples whose group or name is listed in ``only``; everything when empty."""
    wanted = {GROUP_ALIASES.get(name, name) for name in only}
    unknown = wanted - set(GROUPS) - {example.name for example in EXAMPLES}
    if unknown:
        raise KeyError(f"Unknown example group(s) or name(s): {sorted(unknown)}; groups are {list(GROUPS)}")
    return [ex for ex in EXAMPLES if not wanted or ex.group in wanted or ex.name in wanted]


def run_examples(only: Sequence[str] = ()) -> List[ExampleResult]:
    results = []
    for example in select(only):
        result = ExampleResult(example)
        try:
            result.actual = example.run()
        except LtsError as exc:
            result.error = f"{type(exc).__name__}: {exc}"
        if not result.passed:
            logger.warning(f"Example {example.name} failed: expected {example.expected!r}, got {result.actual!r}")
        results.append(result)
    return results


def render_table(results: Sequence[ExampleResult]) -> str:
    width = max((len(r.example.name) for r in results), default=4)
    lines = [f"{'example':<{width}}  {'group':<12}  result  description"]
    for r in results:
        status = "PASS" if r.passed else "FAIL"
        lines.append(f"{r.example.name:<{width}}  {r.example.group:<12}  {status:<6}  {r.example.description}")
        if not r.passed:
            lines.append(f"{'':<{width}}  expected {r.example.expected!r}, got {r.error or repr(r.actual)}")
    passed = sum(r.passed for r in results)
    lines.append(f"{passed}/{len(results)} passed")
    return "\n".join(lines)
