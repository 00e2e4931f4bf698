"""Process universes and the discrimination-preorder experiment suites.

Environment e discriminates at most as much as f (``e ⊑ f``) for a relation
family R when ``R_f ⊆ R_e`` over all pairs of a universe. The suites compare
this order with the simulation preorder and cross-check the relation
algorithms against one another.
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from equivalence import RefinementChain, bisimilarity, bisimilarity_pr, dedup_up_to_bisimilarity, iter_bits, transpose
from hml_formulas import ModelChecker, enumerate_positive, format_formula
from interaction import join, join_lts, universal_process
from lts_core import (
    InputDomainError,
    Lts,
    Process,
    disjoint_union,
    is_deterministic,
    merge_processes,
    restrict_reachable,
)
from param_relations import EnvironmentRelations, check_param
from process_syntax import close_under_join, compile_many, compile_text, enumerate_terms

logger = logging.getLogger(__name__)

# mode -> (relation decided per environment, post-processing of its matrix)
MODES: Dict[str, Tuple[str, str]] = {
    "parambisim": ("param-bisim-joindot", "plain"),
    "paramsim": ("param-sim-joindot", "plain"),
    "paramsimequiv": ("param-sim-joindot", "equiv"),
    "jiparambisim": ("ji-bisim", "plain"),
    "jiparamsim": ("ji-sim", "plain"),
    "jiparamsimequiv": ("ji-sim", "equiv"),
    "jicansim": ("ji-sim", "converse"),
}

# (p, q, e) triples showing that param-bisim ⊂ ji-bisim and ji-bisim ⊂ ji-sim-equiv are strict
STRICTNESS_WITNESSES: Tuple[Tuple[str, str, str, str, str], ...] = (
    ("a.b", "a.b + a", "a.b + a", "param-bisim", "ji-bisim"),
    ("a.b", "a.b + a", "a.b", "ji-bisim", "ji-sim-equiv"),
)


@dataclass
class Universe:
    """Processes pairwise non-bisimilar, stored as roots of one shared LTS."""

    lts: Lts
    roots: Tuple[int, ...]
    params: Dict[str, Any]

    def __len__(self) -> int:
        return len(self.roots)

    @property
    def processes(self) -> List[Process]:
        return [Process(self.lts, root) for root in self.roots]

    def label(self, index: int) -> str:
        return self.lts.label(self.roots[index])

    def find(self, label: str) -> Optional[int]:
        for index, root in enumerate(self.roots):
            if self.lts.label(root) == label:
                return index
        return None


def build_universe(
    alphabet: Sequence[str],
    max_term_size: int,
    join_rounds: int = 0,
    include_universal: bool = False,
    *,
    budget: Optional[int] = None,
) -> Universe:
    names = list(dict.fromkeys(alphabet))
    terms = enumerate_terms(names, max_term_size)
    lts, roots = compile_many(terms, alphabet=names, budget=budget)
    members = [Process(lts, root) for root in roots]
    if include_universal:
        members.append(universal_process(names))
    members = dedup_up_to_bisimilarity(members, budget=budget)
    members = close_under_join(members, join_rounds, budget=budget)
    merged, merged_roots = merge_processes(members, budget=budget)
    shared, mapping = restrict_reachable(merged, merged_roots)
    params = {
        "alphabet": names,
        "max_term_size": max_term_size,
        "join_rounds": join_rounds,
        "include_universal": include_universal,
    }
    universe = Universe(shared, tuple(mapping[root] for root in merged_roots), params)
    logger.info(
        f"Universe over {names} (size <= {max_term_size}, join rounds {join_rounds}, "
        f"universal {include_universal}): {len(universe)} processes, {shared.num_states} states"
    )
    return universe


def relation_matrix(batch: EnvironmentRelations, members: Sequence[int], mode: str) -> List[int]:
    """Row i has bit j iff the mode's relation holds for (members[i], members[j])."""
    if mode not in MODES:
        raise InputDomainError(f"Unknown discrimination mode {mode!r}; choose from {list(MODES)}")
    name, shape = MODES[mode]
    rows = batch.matrix(name, members)
    if shape == "equiv":
        columns = transpose(rows, len(members))
        rows = [a & b for a, b in zip(rows, columns)]
    elif shape == "converse":
        rows = transpose(rows, len(members))
    return rows


def containment_witness(rows_f: Sequence[int], rows_e: Sequence[int]) -> Optional[Tuple[int, int]]:
    """First (i, j) related by f but not by e, or None when R_f ⊆ R_e."""
    for i, (row_f, row_e) in enumerate(zip(rows_f, rows_e)):
        extra = row_f & ~row_e
        if extra:
            return i, next(iter_bits(extra))
    return None


class _Context:
    """Per-environment batch objects and matrices over one universe, computed once."""

    def __init__(self, universe: Universe, workers: int = 1, budget: Optional[int] = None) -> None:
        self.universe = universe
        self.workers = max(1, workers)
        self.budget = budget
        self._batches: Dict[Tuple[int, int], EnvironmentRelations] = {}
        self._matrices: Dict[Tuple[int, int, str], List[int]] = {}
        self._sim_chain: Optional[RefinementChain] = None

    def _key(self, env: Process) -> Tuple[int, int]:
        return id(env.lts), env.root

    def batch(self, env: Process) -> EnvironmentRelations:
        key = self._key(env)
        if key not in self._batches:
            self._batches[key] = EnvironmentRelations(
                self.universe.lts, env.lts, env.root, roots=self.universe.roots, budget=self.budget
            )
        return self._batches[key]

    def matrix(self, env: Process, mode: str) -> List[int]:
        key = (*self._key(env), mode)
        if key not in self._matrices:
            self._matrices[key] = relation_matrix(self.batch(env), self.universe.roots, mode)
        return self._matrices[key]

    def prepare(self, envs: Sequence[Process], modes: Sequence[str]) -> None:
        """Fill matrices for every env, in parallel when workers > 1."""
        pending = [env for env in envs if any((*self._key(env), mode) not in self._matrices for mode in modes)]
        if not pending:
            return

        def work(env: Process) -> Dict[str, List[int]]:
            batch = self.batch(env)
            return {mode: relation_matrix(batch, self.universe.roots, mode) for mode in modes}

        if self.workers == 1:
            for env in pending:
                for mode, rows in work(env).items():
                    self._matrices[(*self._key(env), mode)] = rows
            return
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            future_to_env = {executor.submit(work, env): env for env in pending}
            for future in as_completed(future_to_env):
                env = future_to_env[future]
                for mode, rows in future.result().items():
                    self._matrices[(*self._key(env), mode)] = rows

    def sim_leq(self, e: Process, f: Process) -> bool:
        if e.lts is self.universe.lts and f.lts is self.universe.lts:
            if self._sim_chain is None:
                self._sim_chain = RefinementChain(self.universe.lts, symmetric=False)
            return self._sim_chain.related(e.root, f.root)
        return simulates(e, f)

    def bisimilar(self, e: Process, f: Process) -> bool:
        merged, (re, rf) = merge_processes([e, f])
        small, mapping = restrict_reachable(merged, [re, rf])
        return bisimilarity_pr(small, small).contains(mapping[re], mapping[rf])


def simulates(e: Process, f: Process) -> bool:
    """True iff f simulates e."""
    merged, (re, rf) = merge_processes([e, f])
    small, mapping = restrict_reachable(merged, [re, rf])
    return RefinementChain(small, symmetric=False).related(mapping[re], mapping[rf])


def discriminates_leq(e: Process, f: Process, universe: Universe, relation_mode: str) -> bool:
    """True iff every universe pair related under f is related under e."""
    context = _Context(universe)
    return containment_witness(context.matrix(f, relation_mode), context.matrix(e, relation_mode)) is None


def universe_env_pairs(universe: Universe) -> List[Tuple[Process, Process]]:
    members = universe.processes
    return [(e, f) for e in members for f in members]


@dataclass
class SuiteReport:
    name: str
    mode: str
    universe_params: Dict[str, Any]
    pairs: List[Dict[str, Any]] = field(default_factory=list)
    violations: List[Dict[str, Any]] = field(default_factory=list)
    findings: List[Dict[str, Any]] = field(default_factory=list)
    checked: int = 0

    @property
    def passed(self) -> bool:
        return not self.violations

    def to_json(self) -> Dict[str, Any]:
        return {
            "suite": self.name,
            "mode": self.mode,
            "universe_params": self.universe_params,
            "checked": self.checked,
            "passed": self.passed,
            "pairs": self.pairs,
            "violations": self.violations,
            "findings": self.findings,
        }

    def render_table(self, max_rows: int = 40) -> str:
        lines = [f"== {self.name} [{self.mode}] checked={self.checked} "
                 f"violations={len(self.violations)} findings={len(self.findings)} "
                 f"{'PASS' if self.passed else 'FAIL'}"]
        if self.pairs:
            width = max(8, max(len(str(row.get("e", ""))) for row in self.pairs[:max_rows]))
            lines.append(f"  {'e':<{width}}  {'f':<{width}}  sim_leq  discr_leq  witness")
            for row in self.pairs[:max_rows]:
                witness = row.get("witness")
                shown = f"({witness[0]}, {witness[1]})" if witness else "-"
                lines.append(
                    f"  {row['e']:<{width}}  {row['f']:<{width}}  {str(row['sim_leq']):<7}  "
                    f"{str(row['discr_leq']):<9}  {shown}"
                )
            if len(self.pairs) > max_rows:
                lines.append(f"  ... {len(self.pairs) - max_rows} more pair(s) in the JSON report")
        for violation in self.violations[:max_rows]:
            lines.append(f"  VIOLATION {violation}")
        for finding in self.findings[:max_rows]:
            lines.append(f"  finding {finding}")
        return "\n".join(lines)


def _pair_label(universe: Universe, witness: Optional[Tuple[int, int]]) -> Optional[List[str]]:
    if witness is None:
        return None
    return [universe.label(witness[0]), universe.label(witness[1])]


def _env_list(pairs: Sequence[Tuple[Process, Process]]) -> List[Process]:
    seen: Dict[Tuple[int, int], Process] = {}
    for e, f in pairs:
        seen.setdefault((id(e.lts), e.root), e)
        seen.setdefault((id(f.lts), f.root), f)
    return list(seen.values())


def check_larsen_forward(
    universe: Universe,
    env_pairs: Optional[Sequence[Tuple[Process, Process]]] = None,
    *,
    workers: int = 1,
    budget: Optional[int] = None,
) -> SuiteReport:
    """e <= f must imply e ⊑ f for ~_e; converse failures are findings, never violations."""
    pairs = list(env_pairs) if env_pairs is not None else universe_env_pairs(universe)
    context = _Context(universe, workers, budget)
    context.prepare(_env_list(pairs), ["parambisim"])
    report = SuiteReport("larsen-forward", "parambisim", universe.params)
    for e, f in pairs:
        sim = context.sim_leq(e, f)
        witness = containment_witness(context.matrix(f, "parambisim"), context.matrix(e, "parambisim"))
        discr = witness is None
        row = {"e": e.label, "f": f.label, "sim_leq": sim, "discr_leq": discr,
               "witness": _pair_label(universe, witness)}
        report.pairs.append(row)
        report.checked += 1
        if sim and not discr:
            report.violations.append(row)
        elif discr and not sim:
            report.findings.append({"kind": "converse-failure", "e": e.label, "f": f.label})
    logger.info(f"larsen-forward: {report.checked} pairs, {len(report.violations)} violation(s)")
    return report


def check_jisim_theorem(
    universe: Universe,
    env_pairs: Optional[Sequence[Tuple[Process, Process]]] = None,
    *,
    workers: int = 1,
    budget: Optional[int] = None,
) -> SuiteReport:
    """e <= f iff e ⊑ f, for <=ji_e, ~=ji_e and >=ji_e, both directions asserted."""
    if not universe.params.get("include_universal") or universe.params.get("join_rounds", 0) < 1:
        raise InputDomainError(
            "The ji-simulation theorem needs a universe with the universal process and at least one join round"
        )
    pairs = list(env_pairs) if env_pairs is not None else universe_env_pairs(universe)
    modes = ("jiparamsim", "jiparamsimequiv", "jicansim")
    context = _Context(universe, workers, budget)
    context.prepare(_env_list(pairs), modes)
    report = SuiteReport("jisim-theorem", ",".join(modes), universe.params)
    for e, f in pairs:
        sim = context.sim_leq(e, f)
        row: Dict[str, Any] = {"e": e.label, "f": f.label, "sim_leq": sim}
        for mode in modes:
            witness = containment_witness(context.matrix(f, mode), context.matrix(e, mode))
            discr = witness is None
            if mode == "jiparamsim":
                row["discr_leq"] = discr
                row["witness"] = _pair_label(universe, witness)
            else:
                row[f"discr_leq_{mode}"] = discr
            if discr != sim:
                report.violations.append({"e": e.label, "f": f.label, "mode": mode, "sim_leq": sim,
                                          "discr_leq": discr, "witness": _pair_label(universe, witness)})
        report.pairs.append(row)
        report.checked += 1
    logger.info(f"jisim-theorem: {report.checked} pairs, {len(report.violations)} violation(s)")
    return report


def check_lemma_aux1(
    env_pairs: Sequence[Tuple[Process, Process]],
    *,
    workers: int = 1,
    universe_params: Optional[Dict[str, Any]] = None,
) -> SuiteReport:
    """e <= f & e iff e <= f, for every supplied pair."""
    report = SuiteReport("lemma-aux1", "sim", universe_params or {})

    def work(pair: Tuple[Process, Process]) -> Tuple[bool, bool]:
        e, f = pair
        return simulates(e, join(f, e)), simulates(e, f)

    pairs = list(env_pairs)
    results: Dict[int, Tuple[bool, bool]] = {}
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            future_to_index = {executor.submit(work, pair): index for index, pair in enumerate(pairs)}
            for future in as_completed(future_to_index):
                results[future_to_index[future]] = future.result()
    else:
        results = {index: work(pair) for index, pair in enumerate(pairs)}
    for index, (e, f) in enumerate(pairs):
        with_join, plain = results[index]
        report.checked += 1
        report.pairs.append({"e": e.label, "f": f.label, "sim_leq": plain, "discr_leq": with_join, "witness": None})
        if with_join != plain:
            report.violations.append({"e": e.label, "f": f.label, "e<=f&e": with_join, "e<=f": plain})
    logger.info(f"lemma-aux1: {report.checked} pairs, {len(report.violations)} violation(s)")
    return report


def search_open_problem_p2(
    universe: Universe,
    env_pairs: Optional[Sequence[Tuple[Process, Process]]] = None,
    *,
    workers: int = 1,
    budget: Optional[int] = None,
) -> SuiteReport:
    """Pairs whose ~ji relations agree over the universe, and whether the envs are bisimilar.

    Findings only: agreement without bisimilarity is a candidate answer to the
    open question, disagreement despite bisimilarity would refute the easy direction.
    """
    pairs = list(env_pairs) if env_pairs is not None else universe_env_pairs(universe)
    context = _Context(universe, workers, budget)
    context.prepare(_env_list(pairs), ["jiparambisim"])
    report = SuiteReport("p2-search", "jiparambisim", universe.params)
    for e, f in pairs:
        same = context.matrix(e, "jiparambisim") == context.matrix(f, "jiparambisim")
        bisimilar = context.bisimilar(e, f)
        report.checked += 1
        if same:
            report.pairs.append({"e": e.label, "f": f.label, "sim_leq": bisimilar, "discr_leq": True, "witness": None})
            if not bisimilar:
                report.findings.append({"kind": "equal-relations-not-bisimilar", "e": e.label, "f": f.label})
        elif bisimilar:
            report.findings.append({"kind": "bisimilar-but-relations-differ", "e": e.label, "f": f.label})
    if any(item["kind"] == "equal-relations-not-bisimilar" for item in report.findings):
        logger.warning(f"p2-search found {len(report.findings)} candidate pair(s) worth a closer look")
    return report


def _compare_matrices(
    report: SuiteReport, universe: Universe, env: Process, left: Sequence[int], right: Sequence[int], what: str
) -> None:
    for i, (row_l, row_r) in enumerate(zip(left, right)):
        for j in iter_bits(row_l ^ row_r):
            report.violations.append({
                "check": what, "p": universe.label(i), "q": universe.label(j), "e": env.label,
                "left": bool(row_l >> j & 1), "right": bool(row_r >> j & 1),
            })


def check_oracles(universe: Universe, *, workers: int = 1, budget: Optional[int] = None) -> SuiteReport:
    """Family fixpoint vs &• products, and <=_e vs <=ji_e, on every universe triple."""
    report = SuiteReport("oracles", "param-bisim,param-sim,ji-sim", universe.params)
    members = universe.processes
    names = ("param-bisim", "param-bisim-joindot", "param-sim", "param-sim-joindot", "ji-sim")

    def work(env: Process) -> Dict[str, List[int]]:
        batch = EnvironmentRelations(universe.lts, universe.lts, env.root, roots=universe.roots, budget=budget)
        return {name: batch.matrix(name, universe.roots) for name in names}

    for env, matrices in _per_env(members, work, workers):
        _compare_matrices(report, universe, env, matrices["param-bisim"], matrices["param-bisim-joindot"],
                          "param-bisim direct vs joindot")
        _compare_matrices(report, universe, env, matrices["param-sim"], matrices["param-sim-joindot"],
                          "param-sim direct vs joindot")
        _compare_matrices(report, universe, env, matrices["param-sim"], matrices["ji-sim"],
                          "param-sim vs ji-sim")
        report.checked += len(members) ** 2
    logger.info(f"oracles: {report.checked} triples, {len(report.violations)} disagreement(s)")
    return report


def _per_env(
    envs: Sequence[Process], work: Callable[[Process], Any], workers: int
) -> List[Tuple[Process, Any]]:
    if workers <= 1:
        return [(env, work(env)) for env in envs]
    results: Dict[int, Any] = {}
    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_index = {executor.submit(work, env): index for index, env in enumerate(envs)}
        for future in as_completed(future_to_index):
            results[future_to_index[future]] = future.result()
    return [(env, results[index]) for index, env in enumerate(envs)]


def check_deterministic_envs(universe: Universe, *, workers: int = 1, budget: Optional[int] = None) -> SuiteReport:
    """Under deterministic environments ~_e and ~ji_e coincide."""
    report = SuiteReport("deterministic-envs", "param-bisim,ji-bisim", universe.params)
    envs = [env for env in universe.processes if is_deterministic(env.lts, env.root)]

    def work(env: Process) -> Dict[str, List[int]]:
        batch = EnvironmentRelations(universe.lts, universe.lts, env.root, roots=universe.roots, budget=budget)
        return {name: batch.matrix(name, universe.roots) for name in ("param-bisim", "ji-bisim")}

    for env, matrices in _per_env(envs, work, workers):
        _compare_matrices(report, universe, env, matrices["param-bisim"], matrices["ji-bisim"],
                          "param-bisim vs ji-bisim")
        report.checked += len(universe) ** 2
    report.findings.append({"kind": "deterministic-envs", "count": len(envs)})
    return report


def check_inclusion_chain(universe: Universe, *, workers: int = 1, budget: Optional[int] = None) -> SuiteReport:
    """~_e ⊆ ~ji_e ⊆ ~=ji_e pointwise, and both inclusions strict on the registered triples."""
    report = SuiteReport("inclusion-chain", "param-bisim,ji-bisim,ji-sim-equiv", universe.params)
    chain = ("param-bisim", "ji-bisim", "ji-sim-equiv")

    def work(env: Process) -> Dict[str, List[int]]:
        batch = EnvironmentRelations(universe.lts, universe.lts, env.root, roots=universe.roots, budget=budget)
        return {name: batch.matrix(name, universe.roots) for name in chain}

    for env, matrices in _per_env(universe.processes, work, workers):
        for smaller, larger in zip(chain, chain[1:]):
            for i, (row_s, row_l) in enumerate(zip(matrices[smaller], matrices[larger])):
                for j in iter_bits(row_s & ~row_l):
                    report.violations.append({"check": f"{smaller} ⊆ {larger}", "p": universe.label(i),
                                              "q": universe.label(j), "e": env.label})
        report.checked += len(universe) ** 2

    for p_text, q_text, e_text, smaller, larger in STRICTNESS_WITNESSES:
        p, q, e = (compile_text(text, budget=budget) for text in (p_text, q_text, e_text))
        inner = check_param(smaller, p, e, q, budget=budget).related
        outer = check_param(larger, p, e, q, budget=budget).related
        entry = {"p": p_text, "q": q_text, "e": e_text, smaller: inner, larger: outer}
        if not inner and outer:
            report.findings.append({"kind": "strict", **entry})
        else:
            report.violations.append({"check": f"{smaller} ⊊ {larger}", **entry})
    return report


def check_join_logic_suite(
    universe: Universe, depth: int = 3, width: int = 2, *, budget: Optional[int] = None
) -> SuiteReport:
    """p & q |= phi iff p |= phi and q |= phi, for all member pairs and bounded positive phi."""
    report = SuiteReport("join-logic", f"depth={depth},width={width}", universe.params)
    pairs = [(p, q) for p in universe.roots for q in universe.roots]
    product = join_lts(universe.lts, universe.lts, pairs, budget=budget)
    merged, offset = disjoint_union(universe.lts, product, budget=budget)
    joined = [product.state_of(p, q) + offset for p, q in pairs]
    checker = ModelChecker(merged)
    for phi in enumerate_positive(merged.action_names, depth, width):
        mask = checker.sat(phi)
        for (p, q), j in zip(pairs, joined):
            report.checked += 1
            expected = bool(mask >> p & 1) and bool(mask >> q & 1)
            if bool(mask >> j & 1) != expected:
                report.violations.append({"formula": format_formula(phi), "p": merged.label(p),
                                          "q": merged.label(q), "join": bool(mask >> j & 1)})
    return report


def check_modal_char_suite(
    universe: Universe,
    depth: int = 2,
    width: int = 2,
    *,
    workers: int = 1,
    budget: Optional[int] = None,
) -> SuiteReport:
    """Positive-formula characterization of <=ji_e on every universe triple.

    Related triples must show no formula shared by p and e but missing at q.
    Every unrelated triple must yield a verified witness formula.
    """
    report = SuiteReport("modal-char", f"depth={depth},width={width}", universe.params)
    checker = ModelChecker(universe.lts)
    roots = universe.roots
    formulas = enumerate_positive(universe.lts.action_names, depth, width)
    extents = []
    for phi in formulas:
        mask = checker.sat(phi)
        extents.append(sum(1 << i for i, root in enumerate(roots) if mask >> root & 1))

    def work(env: Process) -> Tuple[EnvironmentRelations, List[int]]:
        batch = EnvironmentRelations(universe.lts, universe.lts, env.root, roots=roots, budget=budget)
        return batch, batch.matrix("ji-sim", roots)

    unseparated = 0
    for k, (env, (batch, rows)) in enumerate(_per_env(universe.processes, work, workers)):
        for phi, extent in zip(formulas, extents):
            if not extent >> k & 1:
                continue
            for i in iter_bits(extent):
                for j in iter_bits(rows[i] & ~extent):
                    report.violations.append({"formula": format_formula(phi), "p": universe.label(i),
                                              "e": env.label, "q": universe.label(j)})
        everything = (1 << len(roots)) - 1
        for i, row in enumerate(rows):
            for j in iter_bits(everything & ~row):
                report.checked += 1
                phi, _ = batch.witness("ji-sim", roots[i], roots[j])
                p_ok = checker.satisfies(roots[i], phi)
                e_ok = checker.satisfies(env.root, phi)
                q_ok = checker.satisfies(roots[j], phi)
                if not (p_ok and e_ok and not q_ok):
                    report.violations.append({"witness": format_formula(phi), "p": universe.label(i),
                                              "e": env.label, "q": universe.label(j)})
                if not any(ext >> i & 1 and ext >> k & 1 and not ext >> j & 1 for ext in extents):
                    unseparated += 1
    report.findings.append({"kind": "unrelated-without-bounded-separator", "count": unseparated})
    return report


def random_lts(rng: random.Random, max_states: int, max_actions: int) -> Lts:
    n = rng.randint(1, max_states)
    k = rng.randint(1, max_actions)
    transitions = {
        (rng.randrange(n), rng.randrange(k), rng.randrange(n)) for _ in range(rng.randint(0, 2 * n))
    }
    return Lts([f"s{i}" for i in range(n)], [chr(ord("a") + i) for i in range(k)], transitions)


def check_pr_parity(
    universe: Optional[Universe] = None,
    count: int = 1000,
    max_states: int = 50,
    max_actions: int = 4,
    seed: int = 0,
) -> SuiteReport:
    """Partition refinement agrees with the naive fixpoint on random LTSs and the universe."""
    report = SuiteReport("pr-parity", "bisim", universe.params if universe is not None else {})
    rng = random.Random(seed)
    samples = [random_lts(rng, max_states, max_actions) for _ in range(count)]
    if universe is not None:
        samples.append(universe.lts)
    for index, lts in enumerate(samples):
        report.checked += 1
        if bisimilarity(lts, lts).rows != bisimilarity_pr(lts, lts).rows:
            report.violations.append({"sample": index, "states": lts.num_states, "seed": seed})
    report.findings.append({"kind": "samples", "random": count, "universe": universe is not None})
    return report


SUITES = (
    "larsen-forward",
    "jisim-theorem",
    "lemma-aux1",
    "p2-search",
    "oracles",
    "deterministic-envs",
    "inclusion-chain",
    "join-logic",
    "modal-char",
    "pr-parity",
)


def run_suite(
    name: str,
    universe: Universe,
    *,
    workers: int = 1,
    budget: Optional[int] = None,
    formula_depth: int = 2,
    formula_width: int = 2,
    random_samples: int = 1000,
    seed: int = 0,
) -> SuiteReport:
    if name == "larsen-forward":
        return check_larsen_forward(universe, workers=workers, budget=budget)
    if name == "jisim-theorem":
        return check_jisim_theorem(universe, workers=workers, budget=budget)
    if name == "lemma-aux1":
        return check_lemma_aux1(universe_env_pairs(universe), workers=workers, universe_params=universe.params)
    if name == "p2-search":
        return search_open_problem_p2(universe, workers=workers, budget=budget)
    if name == "oracles":
        return check_oracles(universe, workers=workers, budget=budget)
    if name == "deterministic-envs":
        return check_deterministic_envs(universe, workers=workers, budget=budget)
    if name == "inclusion-chain":
        return check_inclusion_chain(universe, workers=workers, budget=budget)
    if name == "join-logic":
        return check_join_logic_suite(universe, formula_depth, formula_width, budget=budget)
    if name == "modal-char":
        return check_modal_char_suite(universe, formula_depth, formula_width, workers=workers, budget=budget)
    if name == "pr-parity":
        return check_pr_parity(universe, count=random_samples, seed=seed)
    raise InputDomainError(f"Unknown suite {name!r}; choose from {list(SUITES)} or 'all'")
