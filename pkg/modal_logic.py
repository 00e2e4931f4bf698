"""Bounded modal-characterization checks.

Each check enumerates positive formulas within (depth, width) bounds and tests
the characterization against the relation computed by the fixpoint
algorithms. A soundness violation means the implementation is wrong; a
missing separating formula within bounds is only "inconclusive".
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence, Tuple

from equivalence import RefinementChain
from hml_formulas import (
    Formula,
    ModelChecker,
    Neg,
    enumerate_negclosure,
    enumerate_positive,
    format_formula,
    is_positive,
)
from interaction import join
from lts_core import ContractError, Process, merge_processes, reachable
from param_relations import prepare_triple

logger = logging.getLogger(__name__)

DEFAULT_DEPTH_CAP = 3


@dataclass
class ConsistencyReport:
    name: str
    consistent: bool
    relation_holds: bool
    checked: int
    violation: Optional[Formula] = None
    separating: Optional[Formula] = None
    witness: Optional[Formula] = None
    inconclusive: bool = False

    def to_json(self) -> Dict[str, Any]:
        def text(phi: Optional[Formula]) -> Optional[str]:
            return None if phi is None else format_formula(phi)

        return {
            "name": self.name,
            "consistent": self.consistent,
            "relation_holds": self.relation_holds,
            "checked": self.checked,
            "violation": text(self.violation),
            "separating": text(self.separating),
            "witness": text(self.witness),
            "inconclusive": self.inconclusive,
        }


def default_bounds(left: Process, right: Process, depth: Optional[int] = None, width: Optional[int] = None) -> Tuple[int, int]:
    """Depth: product of the reachable state counts, capped; width: largest out-degree."""
    if depth is None:
        depth = min(len(reachable(left.lts, left.root)) * len(reachable(right.lts, right.root)), DEFAULT_DEPTH_CAP)
    if width is None:
        width = 1
        for proc in (left, right):
            for s in reachable(proc.lts, proc.root):
                width = max(width, sum(len(targets) for targets in proc.lts.out(s).values()))
    return depth, width


def _checker(processes: Sequence[Process]) -> Tuple[ModelChecker, List[int]]:
    merged, roots = merge_processes(processes)
    return ModelChecker(merged), roots


def witness_formula_paramsim(p: Process, e: Process, q: Process) -> Formula:
    """Positive formula satisfied by p and e but not q, read off the join products."""
    batch, p_root, q_root = prepare_triple(p, e, q)
    if batch.holds("ji-sim", p_root, q_root):
        raise ContractError(f"{p.label} <=ji_e {q.label} holds for e = {e.label}; no witness formula exists")
    phi, _ = batch.witness("ji-sim", p_root, q_root)
    checker, (rp, re, rq) = _checker([p, e, q])
    if not is_positive(phi):
        raise ContractError(f"witness {format_formula(phi)} is not positive")
    if not (checker.satisfies(rp, phi) and checker.satisfies(re, phi) and not checker.satisfies(rq, phi)):
        raise ContractError(f"witness {format_formula(phi)} fails the membership triple")
    return phi


def check_char_paramsim(
    p: Process, e: Process, q: Process, depth: Optional[int] = None, width: Optional[int] = None
) -> ConsistencyReport:
    """Positive formulas shared by p and e must hold at q whenever p <=ji_e q."""
    batch, p_root, q_root = prepare_triple(p, e, q)
    related = batch.holds("ji-sim", p_root, q_root)
    depth, width = default_bounds(p, q, depth, width)
    checker, (rp, re, rq) = _checker([p, e, q])
    report = ConsistencyReport("char-paramsim", True, related, 0)
    for phi in enumerate_positive(checker.lts.action_names, depth, width):
        report.checked += 1
        mask = checker.sat(phi)
        if mask >> rp & 1 and mask >> re & 1 and not mask >> rq & 1:
            if related:
                report.violation = phi
                report.consistent = False
            else:
                report.separating = phi
            break
    if not related:
        report.witness = witness_formula_paramsim(p, e, q)
        report.inconclusive = report.separating is None
    return report


def check_char_parambisim(
    p: Process, e: Process, q: Process, depth: Optional[int] = None, width: Optional[int] = None
) -> ConsistencyReport:
    """For positive phi0 with e |= phi0, p and q must agree on its negation closure whenever p ~_e q."""
    batch, p_root, q_root = prepare_triple(p, e, q)
    related = batch.holds("param-bisim", p_root, q_root)
    depth, width = default_bounds(p, q, depth, width)
    checker, (rp, re, rq) = _checker([p, e, q])
    report = ConsistencyReport("char-parambisim", True, related, 0)
    for phi0 in enumerate_positive(checker.lts.action_names, depth, width):
        if not checker.satisfies(re, phi0):
            continue
        found = None
        for psi in enumerate_negclosure(phi0):
            report.checked += 1
            mask = checker.sat(psi)
            if (mask >> rp & 1) != (mask >> rq & 1):
                found = psi
                break
        if found is not None:
            if related:
                report.violation = found
                report.consistent = False
            else:
                report.separating = found
            break
    if not related:
        report.witness, _ = batch.witness("param-bisim-joindot", p_root, q_root)
        report.inconclusive = report.separating is None
    return report


def check_join_logic(p: Process, q: Process, depth: int, width: int) -> ConsistencyReport:
    """Positive formulas of p & q are exactly those shared by p and q."""
    checker, (rp, rq, rj) = _checker([p, q, join(p, q)])
    report = ConsistencyReport("join-logic", True, True, 0)
    for phi in enumerate_positive(checker.lts.action_names, depth, width):
        report.checked += 1
        mask = checker.sat(phi)
        if bool(mask >> rj & 1) != bool(mask >> rp & 1 and mask >> rq & 1):
            report.violation = phi
            report.consistent = False
            break
    return report


def check_hm_bisim(s: Process, t: Process, depth: Optional[int] = None, width: Optional[int] = None) -> ConsistencyReport:
    """Bisimilar states agree on every formula within bounds; otherwise search for a separating one."""
    checker, (rs, rt) = _checker([s, t])
    chain = RefinementChain(checker.lts, symmetric=True)
    related = chain.related(rs, rt)
    depth, width = default_bounds(s, t, depth, width)
    report = ConsistencyReport("hm-bisim", True, related, 0)
    for phi0 in enumerate_positive(checker.lts.action_names, depth, width):
        for psi in enumerate_negclosure(phi0):
            report.checked += 1
            mask = checker.sat(psi)
            if (mask >> rs & 1) != (mask >> rt & 1):
                if related:
                    report.violation, report.consistent = psi, False
                else:
                    report.separating = psi if mask >> rs & 1 else _negate(psi)
                break
        if report.violation is not None or report.separating is not None:
            break
    if not related:
        report.witness = chain.distinguish(rs, rt)
        report.inconclusive = report.separating is None
    return report


def _negate(phi: Formula) -> Formula:
    return phi.body if isinstance(phi, Neg) else Neg(phi)


def check_hm_sim(s: Process, t: Process, depth: Optional[int] = None, width: Optional[int] = None) -> ConsistencyReport:
    """If t simulates s, every positive formula of s holds at t."""
    checker, (rs, rt) = _checker([s, t])
    chain = RefinementChain(checker.lts, symmetric=False)
    related = chain.related(rs, rt)
    depth, width = default_bounds(s, t, depth, width)
    report = ConsistencyReport("hm-sim", True, related, 0)
    for phi in enumerate_positive(checker.lts.action_names, depth, width):
        report.checked += 1
        mask = checker.sat(phi)
        if mask >> rs & 1 and not mask >> rt & 1:
            if related:
                report.violation, report.consistent = phi, False
            else:
                report.separating = phi
            break
    if not related:
        report.witness = chain.distinguish(rs, rt)
        report.inconclusive = report.separating is None
    return report
