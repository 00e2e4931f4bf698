"""Strong bisimilarity and the simulation preorder.

The greatest-fixpoint refinement over bitmask rows is the reference
algorithm; it keeps every approximant so minimal-depth distinguishing
formulas can be read off. ``bisimilarity_pr`` is the splitter-based
partition refinement fast path and must always agree with the reference.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

from hml_formulas import Diamond, Formula, Neg, formula_key, make_and
from lts_core import (
    ContractError,
    InputDomainError,
    Lts,
    Process,
    StateRef,
    default_state_budget,
    disjoint_union,
    merge_processes,
    restrict_reachable,
)

logger = logging.getLogger(__name__)

Rows = Tuple[int, ...]


def iter_bits(mask: int) -> Iterator[int]:
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


def transpose(rows: Sequence[int], width: int) -> List[int]:
    columns = [0] * width
    for s, mask in enumerate(rows):
        bit = 1 << s
        for t in iter_bits(mask):
            columns[t] |= bit
    return columns


class Relation:
    """Pairs of states of ``left`` x ``right`` stored as one bitmask row per left state."""

    __slots__ = ("left", "right", "rows")

    def __init__(self, left: Lts, right: Lts, rows: Sequence[int]) -> None:
        if len(rows) != left.num_states:
            raise InputDomainError(f"Relation needs {left.num_states} rows, got {len(rows)}")
        self.left = left
        self.right = right
        self.rows: Rows = tuple(rows)

    def contains(self, s: StateRef, t: StateRef) -> bool:
        return bool(self.rows[self.left.state_index(s)] >> self.right.state_index(t) & 1)

    def __contains__(self, pair: Tuple[StateRef, StateRef]) -> bool:
        return self.contains(*pair)

    def __len__(self) -> int:
        return sum(bin(mask).count("1") for mask in self.rows)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.left is other.left and self.right is other.right and self.rows == other.rows

    def __hash__(self) -> int:
        return hash(self.rows)

    def __and__(self, other: "Relation") -> "Relation":
        if self.left is not other.left or self.right is not other.right:
            raise InputDomainError("Relations over different LTSs cannot be intersected")
        return Relation(self.left, self.right, [a & b for a, b in zip(self.rows, other.rows)])

    def __repr__(self) -> str:
        return f"<Relation {self.left.num_states}x{self.right.num_states} pairs={len(self)}>"

    def pairs(self) -> Iterator[Tuple[int, int]]:
        for s, mask in enumerate(self.rows):
            for t in iter_bits(mask):
                yield s, t

    def converse(self) -> "Relation":
        return Relation(self.right, self.left, transpose(self.rows, self.right.num_states))

    def _require_homogeneous(self) -> None:
        if self.left is not self.right:
            raise InputDomainError("Reflexivity, symmetry and transitivity need a relation over one LTS")

    def is_reflexive(self) -> bool:
        self._require_homogeneous()
        return all(mask >> s & 1 for s, mask in enumerate(self.rows))

    def is_symmetric(self) -> bool:
        self._require_homogeneous()
        return list(self.rows) == transpose(self.rows, self.right.num_states)

    def is_transitive(self) -> bool:
        self._require_homogeneous()
        for mask in self.rows:
            for t in iter_bits(mask):
                if self.rows[t] & ~mask:
                    return False
        return True

    def to_json(self) -> List[List[int]]:
        return [[s, t] for s, t in self.pairs()]


class PreImages:
    """``pre_a(M)``: states with an a-successor inside the state set ``M``."""

    def __init__(self, lts: Lts) -> None:
        self.lts = lts
        self._moves: Dict[int, List[Tuple[int, int]]] = {}
        for src in range(lts.num_states):
            for act, targets in lts.out(src).items():
                mask = 0
                for tgt in targets:
                    mask |= 1 << tgt
                self._moves.setdefault(act, []).append((src, mask))

    def __call__(self, act: int, target_mask: int) -> int:
        result = 0
        for src, mask in self._moves.get(act, ()):
            if mask & target_mask:
                result |= 1 << src
        return result


def simulation_step(lts: Lts, pre: PreImages, rows: Sequence[int]) -> List[int]:
    """One forth-refinement: keep (s, t) only if t answers every move of s into ``rows``."""
    cache: Dict[Tuple[int, int], int] = {}
    result = []
    for s in range(lts.num_states):
        mask = rows[s]
        for act, targets in lts.out(s).items():
            for target in targets:
                key = (act, target)
                answer = cache.get(key)
                if answer is None:
                    answer = cache[key] = pre(act, rows[target])
                mask &= answer
                if not mask:
                    break
            if not mask:
                break
        result.append(mask)
    return result


class RefinementChain:
    """Approximants ``R_0 ⊇ R_1 ⊇ ...`` of (bi)similarity on one LTS, ending at the fixpoint.

    ``R_0`` relates every pair; ``R_{k+1}`` is one refinement step applied to ``R_k``.
    """

    def __init__(self, lts: Lts, symmetric: bool) -> None:
        self.lts = lts
        self.symmetric = symmetric
        n = lts.num_states
        pre = PreImages(lts)
        current: Rows = tuple([(1 << n) - 1] * n)
        chain = [current]
        while True:
            stepped = simulation_step(lts, pre, current)
            if symmetric:
                columns = transpose(stepped, n)
                stepped = [a & b for a, b in zip(stepped, columns)]
            following = tuple(stepped)
            if following == current:
                break
            chain.append(following)
            current = following
        self.approximants: List[Rows] = chain
        self.final: Rows = current
        self._formulas: Dict[Tuple[int, int], Formula] = {}
        logger.debug(
            f"{'Bisimulation' if symmetric else 'Simulation'} refinement on {n} states "
            f"stabilized after {len(chain) - 1} step(s)"
        )

    def related(self, s: int, t: int) -> bool:
        return bool(self.final[s] >> t & 1)

    def separation_depth(self, s: int, t: int) -> Optional[int]:
        if self.related(s, t):
            return None
        for depth, rows in enumerate(self.approximants):
            if not rows[s] >> t & 1:
                return depth
        raise AssertionError("unrelated pair missing from every approximant")

    def distinguish(self, s: int, t: int) -> Formula:
        """Formula of minimal modal depth true at ``s`` and false at ``t``.

        Among candidates of that depth the smallest under ``formula_key`` wins.
        """
        if self.related(s, t):
            raise ContractError(f"States {s} and {t} are related; no distinguishing formula exists")
        return self._formula(s, t)

    def _formula(self, s: int, t: int) -> Formula:
        cached = self._formulas.get((s, t))
        if cached is not None:
            return cached
        depth = self.separation_depth(s, t)
        previous = self.approximants[depth - 1]
        out = self.lts.out
        candidates: List[Formula] = []
        for act, targets in out(s).items():
            answers = out(t).get(act, ())
            for s2 in targets:
                if all(not previous[s2] >> t2 & 1 for t2 in answers):
                    body = make_and(self._formula(s2, t2) for t2 in answers)
                    candidates.append(Diamond(self.lts.action_names[act], body))
        if self.symmetric:
            for act, targets in out(t).items():
                answers = out(s).get(act, ())
                for t2 in targets:
                    if all(not previous[t2] >> s2 & 1 for s2 in answers):
                        body = make_and(self._formula(t2, s2) for s2 in answers)
                        candidates.append(Neg(Diamond(self.lts.action_names[act], body)))
        best = min(candidates, key=formula_key)
        self._formulas[(s, t)] = best
        return best


def _union(l: Lts, r: Lts) -> Tuple[Lts, int]:
    if l is r:
        return l, 0
    return disjoint_union(l, r)


def _cross_rows(rows: Sequence[int], l: Lts, r: Lts, offset: int) -> List[int]:
    width = (1 << r.num_states) - 1
    return [(rows[s] >> offset) & width for s in range(l.num_states)]


def _check_preorder(rows: Sequence[int], what: str) -> None:
    if not all(mask >> s & 1 for s, mask in enumerate(rows)):
        raise ContractError(f"{what} is not reflexive")
    for mask in rows:
        for t in iter_bits(mask):
            if rows[t] & ~mask:
                raise ContractError(f"{what} is not transitive")


def _check_equivalence(rows: Sequence[int], what: str) -> None:
    _check_preorder(rows, what)
    if list(rows) != transpose(rows, len(rows)):
        raise ContractError(f"{what} is not symmetric")


def bisim_approximants(l: Lts, r: Lts) -> List[Relation]:
    union, offset = _union(l, r)
    chain = RefinementChain(union, symmetric=True)
    return [Relation(l, r, _cross_rows(rows, l, r, offset)) for rows in chain.approximants]


def sim_approximants(l: Lts, r: Lts) -> List[Relation]:
    union, offset = _union(l, r)
    chain = RefinementChain(union, symmetric=False)
    return [Relation(l, r, _cross_rows(rows, l, r, offset)) for rows in chain.approximants]


def bisimilarity(l: Lts, r: Lts) -> Relation:
    """Largest bisimulation between the states of ``l`` and ``r`` (naive fixpoint)."""
    union, offset = _union(l, r)
    chain = RefinementChain(union, symmetric=True)
    _check_equivalence(chain.final, "bisimilarity")
    return Relation(l, r, _cross_rows(chain.final, l, r, offset))


def simulation_preorder(l: Lts, r: Lts) -> Relation:
    """Largest simulation: ``(s, t)`` is in the result iff t simulates s."""
    union, offset = _union(l, r)
    chain = RefinementChain(union, symmetric=False)
    _check_preorder(chain.final, "simulation preorder")
    return Relation(l, r, _cross_rows(chain.final, l, r, offset))


def simulation_equivalence(l: Lts, r: Lts) -> Relation:
    forward = simulation_preorder(l, r)
    backward = simulation_preorder(r, l).converse()
    return forward & backward


def separation_depth(l: Lts, s: StateRef, r: Lts, t: StateRef, *, symmetric: bool = True) -> Optional[int]:
    """Least k such that (s, t) is outside the k-th approximant, None if related."""
    union, offset = _union(l, r)
    return RefinementChain(union, symmetric).separation_depth(l.state_index(s), r.state_index(t) + offset)


def distinguish_bisim(l: Lts, s: StateRef, r: Lts, t: StateRef) -> Formula:
    union, offset = _union(l, r)
    return RefinementChain(union, symmetric=True).distinguish(l.state_index(s), r.state_index(t) + offset)


def distinguish_sim(l: Lts, s: StateRef, r: Lts, t: StateRef) -> Formula:
    """Positive formula true at ``s`` and false at ``t``; requires that t does not simulate s."""
    union, offset = _union(l, r)
    return RefinementChain(union, symmetric=False).distinguish(l.state_index(s), r.state_index(t) + offset)


def bisim_partition(lts: Lts) -> List[int]:
    """Bisimilarity classes by splitter-based partition refinement.

    Class ids are numbered in order of their smallest state.
    """
    n = lts.num_states
    if n == 0:
        return []
    predecessors: List[Dict[int, List[int]]] = [{} for _ in lts.action_names]
    for src, act, tgt in lts.transitions:
        predecessors[act].setdefault(tgt, []).append(src)

    block_of = [0] * n
    blocks: List[set] = [set(range(n))]
    worklist: deque = deque([frozenset(range(n))])
    while worklist:
        splitter = worklist.popleft()
        for table in predecessors:
            pre = set()
            for s in splitter:
                pre.update(table.get(s, ()))
            if not pre:
                continue
            touched: Dict[int, set] = {}
            for s in pre:
                touched.setdefault(block_of[s], set()).add(s)
            for block, inside in touched.items():
                if len(inside) == len(blocks[block]):
                    continue
                new_block = len(blocks)
                blocks[block] -= inside
                blocks.append(inside)
                for s in inside:
                    block_of[s] = new_block
                worklist.append(frozenset(blocks[block]))
                worklist.append(frozenset(inside))

    renumber: Dict[int, int] = {}
    return [renumber.setdefault(block, len(renumber)) for block in block_of]


def bisimilarity_pr(l: Lts, r: Lts) -> Relation:
    union, offset = _union(l, r)
    classes = bisim_partition(union)
    right_members: Dict[int, int] = {}
    for t in range(r.num_states):
        right_members[classes[t + offset]] = right_members.get(classes[t + offset], 0) | (1 << t)
    return Relation(l, r, [right_members.get(classes[s], 0) for s in range(l.num_states)])


def quotient_by(lts: Lts, classes: Sequence[int]) -> Lts:
    count = max(classes) + 1 if classes else 0
    labels: List[Optional[str]] = [None] * count
    for s, block in enumerate(classes):
        if labels[block] is None:
            labels[block] = lts.label(s)
    transitions = {(classes[src], act, classes[tgt]) for src, act, tgt in lts.transitions}
    return Lts(labels, lts.action_names, transitions, budget=max(count, 1))


def quotient(lts: Lts) -> Tuple[Lts, List[int]]:
    """Bisimulation minimization; the map sends each state to its class state."""
    classes = bisim_partition(lts)
    return quotient_by(lts, classes), classes


def dedup_up_to_bisimilarity(processes: Sequence[Process], *, budget: Optional[int] = None) -> List[Process]:
    """First process of every bisimilarity class, in input order.

    Candidates are compared in batches against minimized representatives so
    no intermediate LTS exceeds the state budget.
    """
    limit = budget if budget is not None else default_state_budget()
    kept: List[Process] = []
    reps_lts: Optional[Lts] = None
    reps_roots: List[int] = []
    batch: List[Process] = []
    batch_sizes: Dict[int, int] = {}

    def flush() -> None:
        nonlocal reps_lts, reps_roots
        if not batch:
            return
        members = [Process(reps_lts, root) for root in reps_roots] if reps_lts is not None else []
        members.extend(batch)
        merged, roots = merge_processes(members, budget=limit)
        small, mapping = restrict_reachable(merged, roots)
        roots = [mapping[root] for root in roots]
        classes = bisim_partition(small)
        old = len(reps_roots)
        seen = {classes[root] for root in roots[:old]}
        new_roots = list(roots[:old])
        for proc, root in zip(batch, roots[old:]):
            if classes[root] not in seen:
                seen.add(classes[root])
                kept.append(proc)
                new_roots.append(root)
        minimized = quotient_by(small, classes)
        reps_lts, remap = restrict_reachable(minimized, [classes[root] for root in new_roots])
        reps_roots = [remap[classes[root]] for root in new_roots]
        batch.clear()
        batch_sizes.clear()

    for proc in processes:
        if id(proc.lts) not in batch_sizes:
            pending = sum(batch_sizes.values()) + (reps_lts.num_states if reps_lts is not None else 0)
            if batch and pending + proc.lts.num_states > limit:
                flush()
            batch_sizes[id(proc.lts)] = proc.lts.num_states
        batch.append(proc)
    flush()
    logger.debug(f"Deduplicated {len(processes)} processes into {len(kept)} bisimilarity classes")
    return kept
