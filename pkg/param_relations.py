"""Environment-parameterized relations.

Larsen-style relations (``~_e``, ``<=_e``, ``<=>_e``) are decided twice: by the
environment-indexed family fixpoint and by (bi)similarity of right-determinizing
joins. The join-interaction relations (``~ji_e``, ``<=ji_e``, ``~=ji_e``,
``>=ji_e``) are (bi)similarity of plain join products with a common environment.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple, Union

from equivalence import PreImages, RefinementChain, Relation, Rows, bisim_partition, quotient_by, transpose
from hml_formulas import Formula, act_project, format_formula
from interaction import ProductLts, join_lts, joindot_lts
from lts_core import (
    ContractError,
    InputDomainError,
    Lts,
    Process,
    merge_processes,
    reachable,
    restrict_reachable,
)

logger = logging.getLogger(__name__)

RELATION_SYMBOLS: Dict[str, str] = {
    "bisim": "~",
    "sim": "<=",
    "param-bisim": "~_e",
    "param-sim": "<=_e",
    "param-sim-equiv": "<=>_e",
    "ji-bisim": "~ji_e",
    "ji-sim": "<=ji_e",
    "ji-sim-equiv": "~=ji_e",
    "ji-can-sim": ">=ji_e",
}

# Oracle twins decided through right-determinizing joins.
JOINDOT_RELATIONS = ("param-bisim-joindot", "param-sim-joindot")

ENV_RELATIONS = tuple(name for name in RELATION_SYMBOLS if name not in ("bisim", "sim")) + JOINDOT_RELATIONS

# relation -> (product kind, how its matrix is read off the product quotient)
_PRODUCT_RELATIONS: Dict[str, Tuple[str, str]] = {
    "param-bisim-joindot": ("joindot", "class"),
    "param-sim-joindot": ("joindot", "sim"),
    "ji-bisim": ("join", "class"),
    "ji-sim": ("join", "sim"),
    "ji-sim-equiv": ("join", "equiv"),
    "ji-can-sim": ("join", "converse"),
}

Move = Tuple[int, str, int]


@dataclass(frozen=True)
class TraceStep:
    env: Move
    left: Move
    right: Move


@dataclass(frozen=True)
class Challenge:
    side: str
    env: Move
    move: Move


@dataclass(frozen=True)
class MismatchTrace:
    """Joint moves leading to a challenge the other side cannot answer at all."""

    mode: str
    steps: Tuple[TraceStep, ...]
    unmatched: Challenge

    def to_json(self) -> Dict[str, Any]:
        return {
            "mode": self.mode,
            "steps": [
                [["env", *step.env], ["left", *step.left], ["right", *step.right]] for step in self.steps
            ],
            "unmatched": [["env", *self.unmatched.env], [self.unmatched.side, *self.unmatched.move]],
        }

    def describe(self, process_lts: Lts, env_lts: Lts) -> str:
        def show(lts: Lts, move: Move) -> str:
            src, action, tgt = move
            return f"{lts.label(src)} -{action}-> {lts.label(tgt)}"

        lines = []
        for number, step in enumerate(self.steps, start=1):
            lines.append(
                f"  {number}. env {show(env_lts, step.env)}; left {show(process_lts, step.left)}; "
                f"right {show(process_lts, step.right)}"
            )
        other = "right" if self.unmatched.side == "left" else "left"
        lines.append(
            f"  unmatched: env {show(env_lts, self.unmatched.env)}; {self.unmatched.side} "
            f"{show(process_lts, self.unmatched.move)} has no {self.unmatched.move[1]}-answer on the {other}"
        )
        return "\n".join(lines)

    def replay(self, process_lts: Lts, env_lts: Lts, p: int, e: int, q: int) -> bool:
        """True iff every step is a real joint move and the final challenge is unanswerable."""

        def step_ok(lts: Lts, move: Move, current: int) -> bool:
            src, action, tgt = move
            act = lts.lookup_action(action)
            return src == current and act is not None and tgt in lts.out(src).get(act, ())

        for step in self.steps:
            actions = {step.env[1], step.left[1], step.right[1]}
            if len(actions) != 1:
                return False
            if not (step_ok(env_lts, step.env, e) and step_ok(process_lts, step.left, p)
                    and step_ok(process_lts, step.right, q)):
                return False
            e, p, q = step.env[2], step.left[2], step.right[2]
        challenge = self.unmatched
        if challenge.side not in ("left", "right") or challenge.env[1] != challenge.move[1]:
            return False
        if self.mode == "sim" and challenge.side != "left":
            return False
        challenger, defender = (p, q) if challenge.side == "left" else (q, p)
        if not (step_ok(env_lts, challenge.env, e) and step_ok(process_lts, challenge.move, challenger)):
            return False
        act = process_lts.lookup_action(challenge.move[1])
        return not process_lts.out(defender).get(act, ())


Witness = Union[Formula, MismatchTrace]


@dataclass
class Verdict:
    relation: str
    related: bool
    witness: Optional[Witness] = None
    family: Optional["IndexedFamily"] = None
    note: Optional[str] = None

    @property
    def symbol(self) -> str:
        return RELATION_SYMBOLS.get(self.relation, self.relation)

    def to_json(self) -> Dict[str, Any]:
        if self.witness is None:
            witness: Any = None
        elif isinstance(self.witness, MismatchTrace):
            witness = self.witness.to_json()
        else:
            witness = format_formula(self.witness)
        data: Dict[str, Any] = {"relation": self.relation, "related": self.related, "witness": witness}
        if self.note:
            data["note"] = self.note
        return data


class IndexedFamily:
    """Greatest environment-indexed family of process relations.

    Component ``f`` holds the pairs still related when the environment sits in
    state ``f``. Components exist for the environment states reachable from
    the starting state only. Deletion levels are kept for mismatch traces.
    """

    def __init__(self, process_lts: Lts, env_lts: Lts, env: int, symmetric: bool) -> None:
        self.process_lts = process_lts
        self.env_lts = env_lts
        self.env = env
        self.symmetric = symmetric
        self.env_states = reachable(env_lts, env)
        self.levels: Dict[Tuple[int, int, int], int] = {}
        self.components: Dict[int, Rows] = self._solve()

    def _solve(self) -> Dict[int, Rows]:
        proc, env = self.process_lts, self.env_lts
        n = proc.num_states
        pre = PreImages(proc)
        to_proc = [proc.lookup_action(name) for name in env.action_names]
        current: Dict[int, Rows] = {f: tuple([(1 << n) - 1] * n) for f in self.env_states}
        level = 0
        while True:
            level += 1
            following: Dict[int, Rows] = {}
            for f in self.env_states:
                rows = list(current[f])
                for env_act, env_targets in env.out(f).items():
                    act = to_proc[env_act]
                    if act is None:
                        continue
                    for f2 in env_targets:
                        target_rows = current[f2]
                        cache: Dict[int, int] = {}
                        for p in range(n):
                            if not rows[p]:
                                continue
                            for p2 in proc.out(p).get(act, ()):
                                answer = cache.get(p2)
                                if answer is None:
                                    answer = cache[p2] = pre(act, target_rows[p2])
                                rows[p] &= answer
                if self.symmetric:
                    rows = [a & b for a, b in zip(rows, transpose(rows, n))]
                following[f] = tuple(rows)
            if following == current:
                break
            for f in self.env_states:
                for p, (before, after) in enumerate(zip(current[f], following[f])):
                    removed = before & ~after
                    while removed:
                        low = removed & -removed
                        self.levels[(f, p, low.bit_length() - 1)] = level
                        removed ^= low
            current = following
        logger.debug(
            f"Family fixpoint ({'bisim' if self.symmetric else 'sim'}) over {len(self.env_states)} env "
            f"state(s) and {n} process state(s) stabilized after {level - 1} step(s)"
        )
        return current

    def related(self, f: int, p: int, q: int) -> bool:
        return bool(self.components[f][p] >> q & 1)

    def component(self, f: int) -> Relation:
        if f not in self.components:
            raise InputDomainError(f"Environment state {f} is not reachable from {self.env}")
        return Relation(self.process_lts, self.process_lts, self.components[f])

    def __getitem__(self, f: int) -> Relation:
        return self.component(f)

    def _level(self, f: int, p: int, q: int) -> float:
        return self.levels.get((f, p, q), float("inf"))

    def explain(self, p: int, q: int) -> MismatchTrace:
        """Mismatch trace for an unrelated pair at the starting environment state.

        The challenger picks the move whose best answer was refuted earliest;
        the defender answers with the pair that survived longest (lowest ids
        on ties). Each step strictly lowers the deletion level, and the trace
        ends at a challenge with no answer at all.
        """
        if self.related(self.env, p, q):
            raise ContractError(f"States {p} and {q} are related under environment state {self.env}")
        proc, env = self.process_lts, self.env_lts
        to_proc = {name: proc.lookup_action(name) for name in env.action_names}
        sides = ("left", "right") if self.symmetric else ("left",)
        f = self.env
        steps: List[TraceStep] = []
        while True:
            bound = self.levels[(f, p, q)] - 1
            best = None
            for env_act, env_targets in sorted(env.out(f).items()):
                name = env.action_names[env_act]
                act = to_proc[name]
                if act is None:
                    continue
                for f2 in env_targets:
                    for side in sides:
                        challenger, defender = (p, q) if side == "left" else (q, p)
                        answers = proc.out(defender).get(act, ())
                        for x2 in proc.out(challenger).get(act, ()):
                            scored = []
                            for y2 in answers:
                                pair = (x2, y2) if side == "left" else (y2, x2)
                                scored.append((self._level(f2, *pair), y2))
                            if any(score > bound for score, _ in scored):
                                continue
                            worst = max((score for score, _ in scored), default=0)
                            key = (worst, sides.index(side), env_act, f2, x2)
                            if best is None or key < best[0]:
                                best = (key, side, name, f2, challenger, x2, scored)
            if best is None:
                raise AssertionError(f"no refuting challenge recorded for ({f}, {p}, {q})")
            _, side, name, f2, challenger, x2, scored = best
            if not scored:
                return MismatchTrace(
                    "bisim" if self.symmetric else "sim",
                    tuple(steps),
                    Challenge(side, (f, name, f2), (challenger, name, x2)),
                )
            top = max(score for score, _ in scored)
            y2 = min(y for score, y in scored if score == top)
            p2, q2 = (x2, y2) if side == "left" else (y2, x2)
            steps.append(TraceStep((f, name, f2), (p, name, p2), (q, name, q2)))
            f, p, q = f2, p2, q2


class EnvironmentRelations:
    """Every parameterized relation for one environment state, over all process pairs at once.

    Family fixpoints and products are built lazily on first use. ``roots``
    limits the products to the process states of interest.
    """

    def __init__(
        self,
        process_lts: Lts,
        env_lts: Lts,
        env: int,
        *,
        roots: Optional[Iterable[int]] = None,
        budget: Optional[int] = None,
    ) -> None:
        self.process_lts = process_lts
        self.env_lts = env_lts
        self.env = env_lts.state_index(env)
        self.roots = tuple(roots) if roots is not None else tuple(range(process_lts.num_states))
        self.budget = budget
        self._families: Dict[bool, IndexedFamily] = {}
        self._products: Dict[str, Tuple[ProductLts, List[int], Lts]] = {}
        self._chains: Dict[Tuple[str, bool], RefinementChain] = {}

    def family(self, symmetric: bool) -> IndexedFamily:
        if symmetric not in self._families:
            self._families[symmetric] = IndexedFamily(self.process_lts, self.env_lts, self.env, symmetric)
        return self._families[symmetric]

    def product(self, kind: str) -> Tuple[ProductLts, List[int], Lts]:
        """(product, class of each product state, bisimulation quotient of the product)."""
        if kind not in self._products:
            build = join_lts if kind == "join" else joindot_lts
            product = build(self.process_lts, self.env_lts, [(p, self.env) for p in self.roots], budget=self.budget)
            classes = bisim_partition(product)
            self._products[kind] = (product, classes, quotient_by(product, classes))
        return self._products[kind]

    def product_root(self, kind: str, p: int) -> int:
        product, classes, _ = self.product(kind)
        return classes[product.state_of(p, self.env)]

    def chain(self, kind: str, symmetric: bool) -> RefinementChain:
        key = (kind, symmetric)
        if key not in self._chains:
            self._chains[key] = RefinementChain(self.product(kind)[2], symmetric)
        return self._chains[key]

    def _product_sim(self, kind: str, p: int, q: int) -> bool:
        return self.chain(kind, False).related(self.product_root(kind, p), self.product_root(kind, q))

    def holds(self, name: str, p: int, q: int) -> bool:
        if name == "param-bisim":
            return self.family(True).related(self.env, p, q)
        if name == "param-sim":
            return self.family(False).related(self.env, p, q)
        if name == "param-sim-equiv":
            family = self.family(False)
            return family.related(self.env, p, q) and family.related(self.env, q, p)
        if name == "param-bisim-joindot":
            return self.product_root("joindot", p) == self.product_root("joindot", q)
        if name == "param-sim-joindot":
            return self._product_sim("joindot", p, q)
        if name == "ji-bisim":
            return self.product_root("join", p) == self.product_root("join", q)
        if name == "ji-sim":
            return self._product_sim("join", p, q)
        if name == "ji-sim-equiv":
            return self._product_sim("join", p, q) and self._product_sim("join", q, p)
        if name == "ji-can-sim":
            return self._product_sim("join", q, p)
        raise InputDomainError(f"Unknown parameterized relation {name!r}; choose from {list(ENV_RELATIONS)}")

    def matrix(self, name: str, members: Sequence[int]) -> List[int]:
        """Row i holds bit j iff ``name`` relates members[i] to members[j]."""
        if name in _PRODUCT_RELATIONS:
            return self._product_matrix(name, members)
        rows = []
        for p in members:
            mask = 0
            for j, q in enumerate(members):
                if self.holds(name, p, q):
                    mask |= 1 << j
            rows.append(mask)
        return rows

    def _product_matrix(self, name: str, members: Sequence[int]) -> List[int]:
        kind, shape = _PRODUCT_RELATIONS[name]
        points = [self.product_root(kind, p) for p in members]
        if shape == "class":
            return [sum(1 << j for j, y in enumerate(points) if y == x) for x in points]
        final = self.chain(kind, False).final
        rows = [sum(1 << j for j, y in enumerate(points) if final[x] >> y & 1) for x in points]
        if shape == "sim":
            return rows
        columns = transpose(rows, len(members))
        if shape == "converse":
            return columns
        return [a & b for a, b in zip(rows, columns)]

    def _product_formula(self, kind: str, symmetric: bool, p: int, q: int) -> Formula:
        return self.chain(kind, symmetric).distinguish(self.product_root(kind, p), self.product_root(kind, q))

    def witness(self, name: str, p: int, q: int) -> Tuple[Optional[Witness], Optional[str]]:
        """Explanation for a failed relation with a note on its orientation; (None, None) if it holds."""
        if self.holds(name, p, q):
            return None, None
        if name == "param-bisim":
            return self.family(True).explain(p, q), None
        if name in ("param-sim", "param-sim-equiv"):
            if not self.family(False).related(self.env, p, q):
                return self.family(False).explain(p, q), None
            return self.family(False).explain(q, p), "trace refutes the reverse simulation (q by p)"
        if name in ("param-bisim-joindot", "param-sim-joindot"):
            dotted = self._product_formula("joindot", name == "param-bisim-joindot", p, q)
            note = f"action projection of {format_formula(dotted)}, which holds for p &• e and fails for q &• e"
            return act_project(dotted), note
        if name == "ji-bisim":
            return self._product_formula("join", True, p, q), "holds for p & e, fails for q & e"
        if name in ("ji-sim", "ji-sim-equiv"):
            if not self._product_sim("join", p, q):
                return self._product_formula("join", False, p, q), "holds for p & e, fails for q & e"
            return self._product_formula("join", False, q, p), "holds for q & e, fails for p & e"
        if name == "ji-can-sim":
            return self._product_formula("join", False, q, p), "holds for q & e, fails for p & e"
        raise InputDomainError(f"Unknown parameterized relation {name!r}")


def prepare_triple(
    p: Process, e: Process, q: Process, *, budget: Optional[int] = None
) -> Tuple[EnvironmentRelations, int, int]:
    """Batch object for one (p, e, q) triple over the reachable parts of p and q."""
    merged, roots = merge_processes([p, q], budget=budget)
    small, mapping = restrict_reachable(merged, roots)
    env_lts, env_map = restrict_reachable(e.lts, [e.root])
    p_root, q_root = mapping[roots[0]], mapping[roots[1]]
    batch = EnvironmentRelations(small, env_lts, env_map[e.root], roots=sorted({p_root, q_root}), budget=budget)
    return batch, p_root, q_root


def check_param(
    name: str,
    p: Process,
    e: Process,
    q: Process,
    *,
    explain: bool = False,
    budget: Optional[int] = None,
) -> Verdict:
    if name not in ENV_RELATIONS:
        raise InputDomainError(f"Unknown parameterized relation {name!r}; choose from {list(ENV_RELATIONS)}")
    batch, p_root, q_root = prepare_triple(p, e, q, budget=budget)
    related = batch.holds(name, p_root, q_root)
    verdict = Verdict(name, related)
    if name in ("param-bisim", "param-sim"):
        verdict.family = batch.family(name == "param-bisim")
    if explain and not related:
        verdict.witness, verdict.note = batch.witness(name, p_root, q_root)
    logger.debug(f"{p.label} {RELATION_SYMBOLS.get(name, name)}[{e.label}] {q.label}: {related}")
    return verdict


def param_bisim_direct(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("param-bisim", p, e, q, explain=explain, budget=budget)


def param_bisim_via_joindot(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    verdict = check_param("param-bisim-joindot", p, e, q, explain=explain, budget=budget)
    verdict.relation = "param-bisim"
    return verdict


def param_sim_direct(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("param-sim", p, e, q, explain=explain, budget=budget)


def param_sim_via_joindot(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    verdict = check_param("param-sim-joindot", p, e, q, explain=explain, budget=budget)
    verdict.relation = "param-sim"
    return verdict


def param_sim_equiv(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("param-sim-equiv", p, e, q, explain=explain, budget=budget)


def ji_param_bisim(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("ji-bisim", p, e, q, explain=explain, budget=budget)


def ji_param_sim(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("ji-sim", p, e, q, explain=explain, budget=budget)


def ji_param_sim_equiv(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("ji-sim-equiv", p, e, q, explain=explain, budget=budget)


def ji_param_can_sim(p: Process, e: Process, q: Process, *, explain: bool = False, budget: Optional[int] = None) -> Verdict:
    return check_param("ji-can-sim", p, e, q, explain=explain, budget=budget)


def explain_param_mismatch(p: Process, e: Process, q: Process, mode: str = "bisim", *, budget: Optional[int] = None) -> Tuple[MismatchTrace, Lts, Lts, int, int, int]:
    """Replayable mismatch trace plus the (process LTS, env LTS, p, e, q) it refers to."""
    if mode not in ("bisim", "sim"):
        raise InputDomainError(f"Mismatch mode must be 'bisim' or 'sim', got {mode!r}")
    batch, p_root, q_root = prepare_triple(p, e, q, budget=budget)
    trace = batch.family(mode == "bisim").explain(p_root, q_root)
    return trace, batch.process_lts, batch.env_lts, p_root, batch.env, q_root
