"""Finite labeled transition systems with interned states and actions."""

from __future__ import annotations

import json
import logging
import os
from collections import deque
from typing import Any, Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

logger = logging.getLogger(__name__)

DEFAULT_STATE_BUDGET = 10_000
STATE_BUDGET_ENV = "JI_BISIM_STATE_BUDGET"

_budget_override: Optional[int] = None


class LtsError(Exception):
    """Base class for every error raised by the checker libraries."""


class InputDomainError(LtsError, ValueError):
    """Unknown state or action, malformed input data, or out-of-range bounds."""


class BudgetExceededError(LtsError):
    pass


class ContractError(LtsError):
    """A witness operation was called on inputs for which no witness exists."""


def set_state_budget(budget: Optional[int]) -> None:
    """Set the process-wide state budget (None restores env var / built-in default)."""
    global _budget_override
    if budget is not None and budget < 1:
        raise InputDomainError(f"State budget must be positive, got {budget}")
    _budget_override = budget


def default_state_budget() -> int:
    if _budget_override is not None:
        return _budget_override
    raw = os.environ.get(STATE_BUDGET_ENV)
    if raw is None or not raw.strip():
        return DEFAULT_STATE_BUDGET
    try:
        value = int(raw)
    except ValueError as exc:
        raise InputDomainError(f"{STATE_BUDGET_ENV} must be an integer, got {raw!r}") from exc
    if value < 1:
        raise InputDomainError(f"{STATE_BUDGET_ENV} must be positive, got {value}")
    return value


def check_budget(count: int, budget: Optional[int] = None, what: str = "LTS") -> None:
    limit = budget if budget is not None else default_state_budget()
    if count > limit:
        raise BudgetExceededError(
            f"{what} exceeds the state budget of {limit} states "
            f"(raise it with --state-budget or {STATE_BUDGET_ENV})"
        )


class ActionId(NamedTuple):
    id: int
    name: str


class StateId(NamedTuple):
    id: int
    label: str


Transition = Tuple[int, int, int]
ActionRef = Union[int, str, ActionId]
StateRef = Union[int, StateId]


class Lts:
    """Immutable LTS: states and actions are dense ids, transitions a set of triples.

    Per-state successor tables are built once at construction, so all
    structural queries are lookups. Instances are never mutated afterwards.
    """

    __slots__ = ("_labels", "_actions", "_action_index", "_transitions", "_out")

    def __init__(
        self,
        states: Sequence[str],
        actions: Sequence[str],
        transitions: Iterable[Transition],
        *,
        budget: Optional[int] = None,
    ) -> None:
        labels = tuple(str(label) for label in states)
        names = tuple(str(name) for name in actions)
        check_budget(len(labels), budget)
        index: Dict[str, int] = {}
        for position, name in enumerate(names):
            if name in index:
                raise InputDomainError(f"Duplicate action name in alphabet: {name!r}")
            index[name] = position

        triples = set()
        for src, act, tgt in transitions:
            if not (0 <= src < len(labels) and 0 <= tgt < len(labels)):
                raise InputDomainError(f"Transition {(src, act, tgt)} has an undeclared endpoint")
            if not 0 <= act < len(names):
                raise InputDomainError(f"Transition {(src, act, tgt)} uses an action outside the alphabet")
            triples.add((int(src), int(act), int(tgt)))

        out: List[Dict[int, List[int]]] = [{} for _ in labels]
        for src, act, tgt in sorted(triples):
            out[src].setdefault(act, []).append(tgt)

        self._labels = labels
        self._actions = names
        self._action_index = index
        self._transitions = tuple(sorted(triples))
        self._out: Tuple[Dict[int, Tuple[int, ...]], ...] = tuple(
            {act: tuple(targets) for act, targets in table.items()} for table in out
        )

    def __repr__(self) -> str:
        return (
            f"<{type(self).__name__} states={self.num_states} "
            f"actions={len(self._actions)} transitions={self.num_transitions}>"
        )

    @property
    def states(self) -> Tuple[StateId, ...]:
        return tuple(StateId(i, label) for i, label in enumerate(self._labels))

    @property
    def alphabet(self) -> Tuple[ActionId, ...]:
        return tuple(ActionId(i, name) for i, name in enumerate(self._actions))

    @property
    def transitions(self) -> Tuple[Transition, ...]:
        return self._transitions

    @property
    def num_states(self) -> int:
        return len(self._labels)

    @property
    def num_transitions(self) -> int:
        return len(self._transitions)

    @property
    def state_labels(self) -> Tuple[str, ...]:
        return self._labels

    @property
    def action_names(self) -> Tuple[str, ...]:
        return self._actions

    def state(self, s: StateRef) -> StateId:
        index = self.state_index(s)
        return StateId(index, self._labels[index])

    def state_index(self, s: StateRef) -> int:
        index = s.id if isinstance(s, StateId) else s
        if not isinstance(index, int) or not 0 <= index < len(self._labels):
            raise InputDomainError(f"Unknown state {s!r} (LTS has {len(self._labels)} states)")
        return index

    def action(self, a: ActionRef) -> ActionId:
        index = self.action_index(a)
        return ActionId(index, self._actions[index])

    def action_index(self, a: ActionRef) -> int:
        if isinstance(a, ActionId):
            a = a.id
        if isinstance(a, str):
            found = self._action_index.get(a)
            if found is None:
                raise InputDomainError(f"Unknown action {a!r}; alphabet is {list(self._actions)}")
            return found
        if not isinstance(a, int) or not 0 <= a < len(self._actions):
            raise InputDomainError(f"Unknown action id {a!r}")
        return a

    def lookup_action(self, name: str) -> Optional[int]:
        """Action id for ``name`` or None when the name is not in the alphabet."""
        return self._action_index.get(name)

    def out(self, s: int) -> Dict[int, Tuple[int, ...]]:
        """Enabled actions of state ``s`` mapped to their sorted derivatives."""
        return self._out[s]

    def label(self, s: int) -> str:
        return self._labels[s]


class Process(NamedTuple):
    """A process: an LTS together with a distinguished state."""

    lts: Lts
    root: int

    @property
    def label(self) -> str:
        return self.lts.label(self.root)


def successors(lts: Lts, s: StateRef, a: ActionRef) -> Tuple[int, ...]:
    return lts.out(lts.state_index(s)).get(lts.action_index(a), ())


def permits(lts: Lts, s: StateRef, a: ActionRef) -> bool:
    return bool(successors(lts, s, a))


def reachable(lts: Lts, s: StateRef) -> Tuple[int, ...]:
    return _reachable_from(lts, [lts.state_index(s)])


def _reachable_from(lts: Lts, roots: Iterable[int]) -> Tuple[int, ...]:
    seen = set()
    queue = deque()
    for root in roots:
        if root not in seen:
            seen.add(root)
            queue.append(root)
    while queue:
        src = queue.popleft()
        for targets in lts.out(src).values():
            for tgt in targets:
                if tgt not in seen:
                    seen.add(tgt)
                    queue.append(tgt)
    return tuple(sorted(seen))


def is_deterministic(lts: Lts, s: StateRef) -> bool:
    return all(
        len(targets) <= 1
        for state in reachable(lts, s)
        for targets in lts.out(state).values()
    )


def is_deterministic_lts(lts: Lts) -> bool:
    return all(len(targets) <= 1 for s in range(lts.num_states) for targets in lts.out(s).values())


def is_image_finite(lts: Lts, s: StateRef) -> bool:
    # Every Lts here is finite, so every state is image-finite.
    lts.state_index(s)
    return True


def union_alphabet(*ltss: Lts) -> Tuple[str, ...]:
    """Alphabets merged by name: first LTS's order, then new names as they appear."""
    names: List[str] = []
    seen = set()
    for lts in ltss:
        for name in lts.action_names:
            if name not in seen:
                seen.add(name)
                names.append(name)
    return tuple(names)


def with_alphabet(lts: Lts, names: Sequence[str]) -> Lts:
    """Re-index ``lts`` over the superset alphabet ``names``."""
    if tuple(names) == lts.action_names:
        return lts
    index = {name: i for i, name in enumerate(names)}
    missing = [name for name in lts.action_names if name not in index]
    if missing:
        raise InputDomainError(f"Alphabet {list(names)} lacks actions {missing}")
    remap = [index[name] for name in lts.action_names]
    return Lts(
        lts.state_labels,
        names,
        ((src, remap[act], tgt) for src, act, tgt in lts.transitions),
        budget=max(lts.num_states, 1),
    )


def align(left: Lts, right: Lts) -> Tuple[Lts, Lts]:
    names = union_alphabet(left, right)
    return with_alphabet(left, names), with_alphabet(right, names)


def disjoint_union(left: Lts, right: Lts, *, budget: Optional[int] = None) -> Tuple[Lts, int]:
    """Both LTSs side by side over the union alphabet; right ids shift by the returned offset."""
    union, offsets = disjoint_union_many([left, right], budget=budget)
    return union, offsets[1]


def disjoint_union_many(ltss: Sequence[Lts], *, budget: Optional[int] = None) -> Tuple[Lts, List[int]]:
    names = union_alphabet(*ltss)
    index = {name: i for i, name in enumerate(names)}
    labels: List[str] = []
    triples: List[Transition] = []
    offsets: List[int] = []
    for lts in ltss:
        offset = len(labels)
        offsets.append(offset)
        labels.extend(lts.state_labels)
        remap = [index[name] for name in lts.action_names]
        triples.extend((src + offset, remap[act], tgt + offset) for src, act, tgt in lts.transitions)
    return Lts(labels, names, triples, budget=budget), offsets


def merge_processes(processes: Sequence[Process], *, budget: Optional[int] = None) -> Tuple[Lts, List[int]]:
    """Place several processes into one LTS, sharing storage when they already do."""
    distinct: List[Lts] = []
    position: Dict[int, int] = {}
    for proc in processes:
        if id(proc.lts) not in position:
            position[id(proc.lts)] = len(distinct)
            distinct.append(proc.lts)
    if len(distinct) == 1:
        return distinct[0], [proc.root for proc in processes]
    union, offsets = disjoint_union_many(distinct, budget=budget)
    return union, [proc.root + offsets[position[id(proc.lts)]] for proc in processes]


def restrict_reachable(lts: Lts, roots: Sequence[int]) -> Tuple[Lts, Dict[int, int]]:
    """Sub-LTS reachable from ``roots`` with states renumbered in sorted order."""
    kept = _reachable_from(lts, roots)
    mapping = {old: new for new, old in enumerate(kept)}
    triples = [
        (mapping[src], act, mapping[tgt])
        for src, act, tgt in lts.transitions
        if src in mapping
    ]
    restricted = Lts([lts.label(s) for s in kept], lts.action_names, triples, budget=max(len(kept), 1))
    return restricted, mapping


def restrict_process(proc: Process) -> Process:
    lts, mapping = restrict_reachable(proc.lts, [proc.root])
    return Process(lts, mapping[proc.root])


def _dot_quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(lts: Lts, roots: Sequence[int] = (), name: str = "lts") -> str:
    """Graphviz rendering: one node per state, one labeled edge per transition."""
    root_set = set(roots)
    lines = [f"digraph {_dot_quote(name)} {{", "  rankdir=LR;", "  node [shape=circle];"]
    for state in lts.states:
        shape = ", shape=doublecircle" if state.id in root_set else ""
        lines.append(f"  s{state.id} [label={_dot_quote(state.label)}{shape}];")
    for src, act, tgt in lts.transitions:
        lines.append(f"  s{src} -> s{tgt} [label={_dot_quote(lts.action_names[act])}];")
    lines.append("}")
    return "\n".join(lines) + "\n"


def lts_to_dict(lts: Lts) -> Dict[str, Any]:
    return {
        "states": list(lts.state_labels),
        "alphabet": list(lts.action_names),
        "transitions": [list(t) for t in lts.transitions],
    }


def to_json(lts: Lts, indent: Optional[int] = None) -> str:
    return json.dumps(lts_to_dict(lts), ensure_ascii=False, indent=indent)


def lts_from_json(text: str, *, budget: Optional[int] = None) -> Lts:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputDomainError(f"LTS JSON is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputDomainError(f"Expected a JSON object, received: {type(data).__name__}")
    try:
        states = data["states"]
        alphabet = data["alphabet"]
        raw_transitions = data["transitions"]
    except KeyError as exc:
        raise InputDomainError(f"LTS JSON lacks field {exc}") from exc
    if not all(isinstance(x, list) for x in (states, alphabet, raw_transitions)):
        raise InputDomainError("LTS JSON fields states/alphabet/transitions must be lists")
    triples = []
    for entry in raw_transitions:
        if not (isinstance(entry, list) and len(entry) == 3 and all(isinstance(x, int) for x in entry)):
            raise InputDomainError(f"Malformed transition entry: {entry!r}")
        triples.append(tuple(entry))
    if len(triples) != len(set(triples)):
        raise InputDomainError("LTS JSON lists a transition more than once")
    return Lts(states, alphabet, triples, budget=budget)
