"""Join interaction ``&``, right-determinizing join ``&•`` and the universal process.

Products are explored from their roots only, so they contain the reachable
part of the synchronous product and nothing else.
"""

from __future__ import annotations

import logging
from collections import deque
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from lts_core import (
    ActionId,
    InputDomainError,
    Lts,
    Process,
    StateId,
    check_budget,
    default_state_budget,
    union_alphabet,
)

logger = logging.getLogger(__name__)

UNIVERSAL_LABEL = "U"


class ProductState(NamedTuple):
    left: int
    right: int


class PairLabel(NamedTuple):
    action: str
    env_target: StateId


class ProductLts(Lts):
    """An Lts whose states are pairs of component states."""

    __slots__ = ("kind", "left_lts", "right_lts", "components", "pair_labels", "_component_index")

    def __init__(
        self,
        kind: str,
        left_lts: Lts,
        right_lts: Lts,
        components: Sequence[ProductState],
        actions: Sequence[str],
        transitions: Iterable[Tuple[int, int, int]],
        pair_labels: Optional[Sequence[PairLabel]] = None,
        *,
        budget: Optional[int] = None,
    ) -> None:
        labels = [_pair_text(left_lts.label(c.left), right_lts.label(c.right)) for c in components]
        super().__init__(labels, actions, transitions, budget=budget)
        self.kind = kind
        self.left_lts = left_lts
        self.right_lts = right_lts
        self.components: Tuple[ProductState, ...] = tuple(components)
        self.pair_labels: Optional[Tuple[PairLabel, ...]] = tuple(pair_labels) if pair_labels is not None else None
        self._component_index = {c: i for i, c in enumerate(self.components)}

    def component_of(self, state: int) -> ProductState:
        return self.components[self.state_index(state)]

    def state_of(self, left: int, right: int) -> int:
        found = self._component_index.get(ProductState(left, right))
        if found is None:
            raise InputDomainError(f"Product state ({left}, {right}) is not reachable from the product roots")
        return found

    def pair_label_of(self, action: Union[int, str, ActionId]) -> PairLabel:
        if self.pair_labels is None:
            raise InputDomainError("Only right-determinizing products carry pair labels")
        return self.pair_labels[self.action_index(action)]


def _wrap(text: str) -> str:
    return f"({text})" if ("+" in text or "&" in text) else text


def _pair_text(left: str, right: str) -> str:
    return f"{_wrap(left)} & {_wrap(right)}"


def _explore(
    proc: Lts,
    env: Lts,
    roots: Iterable[Tuple[int, int]],
    budget: int,
) -> Tuple[List[ProductState], List[Tuple[int, str, int, int]]]:
    """BFS over joint moves; returns states and (src, action name, env target, tgt) edges."""
    env_actions = {name: i for i, name in enumerate(env.action_names)}
    to_env = [env_actions.get(name) for name in proc.action_names]
    states: List[ProductState] = []
    index: Dict[ProductState, int] = {}
    queue: deque = deque()

    def visit(pair: ProductState) -> int:
        found = index.get(pair)
        if found is None:
            found = len(states)
            check_budget(found + 1, budget, what="Product")
            index[pair] = found
            states.append(pair)
            queue.append(found)
        return found

    for left, right in roots:
        visit(ProductState(proc.state_index(left), env.state_index(right)))

    edges: List[Tuple[int, str, int, int]] = []
    while queue:
        src = queue.popleft()
        left, right = states[src]
        env_out = env.out(right)
        for act, left_targets in sorted(proc.out(left).items()):
            env_act = to_env[act]
            if env_act is None or env_act not in env_out:
                continue
            for right_target in env_out[env_act]:
                for left_target in left_targets:
                    tgt = visit(ProductState(left_target, right_target))
                    edges.append((src, proc.action_names[act], right_target, tgt))
    return states, edges


def _default_roots(proc: Lts, env: Lts) -> List[Tuple[int, int]]:
    return [(p, e) for p in range(proc.num_states) for e in range(env.num_states)]


def join_lts(
    proc: Lts,
    env: Lts,
    roots: Optional[Iterable[Tuple[int, int]]] = None,
    *,
    budget: Optional[int] = None,
) -> ProductLts:
    """Synchronous product: ``(p, e) -a-> (p', e')`` iff ``p -a-> p'`` and ``e -a-> e'``."""
    limit = budget if budget is not None else default_state_budget()
    states, edges = _explore(proc, env, roots if roots is not None else _default_roots(proc, env), limit)
    names = union_alphabet(proc, env)
    index = {name: i for i, name in enumerate(names)}
    transitions = [(src, index[name], tgt) for src, name, _, tgt in edges]
    product = ProductLts("join", proc, env, states, names, transitions, budget=limit)
    logger.debug(f"Join product: {product.num_states} states, {product.num_transitions} transitions")
    return product


def pair_label_names(env: Lts) -> Dict[int, str]:
    """Display name per env state used in ``a@state`` labels; ids when labels collide."""
    labels = env.state_labels
    if len(set(labels)) == len(labels):
        return dict(enumerate(labels))
    return {i: str(i) for i in range(len(labels))}


def joindot_lts(
    proc: Lts,
    env: Lts,
    roots: Optional[Iterable[Tuple[int, int]]] = None,
    *,
    budget: Optional[int] = None,
) -> ProductLts:
    """Right-determinizing join: the label of each joint step records the env target state.

    Action names render as ``a@envlabel``; the alphabet holds only the pair
    labels that occur, ordered by (action, env target id).
    """
    limit = budget if budget is not None else default_state_budget()
    states, edges = _explore(proc, env, roots if roots is not None else _default_roots(proc, env), limit)
    order = {name: i for i, name in enumerate(union_alphabet(proc, env))}
    used = sorted({(name, env_target) for _, name, env_target, _ in edges}, key=lambda x: (order[x[0]], x[1]))
    display = pair_label_names(env)
    names = [f"{name}@{display[env_target]}" for name, env_target in used]
    pair_labels = [PairLabel(name, env.state(env_target)) for name, env_target in used]
    index = {key: i for i, key in enumerate(used)}
    transitions = [(src, index[(name, env_target)], tgt) for src, name, env_target, tgt in edges]
    product = ProductLts("joindot", proc, env, states, names, transitions, pair_labels, budget=limit)
    logger.debug(f"Joindot product: {product.num_states} states, {len(names)} pair labels")
    return product


def join(left: Process, right: Process, *, budget: Optional[int] = None) -> Process:
    product = join_lts(left.lts, right.lts, [(left.root, right.root)], budget=budget)
    return Process(product, 0)


def joindot(proc: Process, env: Process, *, budget: Optional[int] = None) -> Process:
    product = joindot_lts(proc.lts, env.lts, [(proc.root, env.root)], budget=budget)
    return Process(product, 0)


def project_labels(product: ProductLts) -> Lts:
    """Forget env targets of a ``&•`` product; parallel duplicates collapse."""
    if product.pair_labels is None:
        raise InputDomainError("project_labels expects a right-determinizing product")
    names: List[str] = []
    for label in product.pair_labels:
        if label.action not in names:
            names.append(label.action)
    index = {name: i for i, name in enumerate(names)}
    remap = [index[label.action] for label in product.pair_labels]
    return Lts(
        product.state_labels,
        names,
        {(src, remap[act], tgt) for src, act, tgt in product.transitions},
        budget=max(product.num_states, 1),
    )


def universal_process(alphabet: Sequence[Union[str, ActionId]]) -> Process:
    """One state with a self-loop per action; joining with it is a bisimilarity identity."""
    names: List[str] = []
    for action in alphabet:
        name = action.name if isinstance(action, ActionId) else str(action)
        if name not in names:
            names.append(name)
    if not names:
        raise InputDomainError("The universal process needs a nonempty alphabet")
    lts = Lts([UNIVERSAL_LABEL], names, [(0, act, 0) for act in range(len(names))])
    return Process(lts, 0)
