"""Process-term language: parser, pretty-printer, compiler to LTSs and term enumeration.

Grammar (precedence: prefix binds tightest, then ``&``, then ``+``)::

    file   := (defn ";")* term?
    defn   := "def" NAME "=" term
    sum    := join ("+" join)*
    join   := prefix ("&" prefix)*
    prefix := ACTION "." prefix | atom
    atom   := "0" | ACTION | NAME | "(" term ")"

A bare ACTION atom abbreviates ``ACTION.0``. ``#`` starts a comment.
"""

from __future__ import annotations

import logging
import re
from collections import deque
from collections.abc import Mapping
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple, Union

from lark import Lark, Token, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedInput, VisitError

from equivalence import dedup_up_to_bisimilarity
from interaction import join
from lts_core import (
    ActionId,
    InputDomainError,
    LtsError,
    Lts,
    Process,
    check_budget,
    default_state_budget,
)

logger = logging.getLogger(__name__)

ACTION_PATTERN = re.compile(r"[a-z][a-z0-9_]*\Z")


class ProcessSyntaxError(LtsError):
    """Lexical, syntax, binding or guardedness error in process-language text."""

    def __init__(self, kind: str, message: str, line: int, column: int) -> None:
        self.kind = kind
        self.line = line
        self.column = column
        super().__init__(f"{kind} error at line {line}, column {column}: {message}")


@dataclass(frozen=True)
class Nil:
    pass


@dataclass(frozen=True)
class Prefix:
    action: str
    body: "ProcessTerm"


@dataclass(frozen=True)
class Sum:
    left: "ProcessTerm"
    right: "ProcessTerm"


@dataclass(frozen=True)
class Join:
    left: "ProcessTerm"
    right: "ProcessTerm"


@dataclass(frozen=True)
class Ref:
    name: str
    pos: Tuple[int, int] = field(default=(0, 0), compare=False)


ProcessTerm = Union[Nil, Prefix, Sum, Join, Ref]

NIL = Nil()


class DefinitionSet(Mapping):
    """Ordered, name-unique process definitions with their source positions."""

    def __init__(
        self,
        definitions: Optional[Dict[str, ProcessTerm]] = None,
        positions: Optional[Dict[str, Tuple[int, int]]] = None,
    ) -> None:
        self._definitions: Dict[str, ProcessTerm] = dict(definitions or {})
        self._positions: Dict[str, Tuple[int, int]] = dict(positions or {})

    def __getitem__(self, name: str) -> ProcessTerm:
        return self._definitions[name]

    def __iter__(self) -> Iterator[str]:
        return iter(self._definitions)

    def __len__(self) -> int:
        return len(self._definitions)

    def position(self, name: str) -> Tuple[int, int]:
        return self._positions.get(name, (0, 0))

    def __repr__(self) -> str:
        body = "; ".join(f"def {name} = {format_term(term)}" for name, term in self._definitions.items())
        return f"DefinitionSet({body!r})"


EMPTY_DEFINITIONS = DefinitionSet()

_GRAMMAR = r"""
    start: (defn ";")* term?
    defn: "def" NAME "=" term

    ?term: sum
    ?sum: join ("+" join)*
    ?join: prefix ("&" prefix)*
    ?prefix: ACTION "." prefix -> prefix
           | atom
    ?atom: "0" -> nil
         | ACTION -> bare_action
         | NAME -> ref
         | "(" term ")"

    ACTION: /[a-z][a-z0-9_]*/
    NAME: /[A-Z][A-Za-z0-9_]*/
    COMMENT: /#[^\n]*/

    %import common.WS
    %ignore WS
    %ignore COMMENT
"""

_PARSER = Lark(_GRAMMAR, parser="lalr", maybe_placeholders=False)


def _fold_right(constructor, items: Sequence[ProcessTerm]) -> ProcessTerm:
    result = items[-1]
    for item in reversed(items[:-1]):
        result = constructor(item, result)
    return result


class _TermBuilder(Transformer):
    def nil(self, _children):
        return NIL

    def bare_action(self, children):
        return Prefix(str(children[0]), NIL)

    def prefix(self, children):
        return Prefix(str(children[0]), children[1])

    def ref(self, children):
        token: Token = children[0]
        return Ref(str(token), (token.line, token.column))

    def sum(self, children):
        return _fold_right(Sum, children)

    def join(self, children):
        return _fold_right(Join, children)

    def defn(self, children):
        token: Token = children[0]
        return (str(token), children[1], (token.line, token.column))

    def start(self, children):
        definitions: Dict[str, ProcessTerm] = {}
        positions: Dict[str, Tuple[int, int]] = {}
        root: Optional[ProcessTerm] = None
        for child in children:
            if isinstance(child, tuple):
                name, body, pos = child
                if name in definitions:
                    raise ProcessSyntaxError("duplicate-definition", f"{name} is defined twice", *pos)
                definitions[name] = body
                positions[name] = pos
            else:
                root = child
        return DefinitionSet(definitions, positions), root


def _end_position(text: str) -> Tuple[int, int]:
    lines = text.split("\n")
    return len(lines), len(lines[-1]) + 1


def parse(text: str) -> Tuple[DefinitionSet, Optional[ProcessTerm]]:
    """Parse a process program; binding and guardedness are validated too."""
    try:
        tree = _PARSER.parse(text)
    except UnexpectedCharacters as exc:
        raise ProcessSyntaxError(
            "lexical", f"unexpected character {text[exc.pos_in_stream]!r}", exc.line, exc.column
        ) from None
    except UnexpectedInput as exc:
        token = getattr(exc, "token", None)
        if token is None or token.type == "$END" or getattr(token, "line", None) is None:
            line, column = _end_position(text)
            raise ProcessSyntaxError("syntax", "unexpected end of input", line, column) from None
        raise ProcessSyntaxError("syntax", f"unexpected token {str(token)!r}", token.line, token.column) from None
    try:
        defs, root = _TermBuilder().transform(tree)
    except VisitError as exc:
        if isinstance(exc.orig_exc, ProcessSyntaxError):
            raise exc.orig_exc from None
        raise
    validate(defs, root)
    return defs, root


def parse_term(text: str) -> Tuple[ProcessTerm, DefinitionSet]:
    """Parse a program that must end in a root term."""
    defs, root = parse(text)
    if root is None:
        line, column = _end_position(text)
        raise ProcessSyntaxError("syntax", "program has no root term", line, column)
    return root, defs


def _refs(term: ProcessTerm, guarded: bool) -> Iterator[Tuple[Ref, bool]]:
    stack = [(term, guarded)]
    while stack:
        node, under_prefix = stack.pop()
        if isinstance(node, Ref):
            yield node, under_prefix
        elif isinstance(node, Prefix):
            stack.append((node.body, True))
        elif isinstance(node, (Sum, Join)):
            stack.append((node.right, under_prefix))
            stack.append((node.left, under_prefix))


def validate(defs: DefinitionSet, root: Optional[ProcessTerm] = None) -> None:
    """Raise ProcessSyntaxError on unbound names or unguarded recursion."""
    bodies = [(name, defs[name]) for name in defs]
    if root is not None:
        bodies.append(("", root))
    for _, body in bodies:
        for ref, _ in _refs(body, False):
            if ref.name not in defs:
                raise ProcessSyntaxError("unbound-name", f"{ref.name} is not defined", *ref.pos)

    unguarded: Dict[str, List[str]] = {
        name: [ref.name for ref, guarded in _refs(defs[name], False) if not guarded] for name in defs
    }
    done: Set[str] = set()
    for start in defs:
        if start in done:
            continue
        path: List[str] = []
        on_path: Set[str] = set()
        stack: List[Tuple[str, Iterator[str]]] = [(start, iter(unguarded[start]))]
        path.append(start)
        on_path.add(start)
        while stack:
            name, children = stack[-1]
            child = next(children, None)
            if child is None:
                stack.pop()
                path.pop()
                on_path.discard(name)
                done.add(name)
                continue
            if child in on_path:
                cycle = path[path.index(child):] + [child]
                raise ProcessSyntaxError(
                    "unguarded-recursion",
                    f"recursion through {' -> '.join(cycle)} is not under a prefix",
                    *defs.position(child),
                )
            if child not in done:
                stack.append((child, iter(unguarded[child])))
                path.append(child)
                on_path.add(child)


def format_term(term: ProcessTerm, level: int = 0) -> str:
    """Concrete syntax that parses back to ``term``; bare ``a`` stands for ``a.0``."""
    if isinstance(term, Nil):
        return "0"
    if isinstance(term, Ref):
        return term.name
    if isinstance(term, Prefix):
        if isinstance(term.body, Nil):
            return term.action
        return f"{term.action}.{format_term(term.body, 2)}"
    if isinstance(term, Sum):
        text = f"{format_term(term.left, 1)} + {format_term(term.right, 0)}"
        return f"({text})" if level > 0 else text
    if isinstance(term, Join):
        text = f"{format_term(term.left, 2)} & {format_term(term.right, 1)}"
        return f"({text})" if level > 1 else text
    raise TypeError(f"Not a process term: {term!r}")


def term_size(term: ProcessTerm) -> int:
    """Node count of the synchronization tree the term denotes (0 counts as one node)."""
    if isinstance(term, (Nil, Ref)):
        return 1
    if isinstance(term, Prefix):
        return 1 + term_size(term.body)
    if isinstance(term, Sum):
        return term_size(term.left) + term_size(term.right) - 1
    return term_size(term.left) + term_size(term.right)


def term_actions(terms: Sequence[ProcessTerm], defs: DefinitionSet = EMPTY_DEFINITIONS) -> List[str]:
    """Action names in order of first syntactic occurrence (roots first, then definitions)."""
    seen: Dict[str, None] = {}

    def walk(node: ProcessTerm) -> None:
        stack = [node]
        while stack:
            current = stack.pop()
            if isinstance(current, Prefix):
                seen.setdefault(current.action)
                stack.append(current.body)
            elif isinstance(current, (Sum, Join)):
                stack.append(current.right)
                stack.append(current.left)

    for term in terms:
        walk(term)
    for name in defs:
        walk(defs[name])
    return list(seen)


class _Compiler:
    """Structural operational semantics with memoized derivatives.

    A state is identified by its term after unfolding definition references that
    are not under a prefix; identical unfoldings therefore share one state.
    """

    def __init__(self, defs: DefinitionSet, alphabet: Sequence[str], budget: int) -> None:
        self.defs = defs
        self.budget = budget
        self.actions = list(alphabet)
        self.action_index = {name: i for i, name in enumerate(self.actions)}
        self.keys: List[ProcessTerm] = []
        self.index: Dict[ProcessTerm, int] = {}
        self.transitions: List[Tuple[int, int, int]] = []
        self._norm_memo: Dict[ProcessTerm, ProcessTerm] = {}
        self._deriv_memo: Dict[ProcessTerm, Dict[str, List[ProcessTerm]]] = {}
        self._queue: deque = deque()

    def norm(self, term: ProcessTerm) -> ProcessTerm:
        cached = self._norm_memo.get(term)
        if cached is not None:
            return cached
        if isinstance(term, Ref):
            result = self.norm(self.defs[term.name])
        elif isinstance(term, Sum):
            result = Sum(self.norm(term.left), self.norm(term.right))
        elif isinstance(term, Join):
            result = Join(self.norm(term.left), self.norm(term.right))
        else:
            result = term
        self._norm_memo[term] = result
        return result

    def derivatives(self, term: ProcessTerm) -> Dict[str, List[ProcessTerm]]:
        cached = self._deriv_memo.get(term)
        if cached is not None:
            return cached
        result: Dict[str, List[ProcessTerm]] = {}
        if isinstance(term, Prefix):
            result[term.action] = [term.body]
        elif isinstance(term, Sum):
            for side in (term.left, term.right):
                for action, targets in self.derivatives(side).items():
                    result.setdefault(action, []).extend(targets)
        elif isinstance(term, Join):
            left = self.derivatives(term.left)
            right = self.derivatives(term.right)
            for action, targets in left.items():
                if action in right:
                    result[action] = [Join(x, y) for x in targets for y in right[action]]
        elif isinstance(term, Ref):
            result = self.derivatives(self.defs[term.name])
        self._deriv_memo[term] = result
        return result

    def state(self, term: ProcessTerm) -> int:
        key = self.norm(term)
        found = self.index.get(key)
        if found is not None:
            return found
        found = len(self.keys)
        check_budget(found + 1, self.budget, what="Compiled process")
        self.index[key] = found
        self.keys.append(key)
        self._queue.append(found)
        return found

    def run(self) -> None:
        while self._queue:
            src = self._queue.popleft()
            derivs = self.derivatives(self.keys[src])
            for action in sorted(derivs, key=self.action_index.__getitem__):
                act = self.action_index[action]
                for target in derivs[action]:
                    self.transitions.append((src, act, self.state(target)))

    def lts(self) -> Lts:
        labels = [format_term(key) for key in self.keys]
        return Lts(labels, self.actions, self.transitions, budget=self.budget)


def compile_many(
    terms: Sequence[ProcessTerm],
    defs: DefinitionSet = EMPTY_DEFINITIONS,
    *,
    alphabet: Sequence[Union[str, ActionId]] = (),
    budget: Optional[int] = None,
) -> Tuple[Lts, List[int]]:
    """Compile several roots into one LTS; shared subterms share states."""
    validate(defs)
    for term in terms:
        validate(defs, term)
    names = [a.name if isinstance(a, ActionId) else str(a) for a in alphabet]
    for name in term_actions(terms, defs):
        if name not in names:
            names.append(name)
    compiler = _Compiler(defs, names, budget if budget is not None else default_state_budget())
    roots = []
    for term in terms:
        roots.append(compiler.state(term))
        compiler.run()
    lts = compiler.lts()
    logger.debug(f"Compiled {len(terms)} root(s) into {lts.num_states} states, {lts.num_transitions} transitions")
    return lts, roots


def compile(
    term: ProcessTerm,
    defs: DefinitionSet = EMPTY_DEFINITIONS,
    *,
    budget: Optional[int] = None,
) -> Process:
    lts, roots = compile_many([term], defs, budget=budget)
    return Process(lts, roots[0])


def compile_text(text: str, *, budget: Optional[int] = None) -> Process:
    """Parse and compile a program whose root term is the process."""
    term, defs = parse_term(text)
    return compile(term, defs, budget=budget)


def _alphabet_names(alphabet: Sequence[Union[str, ActionId]]) -> List[str]:
    names = []
    for action in alphabet:
        name = action.name if isinstance(action, ActionId) else str(action)
        if not ACTION_PATTERN.match(name):
            raise InputDomainError(f"Action names must be lowercase identifiers, got {name!r}")
        if name not in names:
            names.append(name)
    return names


def _sum_of(summands: Sequence[ProcessTerm]) -> ProcessTerm:
    return _fold_right(Sum, list(summands))


def enumerate_terms(alphabet: Sequence[Union[str, ActionId]], max_size: int) -> List[ProcessTerm]:
    """All canonical {0, prefix, sum} terms of size at most ``max_size``.

    Sums never contain 0, are right-nested and list their summands in text
    order, so terms equal modulo associativity and commutativity of ``+``
    appear once. Output is ordered by (size, text).
    """
    if max_size < 1:
        raise InputDomainError(f"max_size must be at least 1, got {max_size}")
    names = _alphabet_names(alphabet)
    by_size: Dict[int, List[ProcessTerm]] = {1: [NIL]}
    prefixes: List[Tuple[str, int, ProcessTerm]] = []

    for size in range(2, max_size + 1):
        pool = sorted(prefixes)
        sums: List[ProcessTerm] = []

        # each summand of size k contributes k - 1 nodes below the shared root
        def choose(start: int, remaining: int, chosen: List[ProcessTerm]) -> None:
            for i in range(start, len(pool)):
                weight = pool[i][1] - 1
                if weight > remaining:
                    continue
                chosen.append(pool[i][2])
                if weight == remaining:
                    if len(chosen) >= 2:
                        sums.append(_sum_of(chosen))
                else:
                    choose(i, remaining - weight, chosen)
                chosen.pop()

        choose(0, size - 1, [])
        new_prefixes = [Prefix(name, body) for name in names for body in by_size[size - 1]]
        prefixes.extend((format_term(term), size, term) for term in new_prefixes)
        by_size[size] = sorted(new_prefixes + sums, key=format_term)

    result = [term for size in range(1, max_size + 1) for term in by_size[size]]
    logger.debug(f"Enumerated {len(result)} terms over {names} up to size {max_size}")
    return result


def close_under_join(
    universe: Sequence[Process],
    rounds: int,
    *,
    budget: Optional[int] = None,
) -> List[Process]:
    """Extend ``universe`` with pairwise joins ``rounds`` times, keeping one process per bisimilarity class."""
    if rounds < 0:
        raise InputDomainError(f"Join-closure rounds must be nonnegative, got {rounds}")
    members = list(universe)
    if rounds == 0:
        return members
    members = dedup_up_to_bisimilarity(members, budget=budget)
    for round_number in range(1, rounds + 1):
        candidates = list(members)
        for i, left in enumerate(members):
            for right in members[i:]:
                candidates.append(join(left, right, budget=budget))
        before = len(members)
        members = dedup_up_to_bisimilarity(candidates, budget=budget)
        logger.info(f"Join round {round_number}: {before} -> {len(members)} classes")
        if len(members) == before:
            break
    return members
