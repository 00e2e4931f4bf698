"""Hennessy-Milner formulas: syntax, canonical form, satisfaction and enumeration.

Text syntax: ``T`` (true), ``!`` prefix negation, ``&`` infix conjunction,
``<a>`` diamond, parentheses. Diamonds over ``&•`` products carry pair labels
``<a@state>``.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from lark import Lark, Transformer
from lark.exceptions import UnexpectedCharacters, UnexpectedInput

from lts_core import ActionId, InputDomainError, LtsError, Lts, StateRef

logger = logging.getLogger(__name__)


class FormulaSyntaxError(LtsError):
    def __init__(self, message: str, column: int) -> None:
        self.column = column
        super().__init__(f"formula syntax error at column {column}: {message}")


@dataclass(frozen=True)
class Top:
    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Neg:
    body: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class And:
    conjuncts: Tuple["Formula", ...]

    def __str__(self) -> str:
        return format_formula(self)


@dataclass(frozen=True)
class Diamond:
    action: str
    body: "Formula"

    def __str__(self) -> str:
        return format_formula(self)


Formula = Union[Top, Neg, And, Diamond]

TOP = Top()


@lru_cache(maxsize=None)
def format_formula(phi: Formula) -> str:
    if isinstance(phi, Top):
        return "T"
    if isinstance(phi, Neg):
        return "!" + _format_unary(phi.body)
    if isinstance(phi, Diamond):
        return f"<{phi.action}>" + _format_unary(phi.body)
    return " & ".join(_format_unary(c) for c in phi.conjuncts)


def _format_unary(phi: Formula) -> str:
    text = format_formula(phi)
    return f"({text})" if isinstance(phi, And) else text


@lru_cache(maxsize=None)
def modal_depth(phi: Formula) -> int:
    if isinstance(phi, Top):
        return 0
    if isinstance(phi, Neg):
        return modal_depth(phi.body)
    if isinstance(phi, Diamond):
        return 1 + modal_depth(phi.body)
    return max(modal_depth(c) for c in phi.conjuncts)


@lru_cache(maxsize=None)
def formula_size(phi: Formula) -> int:
    if isinstance(phi, Top):
        return 1
    if isinstance(phi, (Neg, Diamond)):
        return 1 + formula_size(phi.body)
    return 1 + sum(formula_size(c) for c in phi.conjuncts)


def action_sequence(phi: Formula) -> Tuple[str, ...]:
    if isinstance(phi, Top):
        return ()
    if isinstance(phi, Neg):
        return action_sequence(phi.body)
    if isinstance(phi, Diamond):
        return (phi.action,) + action_sequence(phi.body)
    return tuple(a for c in phi.conjuncts for a in action_sequence(c))


def formula_key(phi: Formula) -> Tuple[int, int, Tuple[str, ...], str]:
    """Canonical order: depth, then size, then action sequence, then text."""
    return modal_depth(phi), formula_size(phi), action_sequence(phi), format_formula(phi)


def is_positive(phi: Formula) -> bool:
    if isinstance(phi, Top):
        return True
    if isinstance(phi, Neg):
        return False
    if isinstance(phi, Diamond):
        return is_positive(phi.body)
    return all(is_positive(c) for c in phi.conjuncts)


def make_and(items: Iterable[Formula]) -> Formula:
    """Canonical conjunction: nested conjunctions flattened, sorted, duplicates dropped."""
    flat = set()
    for item in items:
        if isinstance(item, And):
            flat.update(item.conjuncts)
        elif not isinstance(item, Top):
            flat.add(item)
    if not flat:
        return TOP
    if len(flat) == 1:
        return next(iter(flat))
    return And(tuple(sorted(flat, key=formula_key)))


def canonical(phi: Formula) -> Formula:
    if isinstance(phi, Neg):
        return Neg(canonical(phi.body))
    if isinstance(phi, Diamond):
        return Diamond(phi.action, canonical(phi.body))
    if isinstance(phi, And):
        return make_and(canonical(c) for c in phi.conjuncts)
    return phi


_GRAMMAR = r"""
    start: conj
    ?conj: unary ("&" unary)*
    ?unary: "!" unary -> neg
          | "<" LABEL ">" unary -> diamond
          | "T" -> top
          | "(" conj ")"

    LABEL: /[^<>()!&\s][^<>]*/

    %import common.WS
    %ignore WS
"""

_PARSER = Lark(_GRAMMAR, parser="lalr")


class _FormulaBuilder(Transformer):
    def top(self, _children):
        return TOP

    def neg(self, children):
        return Neg(children[0])

    def diamond(self, children):
        return Diamond(str(children[0]).strip(), children[1])

    def conj(self, children):
        return make_and(children)

    def start(self, children):
        return children[0]


def parse_formula(text: str) -> Formula:
    """Parse formula text into canonical form (conjunctions sorted and deduplicated)."""
    try:
        tree = _PARSER.parse(text)
    except UnexpectedCharacters as exc:
        raise FormulaSyntaxError(f"unexpected character {text[exc.pos_in_stream]!r}", exc.column) from None
    except UnexpectedInput as exc:
        token = getattr(exc, "token", None)
        if token is None or token.type == "$END" or getattr(token, "column", None) is None:
            raise FormulaSyntaxError("unexpected end of formula", len(text) + 1) from None
        raise FormulaSyntaxError(f"unexpected token {str(token)!r}", token.column) from None
    return _FormulaBuilder().transform(tree)


class ModelChecker:
    """Satisfaction sets over one LTS, memoized per formula as state bitmasks.

    A diamond over an action outside the alphabet is never satisfied.
    """

    def __init__(self, lts: Lts) -> None:
        self.lts = lts
        self.all_states = (1 << lts.num_states) - 1
        self._memo: Dict[Formula, int] = {}
        self._succ: Dict[int, List[Tuple[int, int]]] = {}
        for src in range(lts.num_states):
            for act, targets in lts.out(src).items():
                mask = 0
                for tgt in targets:
                    mask |= 1 << tgt
                self._succ.setdefault(act, []).append((src, mask))

    def diamond_mask(self, act: int, target_mask: int) -> int:
        result = 0
        for src, mask in self._succ.get(act, ()):
            if mask & target_mask:
                result |= 1 << src
        return result

    def sat(self, phi: Formula) -> int:
        found = self._memo.get(phi)
        if found is not None:
            return found
        if isinstance(phi, Top):
            result = self.all_states
        elif isinstance(phi, Neg):
            result = self.all_states ^ self.sat(phi.body)
        elif isinstance(phi, And):
            result = self.all_states
            for conjunct in phi.conjuncts:
                result &= self.sat(conjunct)
        elif isinstance(phi, Diamond):
            act = self.lts.lookup_action(phi.action)
            result = 0 if act is None else self.diamond_mask(act, self.sat(phi.body))
        else:
            raise TypeError(f"Not a formula: {phi!r}")
        self._memo[phi] = result
        return result

    def satisfies(self, s: StateRef, phi: Formula) -> bool:
        return bool(self.sat(phi) >> self.lts.state_index(s) & 1)


def satisfies(lts: Lts, s: StateRef, phi: Formula) -> bool:
    return ModelChecker(lts).satisfies(s, phi)


@lru_cache(maxsize=None)
def positive_projection(phi: Formula) -> Formula:
    if isinstance(phi, Top):
        return TOP
    if isinstance(phi, Neg):
        return positive_projection(phi.body)
    if isinstance(phi, Diamond):
        return Diamond(phi.action, positive_projection(phi.body))
    return make_and(positive_projection(c) for c in phi.conjuncts)


def in_negation_closure(psi: Formula, phi: Formula) -> bool:
    return positive_projection(psi) == canonical(phi)


def act_project(phi: Formula) -> Formula:
    """Replace every pair-labeled diamond ``<a@e>`` by ``<a>``."""
    if isinstance(phi, Top):
        return TOP
    if isinstance(phi, Neg):
        return Neg(act_project(phi.body))
    if isinstance(phi, Diamond):
        return Diamond(phi.action.split("@", 1)[0], act_project(phi.body))
    return make_and(act_project(c) for c in phi.conjuncts)


def _action_names(alphabet: Sequence[Union[str, ActionId]]) -> List[str]:
    names: List[str] = []
    for action in alphabet:
        name = action.name if isinstance(action, ActionId) else str(action)
        if name not in names:
            names.append(name)
    return names


def enumerate_positive(
    alphabet: Sequence[Union[str, ActionId]],
    max_depth: int,
    max_width: int,
) -> List[Formula]:
    """Canonical positive formulas up to the bounds, ordered by depth, size and text.

    ``max_width`` caps the number of conjuncts at every level; values below 1
    behave as 1 (no conjunctions).
    """
    if max_depth < 0:
        raise InputDomainError(f"max_depth must be nonnegative, got {max_depth}")
    names = _action_names(alphabet)
    width = max(1, max_width)
    formulas: List[Formula] = [TOP]
    for _ in range(max_depth):
        diamonds = [Diamond(name, body) for name in names for body in formulas]
        level: List[Formula] = [TOP] + diamonds
        for count in range(2, min(width, len(diamonds)) + 1):
            level.extend(And(tuple(sorted(group, key=formula_key))) for group in itertools.combinations(diamonds, count))
        formulas = level
    formulas.sort(key=lambda phi: (modal_depth(phi), formula_size(phi), format_formula(phi)))
    return formulas


def _decorations(phi: Formula) -> List[Formula]:
    if isinstance(phi, Top):
        inner: List[Formula] = [TOP]
    elif isinstance(phi, Diamond):
        inner = [Diamond(phi.action, body) for body in _decorations(phi.body)]
    elif isinstance(phi, And):
        inner = [make_and(choice) for choice in itertools.product(*(_decorations(c) for c in phi.conjuncts))]
    else:
        raise InputDomainError(f"Negation closure is defined for positive formulas, got {format_formula(phi)}")
    return [variant for body in inner for variant in (body, Neg(body))]


def enumerate_negclosure(phi: Formula) -> List[Formula]:
    """Formulas projecting onto ``phi`` with each position negated at most once."""
    return _decorations(canonical(phi))
