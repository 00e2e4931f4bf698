import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hml_formulas import (
    TOP,
    And,
    Diamond,
    FormulaSyntaxError,
    ModelChecker,
    Neg,
    act_project,
    canonical,
    enumerate_negclosure,
    enumerate_positive,
    format_formula,
    formula_size,
    in_negation_closure,
    is_positive,
    make_and,
    modal_depth,
    parse_formula,
    positive_projection,
    satisfies,
)
from lts_core import InputDomainError
from process_syntax import compile_text


def test_parse_and_format():
    phi = parse_formula("<a>!<b>T")
    assert phi == Diamond("a", Neg(Diamond("b", TOP)))
    assert format_formula(phi) == "<a>!<b>T"
    assert format_formula(parse_formula("<b>T & <a>T")) == "<a>T & <b>T"
    assert format_formula(parse_formula("<a>(<b>T & T)")) == "<a><b>T"
    assert format_formula(parse_formula("!(<a>T & <b>T)")) == "!(<a>T & <b>T)"
    assert parse_formula("<a@b + a><b@0>T") == Diamond("a@b + a", Diamond("b@0", TOP))


@pytest.mark.parametrize("text", ["", "<a>", "<a T", "!", "T &", "(<a>T", "<a>T )", "<>T"])
def test_parse_errors(text):
    with pytest.raises(FormulaSyntaxError) as info:
        parse_formula(text)
    assert info.value.column >= 1


def test_measures():
    phi = parse_formula("<a>(<b>T & !<a><a>T)")
    assert modal_depth(phi) == 3
    assert formula_size(phi) == 8
    assert not is_positive(phi)
    assert is_positive(parse_formula("<a>(<b>T & <a>T)"))


def test_make_and_canonical_form():
    a, b = Diamond("a", TOP), Diamond("b", TOP)
    assert make_and([]) is TOP
    assert make_and([a, TOP]) == a
    assert make_and([b, And((a, b))]) == And((a, b))
    assert canonical(Neg(And((b, a, a)))) == Neg(And((a, b)))


@pytest.mark.parametrize(
    "term, formula, expected",
    [
        ("a.b", "<a><b>T", True),
        ("0", "<a>T", False),
        ("a.b + a", "<a>!<b>T", True),
        ("a.b", "<a>!<b>T", False),
        ("a", "<c>T", False),
        ("a", "!<c>T", True),
        ("a.b + b", "<a>T & <b>T", True),
    ],
)
def test_satisfaction(term, formula, expected):
    proc = compile_text(term)
    assert satisfies(proc.lts, proc.root, parse_formula(formula)) is expected


def test_model_checker_masks():
    proc = compile_text("a.b + a")
    checker = ModelChecker(proc.lts)
    assert checker.sat(TOP) == 0b111
    assert checker.sat(parse_formula("<b>T")) == 0b010
    assert checker.sat(parse_formula("!<b>T")) == 0b101


def test_enumerate_positive_counts_and_order():
    assert len(enumerate_positive(["a", "b"], 1, 2)) == 4
    formulas = enumerate_positive(["a", "b"], 2, 2)
    assert len(formulas) == 37
    assert formulas[0] == TOP
    assert all(is_positive(phi) for phi in formulas)
    assert len(set(formulas)) == len(formulas)
    depths = [modal_depth(phi) for phi in formulas]
    assert depths == sorted(depths)
    assert enumerate_positive(["a"], 2, 0) == enumerate_positive(["a"], 2, 1)
    with pytest.raises(InputDomainError):
        enumerate_positive(["a"], -1, 1)


def test_negation_closure():
    closure = enumerate_negclosure(parse_formula("<a>T"))
    assert [format_formula(phi) for phi in closure] == ["<a>T", "!<a>T", "<a>!T", "!<a>!T"]
    assert all(in_negation_closure(psi, parse_formula("<a>T")) for psi in closure)
    assert positive_projection(parse_formula("!<a>!<b>T")) == parse_formula("<a><b>T")
    with pytest.raises(InputDomainError):
        enumerate_negclosure(Neg(TOP))


def test_act_project_drops_env_targets():
    assert act_project(parse_formula("<a@b>!<b@0>T")) == parse_formula("<a>!<b>T")


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2), st.integers(min_value=1, max_value=2))
def test_enumerated_formulas_parse_back(depth, width):
    for phi in enumerate_positive(["a", "b"], depth, width):
        assert parse_formula(format_formula(phi)) == phi
        assert modal_depth(phi) <= depth
