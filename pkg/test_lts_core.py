"""Tests for the LTS data type and its structural helpers."""

import json

import pytest

from lts_core import (
    STATE_BUDGET_ENV,
    BudgetExceededError,
    InputDomainError,
    Lts,
    Process,
    check_budget,
    default_state_budget,
    disjoint_union,
    is_deterministic,
    is_deterministic_lts,
    is_image_finite,
    lts_from_json,
    merge_processes,
    permits,
    reachable,
    restrict_reachable,
    set_state_budget,
    successors,
    to_dot,
    to_json,
    union_alphabet,
    with_alphabet,
)


def nondet_env():
    # a.b + a with explicit ids: 0 root, 1 the b-state, 2 the dead state
    return Lts(["a.b + a", "b", "0"], ["a", "b"], [(0, 0, 1), (0, 0, 2), (1, 1, 2)])


def test_successors_and_permits():
    lts = nondet_env()
    assert successors(lts, 0, "a") == (1, 2)
    assert successors(lts, 0, "b") == ()
    assert permits(lts, 1, "b")
    assert not permits(lts, 2, "a")


def test_duplicate_transitions_collapse():
    lts = Lts(["s", "t"], ["a"], [(0, 0, 1), (0, 0, 1)])
    assert lts.num_transitions == 1


def test_unknown_state_and_action_raise():
    lts = nondet_env()
    with pytest.raises(InputDomainError):
        successors(lts, 7, "a")
    with pytest.raises(InputDomainError):
        successors(lts, 0, "c")
    with pytest.raises(InputDomainError):
        Lts(["s"], ["a"], [(0, 1, 0)])
    with pytest.raises(InputDomainError):
        Lts(["s"], ["a", "a"], [])


def test_determinism():
    lts = nondet_env()
    assert not is_deterministic(lts, 0)
    assert is_deterministic(lts, 1)
    assert not is_deterministic_lts(lts)
    assert reachable(lts, 1) == (1, 2)
    assert is_image_finite(lts, 0)
    with pytest.raises(InputDomainError):
        is_image_finite(lts, 9)


def test_union_alphabet_keeps_first_order():
    left = Lts(["s"], ["b", "a"], [])
    right = Lts(["t"], ["c", "a"], [])
    assert union_alphabet(left, right) == ("b", "a", "c")
    widened = with_alphabet(right, ["a", "c", "d"])
    assert widened.action_names == ("a", "c", "d")
    with pytest.raises(InputDomainError):
        with_alphabet(right, ["a"])


def test_disjoint_union_shifts_right_ids():
    left = nondet_env()
    right = Lts(["x", "y"], ["c"], [(0, 0, 1)])
    union, offset = disjoint_union(left, right)
    assert offset == 3
    assert union.num_states == 5
    assert successors(union, 3, "c") == (4,)
    assert successors(union, 0, "a") == (1, 2)


def test_merge_processes_shares_one_lts():
    lts = nondet_env()
    merged, roots = merge_processes([Process(lts, 0), Process(lts, 1)])
    assert merged is lts
    assert roots == [0, 1]


def test_restrict_reachable_renumbers():
    lts = nondet_env()
    small, mapping = restrict_reachable(lts, [1])
    assert small.num_states == 2
    assert mapping == {1: 0, 2: 1}
    assert small.state_labels == ("b", "0")


def test_json_export_reimports():
    lts = nondet_env()
    again = lts_from_json(to_json(lts))
    assert again.state_labels == lts.state_labels
    assert again.action_names == lts.action_names
    assert again.transitions == lts.transitions


@pytest.mark.parametrize(
    "text",
    [
        "not json",
        "[]",
        json.dumps({"states": ["s"], "alphabet": ["a"]}),
        json.dumps({"states": ["s"], "alphabet": ["a"], "transitions": [[0, 0]]}),
        json.dumps({"states": ["s"], "alphabet": ["a"], "transitions": [[0, 0, 0], [0, 0, 0]]}),
        json.dumps({"states": ["s"], "alphabet": ["a"], "transitions": [[0, 0, 3]]}),
    ],
)
def test_malformed_json_is_rejected(text):
    with pytest.raises(InputDomainError):
        lts_from_json(text)


def test_dot_marks_roots():
    dot = to_dot(nondet_env(), roots=[0])
    assert 's0 [label="a.b + a", shape=doublecircle];' in dot
    assert 's1 [label="b"];' in dot
    assert 's0 -> s1 [label="a"];' in dot


def test_budget_resolution(monkeypatch):
    monkeypatch.delenv(STATE_BUDGET_ENV, raising=False)
    assert default_state_budget() == 10_000
    monkeypatch.setenv(STATE_BUDGET_ENV, "3")
    assert default_state_budget() == 3
    with pytest.raises(BudgetExceededError):
        Lts(["s0", "s1", "s2", "s3"], ["a"], [])
    set_state_budget(50)
    try:
        assert default_state_budget() == 50
    finally:
        set_state_budget(None)
    monkeypatch.setenv(STATE_BUDGET_ENV, "zero")
    with pytest.raises(InputDomainError):
        default_state_budget()


def test_check_budget_names_the_limit():
    with pytest.raises(BudgetExceededError, match="state budget of 2"):
        check_budget(3, 2, what="Product")
