import pytest
from hypothesis import given, settings

from conftest import random_lts
from equivalence import (
    RefinementChain,
    Relation,
    _check_equivalence,
    _check_preorder,
    bisim_approximants,
    bisim_partition,
    bisimilarity,
    bisimilarity_pr,
    dedup_up_to_bisimilarity,
    distinguish_bisim,
    distinguish_sim,
    quotient,
    separation_depth,
    simulation_equivalence,
    simulation_preorder,
)
from hml_formulas import ModelChecker, format_formula, is_positive
from lts_core import ContractError, InputDomainError, Lts
from process_syntax import compile_text


def test_nondet_env_processes_are_simulation_equivalent_not_bisimilar():
    p, q = compile_text("a.b"), compile_text("a.b + a")
    assert not bisimilarity(p.lts, q.lts).contains(p.root, q.root)
    assert simulation_preorder(p.lts, q.lts).contains(p.root, q.root)
    assert simulation_preorder(q.lts, p.lts).contains(q.root, p.root)
    assert simulation_equivalence(p.lts, q.lts).contains(p.root, q.root)


def test_duplicate_summands_are_bisimilar():
    p, q = compile_text("a + a"), compile_text("a")
    assert bisimilarity(p.lts, q.lts).contains(p.root, q.root)
    assert bisimilarity_pr(p.lts, q.lts).contains(p.root, q.root)


def test_distinguishing_formulas():
    q, p = compile_text("a.b + a"), compile_text("a.b")
    assert format_formula(distinguish_bisim(q.lts, q.root, p.lts, p.root)) == "<a>!<b>T"
    assert separation_depth(q.lts, q.root, p.lts, p.root) == 2
    left, right = compile_text("a.b"), compile_text("b")
    phi = distinguish_sim(left.lts, left.root, right.lts, right.root)
    assert format_formula(phi) == "<a>T"
    assert is_positive(phi)


def test_no_formula_for_related_states():
    p = compile_text("a.b")
    with pytest.raises(ContractError):
        distinguish_bisim(p.lts, p.root, p.lts, p.root)
    assert separation_depth(p.lts, p.root, p.lts, p.root) is None


def test_approximants_shrink_to_bisimilarity():
    q = compile_text("a.b + a")
    chain = bisim_approximants(q.lts, q.lts)
    assert len(chain[0]) == q.lts.num_states ** 2
    assert all(len(later) <= len(earlier) for earlier, later in zip(chain, chain[1:]))
    assert chain[-1] == bisimilarity(q.lts, q.lts)


def test_quotient_merges_bisimilar_states():
    lts = Lts(["s", "t", "u"], ["a"], [(0, 0, 2), (1, 0, 2)])
    minimized, classes = quotient(lts)
    assert classes == [0, 0, 1]
    assert minimized.num_states == 2
    assert minimized.transitions == ((0, 0, 1),)


def test_dedup_keeps_first_of_each_class():
    members = [compile_text(text) for text in ("a", "a + a", "b", "a.0 + a.0", "0")]
    kept = dedup_up_to_bisimilarity(members)
    assert [p.label for p in kept] == ["a", "b", "0"]


def test_relation_helpers():
    lts = Lts(["s", "t"], ["a"], [(0, 0, 1)])
    relation = simulation_preorder(lts, lts)
    assert (1, 0) in relation and (0, 1) not in relation
    assert relation.is_reflexive() and relation.is_transitive() and not relation.is_symmetric()
    assert relation.converse().contains(0, 1)
    assert sorted(relation.to_json()) == [[0, 0], [1, 0], [1, 1]]
    other = Lts(["x"], ["a"], [])
    with pytest.raises(InputDomainError):
        relation & simulation_preorder(lts, other)
    with pytest.raises(InputDomainError):
        Relation(lts, lts, [1])


@settings(max_examples=200, deadline=None)
@given(random_lts())
def test_partition_refinement_matches_naive_fixpoint(lts):
    assert bisimilarity(lts, lts).rows == bisimilarity_pr(lts, lts).rows


@settings(max_examples=100, deadline=None)
@given(random_lts(max_states=6))
def test_simulation_is_a_preorder_containing_bisimilarity(lts):
    sim = simulation_preorder(lts, lts)
    bisim = bisimilarity(lts, lts)
    assert sim.is_reflexive() and sim.is_transitive()
    assert bisim.is_symmetric()
    assert all(sim.contains(s, t) for s, t in bisim.pairs())
    classes = bisim_partition(lts)
    assert all((classes[s] == classes[t]) == bisim.contains(s, t) for s in range(lts.num_states)
               for t in range(lts.num_states))


@settings(max_examples=100, deadline=None)
@given(random_lts(max_states=6))
def test_distinguishing_formulas_separate(lts):
    checker = ModelChecker(lts)
    for symmetric in (True, False):
        chain = RefinementChain(lts, symmetric)
        for s in range(lts.num_states):
            for t in range(lts.num_states):
                if chain.related(s, t):
                    continue
                phi = chain.distinguish(s, t)
                assert checker.satisfies(s, phi) and not checker.satisfies(t, phi)
                if not symmetric:
                    assert is_positive(phi)


@pytest.mark.parametrize(
    "rows, message",
    [
        ([0b01, 0b00], "not reflexive"),
        ([0b011, 0b110, 0b100], "not transitive"),
    ],
)
def test_preorder_contract_violations_raise(rows, message):
    with pytest.raises(ContractError, match=message):
        _check_preorder(rows, "candidate")


def test_equivalence_contract_requires_symmetry():
    _check_equivalence([0b11, 0b11], "candidate")
    with pytest.raises(ContractError, match="not symmetric"):
        _check_equivalence([0b11, 0b10], "candidate")
