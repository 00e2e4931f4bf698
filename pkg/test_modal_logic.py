import pytest

from hml_formulas import ModelChecker, format_formula, is_positive
from lts_core import ContractError, merge_processes
from modal_logic import (
    check_char_parambisim,
    check_char_paramsim,
    check_hm_bisim,
    check_hm_sim,
    check_join_logic,
    default_bounds,
    witness_formula_paramsim,
)
from process_syntax import compile_text


def procs(*texts):
    return [compile_text(text) for text in texts]


def test_char_paramsim_related_triple_is_consistent():
    p, e, q = procs("a.b", "a.b + a", "a.b + a")
    report = check_char_paramsim(p, e, q)
    assert report.relation_holds and report.consistent
    assert report.violation is None and report.witness is None
    assert report.checked > 0


def test_char_paramsim_unrelated_triple_has_witness():
    p, e, q = procs("a.b", "a.b", "a")
    report = check_char_paramsim(p, e, q)
    assert not report.relation_holds and report.consistent
    assert format_formula(report.separating) == "<a><b>T"
    assert format_formula(report.witness) == "<a><b>T"
    assert not report.inconclusive


def test_witness_formula_membership():
    p, e, q = procs("a.b + b", "a.b + b.a", "b")
    phi = witness_formula_paramsim(p, e, q)
    assert is_positive(phi)
    merged, (rp, re, rq) = merge_processes([p, e, q])
    checker = ModelChecker(merged)
    assert checker.satisfies(rp, phi) and checker.satisfies(re, phi) and not checker.satisfies(rq, phi)
    with pytest.raises(ContractError):
        witness_formula_paramsim(*procs("a.b", "a.b + a", "a.b + a"))


def test_char_parambisim_on_nondet_env():
    p, e, q = procs("a.b", "a.b + a", "a.b + a")
    report = check_char_parambisim(p, e, q)
    assert not report.relation_holds and report.consistent
    assert format_formula(report.witness) == "!<a>!<b>T"
    assert report.separating is not None


def test_char_parambisim_related_under_deterministic_env():
    p, e, q = procs("a.b", "a", "a.b + a")
    report = check_char_parambisim(p, e, q)
    assert report.relation_holds and report.consistent


def test_join_logic_for_one_pair():
    p, q = procs("a.b + a", "a.(b + a)")
    report = check_join_logic(p, q, 3, 2)
    assert report.consistent and report.checked > 0


def test_hm_bisim_separates_nondet_env_processes():
    s, t = procs("a.b + a", "a.b")
    report = check_hm_bisim(s, t)
    assert not report.relation_holds and report.consistent
    assert format_formula(report.witness) == "<a>!<b>T"
    merged, (rs, rt) = merge_processes([s, t])
    checker = ModelChecker(merged)
    assert checker.satisfies(rs, report.separating) and not checker.satisfies(rt, report.separating)
    assert check_hm_bisim(*procs("a + a", "a")).relation_holds


def test_hm_sim():
    report = check_hm_sim(*procs("a.b", "b"))
    assert not report.relation_holds
    assert format_formula(report.separating) == "<a>T"
    assert check_hm_sim(*procs("a.b", "a.b + a")).consistent
    data = report.to_json()
    assert data["name"] == "hm-sim" and data["witness"] == "<a>T"


def test_default_bounds():
    p, q = procs("a.b + a", "b")
    assert default_bounds(p, q) == (3, 2)
    assert default_bounds(p, q, depth=1, width=5) == (1, 5)
