import pytest
from hypothesis import given, settings

from conftest import random_lts
from equivalence import distinguish_bisim
from hml_formulas import ModelChecker, act_project, format_formula, parse_formula
from interaction import join, joindot
from lts_core import InputDomainError, merge_processes
from param_relations import (
    ENV_RELATIONS,
    EnvironmentRelations,
    MismatchTrace,
    check_param,
    explain_param_mismatch,
    ji_param_bisim,
    ji_param_can_sim,
    ji_param_sim,
    ji_param_sim_equiv,
    param_bisim_direct,
    param_bisim_via_joindot,
    param_sim_direct,
    param_sim_equiv,
    param_sim_via_joindot,
)
from process_syntax import compile_text


def triple(p: str, e: str, q: str):
    return compile_text(p), compile_text(e), compile_text(q)


NONDET_ENV = ("a.b", "a.b + a", "a.b + a")
SIM_EQUIV_GAP = ("a.b", "a.b", "a.b + a")


def test_nondet_env_golden():
    p, e, q = triple(*NONDET_ENV)
    assert not param_bisim_direct(p, e, q).related
    assert not param_bisim_via_joindot(p, e, q).related
    assert ji_param_bisim(p, e, q).related


def test_sim_equiv_gap_separates_ji_bisim_from_ji_sim_equiv():
    p, e, q = triple(*SIM_EQUIV_GAP)
    assert ji_param_sim_equiv(p, e, q).related
    assert not ji_param_bisim(p, e, q).related


def test_b_versus_nil_under_b():
    p, e, q = triple("b", "b", "0")
    assert not param_bisim_direct(p, e, q).related
    assert param_bisim_direct(*triple("b", "a", "0")).related


def test_simulation_flavours_on_nondet_env():
    p, e, q = triple(*NONDET_ENV)
    assert param_sim_direct(p, e, q).related
    assert param_sim_via_joindot(p, e, q).related
    assert param_sim_equiv(p, e, q).related
    assert ji_param_sim(p, e, q).related
    assert ji_param_can_sim(p, e, q).related
    assert not param_sim_direct(*triple("a.b", "a.b", "a")).related
    assert ji_param_can_sim(*triple("a.b", "a.b", "a")).related


def test_nondet_env_mismatch_trace_replays():
    p, e, q = triple(*NONDET_ENV)
    trace, process_lts, env_lts, p_root, env_root, q_root = explain_param_mismatch(p, e, q)
    assert trace.replay(process_lts, env_lts, p_root, env_root, q_root)
    assert len(trace.steps) == 1
    step = trace.steps[0]
    assert env_lts.label(step.env[2]) == "b"
    assert process_lts.label(step.left[2]) == "b"
    assert process_lts.label(step.right[2]) == "0"
    assert trace.unmatched.side == "left"
    assert trace.unmatched.move[1] == "b"
    text = trace.describe(process_lts, env_lts)
    assert "has no b-answer on the right" in text


def test_tampered_trace_does_not_replay():
    p, e, q = triple(*NONDET_ENV)
    trace, process_lts, env_lts, p_root, env_root, q_root = explain_param_mismatch(p, e, q)
    assert not trace.replay(process_lts, env_lts, q_root, env_root, p_root)
    with pytest.raises(InputDomainError):
        explain_param_mismatch(p, e, q, mode="trace")


def test_verdict_json_with_witnesses():
    p, e, q = triple(*NONDET_ENV)
    verdict = param_bisim_direct(p, e, q, explain=True)
    assert isinstance(verdict.witness, MismatchTrace)
    data = verdict.to_json()
    assert data["relation"] == "param-bisim" and data["related"] is False
    assert data["witness"]["unmatched"][1][0] == "left"
    assert verdict.symbol == "~_e"

    dotted = param_bisim_via_joindot(p, e, q, explain=True)
    assert dotted.relation == "param-bisim"
    assert dotted.to_json()["witness"] == "!<a>!<b>T"
    assert "!<a@b>!<b@0>T" in dotted.to_json()["note"]

    assert ji_param_bisim(p, e, q, explain=True).witness is None


def test_ji_witness_holds_for_the_left_join():
    p, e, q = triple(*SIM_EQUIV_GAP)
    verdict = ji_param_bisim(p, e, q, explain=True)
    phi = verdict.witness
    assert phi is not None
    left, right = join(p, e), join(q, e)
    assert ModelChecker(left.lts).satisfies(left.root, phi)
    assert not ModelChecker(right.lts).satisfies(right.root, phi)
    assert format_formula(phi) == "!<a>!<b>T"


def test_unknown_relation_name():
    p, e, q = triple(*NONDET_ENV)
    with pytest.raises(InputDomainError):
        check_param("weak-bisim", p, e, q)


def test_batch_matrix_matches_pointwise_holds():
    members = [compile_text(text) for text in ("a.b + a", "a.b", "a", "b", "0")]
    merged, roots = merge_processes(members)
    env = compile_text("a.b + a")
    batch = EnvironmentRelations(merged, env.lts, env.root, roots=roots)
    for name in ENV_RELATIONS:
        rows = batch.matrix(name, roots)
        for i, p in enumerate(roots):
            for j, q in enumerate(roots):
                assert bool(rows[i] >> j & 1) == batch.holds(name, p, q), (name, i, j)


@settings(max_examples=60, deadline=None)
@given(random_lts(max_states=5, max_actions=2), random_lts(max_states=4, max_actions=2))
def test_oracles_and_inclusions_on_random_systems(process_lts, env_lts):
    batch = EnvironmentRelations(process_lts, env_lts, 0)
    states = range(process_lts.num_states)
    for p in states:
        for q in states:
            param_bisim = batch.holds("param-bisim", p, q)
            ji_bisim = batch.holds("ji-bisim", p, q)
            assert param_bisim == batch.holds("param-bisim-joindot", p, q)
            assert batch.holds("param-sim", p, q) == batch.holds("param-sim-joindot", p, q)
            assert batch.holds("param-sim", p, q) == batch.holds("ji-sim", p, q)
            assert not param_bisim or ji_bisim
            assert not ji_bisim or batch.holds("ji-sim-equiv", p, q)
            assert batch.holds("ji-can-sim", p, q) == batch.holds("ji-sim", q, p)


def test_projected_joindot_witness():
    p, e, q = triple(*NONDET_ENV)
    left, right = joindot(p, e), joindot(q, e)
    dotted = distinguish_bisim(left.lts, left.root, right.lts, right.root)
    assert format_formula(dotted) == "!<a@b>!<b@0>T"
    assert ModelChecker(left.lts).satisfies(left.root, dotted)
    assert not ModelChecker(right.lts).satisfies(right.root, dotted)
    projected = act_project(dotted)
    assert projected == parse_formula("!<a>!<b>T")
    assert ModelChecker(p.lts).satisfies(p.root, projected)
    assert not ModelChecker(q.lts).satisfies(q.root, projected)
