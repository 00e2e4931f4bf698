import pytest

from equivalence import bisimilarity_pr
from lts_core import BudgetExceededError, InputDomainError, merge_processes, reachable, successors
from process_syntax import (
    NIL,
    Join,
    Prefix,
    ProcessSyntaxError,
    Ref,
    Sum,
    close_under_join,
    compile,
    compile_many,
    compile_text,
    enumerate_terms,
    format_term,
    parse,
    parse_term,
    term_size,
)


def test_parse_nondet_environment():
    term, defs = parse_term("a.b + a")
    assert term == Sum(Prefix("a", Prefix("b", NIL)), Prefix("a", NIL))
    assert len(defs) == 0


def test_precedence_prefix_join_sum():
    term, _ = parse_term("a.b & c + d")
    assert term == Sum(Join(Prefix("a", Prefix("b", NIL)), Prefix("c", NIL)), Prefix("d", NIL))


def test_sums_fold_to_the_right():
    term, _ = parse_term("a + b + c")
    assert term == Sum(Prefix("a", NIL), Sum(Prefix("b", NIL), Prefix("c", NIL)))


def test_definitions_and_comments():
    defs, root = parse("# clock\ndef Tick = t.Tick;\nTick")
    assert root == Ref("Tick")
    assert defs["Tick"] == Prefix("t", Ref("Tick"))
    assert defs.position("Tick") == (2, 5)


def test_program_without_root_term():
    defs, root = parse("def P = a;")
    assert root is None
    with pytest.raises(ProcessSyntaxError) as info:
        parse_term("def P = a;")
    assert info.value.kind == "syntax"


@pytest.mark.parametrize(
    "text, kind",
    [
        ("a $ b", "lexical"),
        ("a.", "syntax"),
        ("a + + b", "syntax"),
        ("X", "unbound-name"),
        ("def X = a; def X = b; X", "duplicate-definition"),
        ("def X = X + a; X", "unguarded-recursion"),
        ("def X = Y; def Y = b & X; X", "unguarded-recursion"),
    ],
)
def test_errors_carry_kind_and_position(text, kind):
    with pytest.raises(ProcessSyntaxError) as info:
        parse(text)
    assert info.value.kind == kind
    assert info.value.line >= 1 and info.value.column >= 1


def test_lexical_error_column():
    with pytest.raises(ProcessSyntaxError) as info:
        parse("a $ b")
    assert (info.value.line, info.value.column) == (1, 3)


def test_guarded_recursion_is_accepted():
    proc = compile_text("def X = a.X + b; X")
    assert proc.lts.num_states == 2
    assert successors(proc.lts, proc.root, "a") == (proc.root,)


@pytest.mark.parametrize(
    "text",
    ["0", "a", "a.b + a", "a.(b + c)", "a & b + c", "a & (b + c)", "a.b.c & d"],
)
def test_format_term_parses_back(text):
    term, _ = parse_term(text)
    again, _ = parse_term(format_term(term))
    assert again == term


def test_format_term_text():
    term, _ = parse_term("a.(b + c) + (d & e)")
    assert format_term(term) == "a.(b + c) + d & e"


def test_term_size():
    assert term_size(NIL) == 1
    assert term_size(parse_term("a.b")[0]) == 3
    assert term_size(parse_term("a.b + a")[0]) == 4


def test_compile_nondet_environment():
    proc = compile_text("a.b + a")
    lts = proc.lts
    assert lts.num_states == 3
    assert [lts.label(t) for t in successors(lts, proc.root, "a")] == ["b", "0"]
    assert lts.label(proc.root) == "a.b + a"


def test_nondet_environment_shares_the_nil_state():
    proc = compile_text("a.b + a")
    states = reachable(proc.lts, proc.root)
    assert len(states) == 3
    assert sorted(proc.lts.label(s) for s in states) == ["0", "a.b + a", "b"]


def test_compile_join_synchronizes():
    proc = compile_text("a.b & a.c")
    lts = proc.lts
    (target,) = successors(lts, proc.root, "a")
    assert lts.out(target) == {}
    assert lts.label(target) == "b & c"


def test_compile_many_shares_subterms():
    terms = [parse_term(text)[0] for text in ("a.b", "c.b")]
    lts, roots = compile_many(terms)
    assert lts.num_states == 4
    assert successors(lts, roots[0], "a") == successors(lts, roots[1], "c")


def test_compile_respects_budget():
    term, defs = parse_term("a.a.a.a.a")
    with pytest.raises(BudgetExceededError):
        compile(term, defs, budget=3)


def test_enumerate_terms_counts():
    assert [format_term(t) for t in enumerate_terms(["a"], 2)] == ["0", "a"]
    assert len(enumerate_terms(["a", "b"], 3)) == 10
    assert len(enumerate_terms(["a", "b"], 4)) == 36
    assert len(enumerate_terms(["a", "b"], 5)) == 143


def test_enumerate_terms_order_and_size():
    terms = enumerate_terms(["a", "b"], 4)
    sizes = [term_size(t) for t in terms]
    assert sizes == sorted(sizes)
    assert all(size <= 4 for size in sizes)
    texts = [format_term(t) for t in terms]
    assert len(set(texts)) == len(texts)
    assert "a + a.b" in texts


def test_enumerate_terms_rejects_bad_input():
    with pytest.raises(InputDomainError):
        enumerate_terms(["a"], 0)
    with pytest.raises(InputDomainError):
        enumerate_terms(["A"], 2)


def test_close_under_join_adds_new_classes():
    a, b = compile_text("a"), compile_text("b")
    closed = close_under_join([a, b], 1)
    assert [p.label for p in closed] == ["a", "b", "a & b"]
    merged, roots = merge_processes(closed)
    relation = bisimilarity_pr(merged, merged)
    assert not relation.contains(roots[0], roots[2])
    assert merged.out(roots[2]) == {}


def test_close_under_join_zero_rounds_is_identity():
    members = [compile_text("a"), compile_text("a")]
    assert close_under_join(members, 0) == members
    with pytest.raises(InputDomainError):
        close_under_join(members, -1)
