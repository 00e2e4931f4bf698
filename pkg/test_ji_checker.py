"""End-to-end tests for the ji_checker command line."""

import json

import pytest

from ji_checker import EXIT_FAILS, EXIT_HOLDS, EXIT_USAGE, main
from lts_core import STATE_BUDGET_ENV


@pytest.fixture(autouse=True)
def isolated(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    monkeypatch.delenv(STATE_BUDGET_ENV, raising=False)


def test_check_ji_bisim_holds(capsys):
    assert main(["check", "a.b", "a.b + a", "--rel", "ji-bisim", "--env", "a.b + a"]) == EXIT_HOLDS
    assert "holds" in capsys.readouterr().out


def test_check_param_bisim_prints_mismatch_trace(capsys):
    code = main(["check", "a.b", "a.b + a", "--rel", "param-bisim", "--env", "a.b + a", "--explain"])
    assert code == EXIT_FAILS
    out = capsys.readouterr().out
    assert "does not hold" in out
    assert "mismatch trace:" in out
    assert "has no b-answer on the right" in out


def test_check_plain_relations(capsys):
    assert main(["check", "0", "0"]) == EXIT_HOLDS
    assert main(["check", "a.b + a", "a.b", "--rel", "sim-equiv"]) == EXIT_HOLDS
    capsys.readouterr()
    assert main(["check", "a.b + a", "a.b", "--explain", "--json"]) == EXIT_FAILS
    payload = json.loads(capsys.readouterr().out)
    assert payload["related"] is False
    assert payload["witness"] == "<a>!<b>T"


def test_check_reads_terms_from_files(tmp_path):
    (tmp_path / "q.proc").write_text("a.b + a", encoding="utf-8")
    assert main(["check", "@q.proc", "a.b", "--rel", "sim-equiv"]) == EXIT_HOLDS
    assert main(["check", "@missing.proc", "a.b"]) == EXIT_USAGE


@pytest.mark.parametrize(
    "argv",
    [
        ["check", "a", "b", "--rel", "weak-bisim"],
        ["check", "a", "b", "--rel", "param-bisim"],
        ["check", "a.(", "b"],
        ["eval", "a", "<a"],
        ["check", "a", "b", "--config", "nowhere.toml"],
        ["experiment", "--suite", "nonsense"],
        ["examples", "--only", "nonsense"],
        ["export", "a", "--env", "b"],
        ["check", "a", "b", "--workers", "0"],
    ],
)
def test_usage_errors(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert capsys.readouterr().err


def test_budget_exceeded(capsys):
    assert main(["export", "a.b + a", "--state-budget", "2"]) == EXIT_USAGE
    assert "Budget exceeded" in capsys.readouterr().err


def test_eval(capsys):
    assert main(["eval", "a.b + a", "<a>!<b>T"]) == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "true"
    assert main(["eval", "a.b", "<a>!<b>T"]) == EXIT_FAILS


def test_examples_all_pass(capsys):
    assert main(["examples"]) == EXIT_HOLDS
    last = capsys.readouterr().out.strip().splitlines()[-1]
    assert last.endswith("passed")
    count = last.split()[0].split("/")
    assert count[0] == count[1]


def test_examples_only_group(capsys):
    assert main(["examples", "--only", "sim-equiv-gap", "--json"]) == EXIT_HOLDS
    payload = json.loads(capsys.readouterr().out)
    assert {example["group"] for example in payload["examples"]} == {"sim-equiv-gap"}


def test_export_json_and_dot(capsys):
    assert main(["export", "a.b + a", "--json"]) == EXIT_HOLDS
    data = json.loads(capsys.readouterr().out)
    assert len(data["states"]) == 3 and data["alphabet"] == ["a", "b"]
    assert main(["export", "a.b", "--product", "joindot", "--env", "a.b + a"]) == EXIT_HOLDS
    dot = capsys.readouterr().out
    assert dot.startswith('digraph "lts"')
    assert '"a@b"' in dot and "doublecircle" in dot


def test_export_to_file(tmp_path):
    target = tmp_path / "out" / "lts.dot"
    assert main(["export", "a + b", "--output", str(target)]) == EXIT_HOLDS
    assert target.read_text(encoding="utf-8").startswith("digraph")


def test_distinguish(capsys):
    assert main(["distinguish", "a.b + a", "a.b"]) == EXIT_HOLDS
    assert capsys.readouterr().out.strip() == "<a>!<b>T"
    assert main(["distinguish", "a.b", "a.b + a", "--rel", "sim"]) == EXIT_FAILS


def test_universe_from_config_section(tmp_path, capsys):
    config = tmp_path / "small.toml"
    config.write_text('[universe]\nalphabet = "a"\nsize = 2\njoin-rounds = 0\nuniversal = false\n', encoding="utf-8")
    assert main(["universe", "--config", str(config), "--json"]) == EXIT_HOLDS
    payload = json.loads(capsys.readouterr().out)
    assert sorted(payload["processes"]) == ["0", "a"]
    assert payload["classes"] == 2
    assert main(["universe", "--config", str(config), "--size", "1", "--json"]) == EXIT_HOLDS
    assert json.loads(capsys.readouterr().out)["processes"] == ["0"]


def test_experiment_writes_report(tmp_path, capsys):
    report = tmp_path / "results" / "report.json"
    argv = ["experiment", "--suite", "pr-parity", "--suite", "lemma-aux1", "--samples", "5",
            "--alphabet", "a", "--size", "3", "--join-rounds", "0", "--no-universal", "--report", str(report)]
    assert main(argv) == EXIT_HOLDS
    data = json.loads(report.read_text(encoding="utf-8"))
    assert [r["suite"] for r in data["reports"]] == ["pr-parity", "lemma-aux1"]
    assert data["passed"] is True
    assert "Report written" in capsys.readouterr().err


def test_experiment_jisim_theorem_small_universe():
    argv = ["experiment", "--suite", "jisim-theorem", "--alphabet", "a,b", "--size", "3", "--workers", "2"]
    assert main(argv) == EXIT_HOLDS


def test_examples_nondet_env_alias(capsys):
    assert main(["examples", "--only", "fig1", "--json"]) == EXIT_HOLDS
    payload = json.loads(capsys.readouterr().out)
    assert {example["group"] for example in payload["examples"]} == {"nondet-env"}


def test_check_rejects_non_utf8_file(tmp_path, capsys):
    (tmp_path / "bad.proc").write_bytes(b"a.\xff\xfe")
    assert main(["check", "@bad.proc", "a"]) == EXIT_USAGE
    assert "not valid UTF-8" in capsys.readouterr().err


def test_check_joindot_explain_prints_projected_witness(capsys):
    argv = ["check", "a.b", "a.b + a", "--rel", "param-bisim-joindot", "--env", "a.b + a", "--explain"]
    assert main(argv) == EXIT_FAILS
    out = capsys.readouterr().out
    assert "witness: !<a>!<b>T" in out
    assert "!<a@b>!<b@0>T" in out


def test_explicit_flag_equal_to_default_beats_config(tmp_path, capsys):
    config = tmp_path / "small.toml"
    config.write_text('[universe]\nalphabet = "a"\nsize = 2\njoin-rounds = 0\nuniversal = false\n', encoding="utf-8")
    assert main(["universe", "--config", str(config), "--size", "4", "--json"]) == EXIT_HOLDS
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["processes"]) > 2
