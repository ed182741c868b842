"""Command-line surface: exit codes, JSON output, trace files, and the
replayable witness scripts."""

from __future__ import annotations

import json
from pathlib import Path

import pytest

from itrsbench.cli import run_command
from itrsbench.corpus import ITRS_SOURCES

FIXDIR = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture()
def files(tmp_path):
    out = {}
    for name, text in ITRS_SOURCES.items():
        path = tmp_path / f"{name}.itrs"
        path.write_text(text)
        out[name] = str(path)
    return out


def test_check_ok(files, capsys):
    assert run_command(["check", files["ltree"]]) == 0
    assert "metric_ok: True" in capsys.readouterr().out


def test_check_bad_file_is_input_error(tmp_path):
    bad = tmp_path / "bad.itrs"
    bad.write_text("metric infty\nsig F/1\nrule bad: x -> F(x)\n")
    assert run_command(["check", str(bad)]) == 2
    assert run_command(["check", str(tmp_path / "missing.itrs")]) == 2


def test_distance_reflexive(files, capsys):
    code = run_command(
        ["distance", "--metric", files["ltree"],
         "--term", "Bin(N, Null, N)", "--term2", "Bin(N, Null, N)"]
    )
    assert code == 0
    assert "distance: 0" in capsys.readouterr().out


def test_member_non_member_example(files, tmp_path, capsys):
    assert run_command(
        ["union", files["exa-layers-r"], files["exa-layers-s"],
         "--out", str(tmp_path / "u.itrs"), "--report", str(tmp_path / "u.json")]
    ) == 0
    capsys.readouterr()
    assert run_command(
        ["member", "--metric", str(tmp_path / "u.itrs"),
         "--term", "mu X. G(H(X))", "--json"]
    ) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "non_member"


def test_member_on_two_files_directly(files, capsys):
    assert run_command(
        ["member", "--metric", files["exa-layers-r"], files["exa-layers-s"],
         "--term", "mu X. F(F(H(X)))", "--json"]
    ) == 0
    assert json.loads(capsys.readouterr().out)["kind"] == "member"


def test_bad_term_is_input_error(files):
    assert run_command(
        ["distance", "--metric", files["ltree"],
         "--term", "Bin(", "--term2", "N"]
    ) == 2


def test_epos_and_guard(files, capsys):
    assert run_command(
        ["epos", "--metric", files["exnonlin-s"],
         "--term", "S(S(0))", "--epsilon", "1/2", "--json"]
    ) == 0
    assert json.loads(capsys.readouterr().out)["positions"] == [[], [1]]
    assert run_command(
        ["epos", "--metric", files["toyama-r"],
         "--term", "F(0, 1, x)", "--epsilon", "2"]
    ) in (0, 1)


def test_classify(files, capsys):
    assert run_command(["classify", "--metric", files["toyama-s"], "--json"]) == 0
    rules = json.loads(capsys.readouterr().out)["rules"]
    assert "collapsing" in rules["left"]


def test_union_report(files, tmp_path):
    report = tmp_path / "r.json"
    assert run_command(
        ["union", files["exnonlin-s"], files["exnonlin-s"],
         "--out", str(tmp_path / "u.itrs"), "--report", str(report)]
    ) == 0
    data = json.loads(report.read_text())
    assert data["left"]["S"] == "S#1"
    assert data["right"]["S"] == "S#2"
    assert run_command(["check", str(tmp_path / "u.itrs")]) == 0


def test_simulate_writes_replayable_trace(files, tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert run_command(
        ["simulate", "--metric", files["exnonlin-s"], "--term", "0",
         "--max-steps", "4", "--out", str(trace)]
    ) == 0
    lines = [json.loads(l) for l in trace.read_text().splitlines()]
    assert sum(1 for e in lines if "term" in e) == 5
    assert sum(1 for e in lines if "step" in e) == 4
    assert lines[-1] == {"omega": None}


def test_analyze_and_replay_witness(files, tmp_path, capsys):
    witness = tmp_path / "w.json"
    assert run_command(
        ["analyze", "--metric", files["toyama-r"], files["toyama-s"],
         "--term", "F(0, 1, G(0, 1))", "--json", "--out", str(witness),
         "--budget", "5000"]
    ) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert verdict["verdict"] == "diverging"
    assert verdict["witness"]["type"] == "loop"
    assert run_command(["replay", str(witness)]) == 0


def test_corpus_subcommand(capsys):
    assert run_command(["corpus", "toyama"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "FAIL" not in out


def test_layers_subcommand(files, capsys):
    assert run_command(
        ["layers", "--metric", files["exa-layers-r"], files["exa-layers-s"],
         "--term", "mu X. F(F(H(X)))", "--json"]
    ) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["principal_positions"] == [[1, 1]]
    assert data["rank"] == "inf"
    assert data["cycles"][0]["length"] == 3


def test_xi_and_cutoff_on_recorded_trace(files, tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert run_command(
        ["simulate", "--metric", files["exnonlin-r"], files["exnonlin-s"],
         "--term", "F(0, 0, 0)", "--max-steps", "4", "--out", str(trace)]
    ) == 0
    capsys.readouterr()
    assert run_command(
        ["cutoff", "--metric", files["exnonlin-r"], files["exnonlin-s"],
         "--trace", str(trace), "--layers", "1", "--fill", "x", "--json"]
    ) == 0
    assert json.loads(capsys.readouterr().out)["violations"] == []
    assert run_command(
        ["xi", "--metric", files["exnonlin-r"], files["exnonlin-s"],
         "--trace", str(trace), "--rule", "succ", "--predicate", "fp:1",
         "--json", "--budget", "500"]
    ) == 0


def test_indirect_subcommand(files, capsys):
    assert run_command(["indirect", files["collapsing-r"]]) == 0
    out = capsys.readouterr().out
    assert "sig I/1 [strict]" in out
    assert "rule I-erase" in out


def test_vdepth_subcommand(files, capsys):
    assert run_command(
        ["vdepth", "--metric", files["ltree"], "--term", "Bin(x, Null, Null)",
         "--var", "x", "--at", "1", "--json"]
    ) == 0
    assert json.loads(capsys.readouterr().out)["value"] == "1/2"


def test_fixture_files_on_disk_match_sources():
    """The checked-in fixtures/ directory mirrors the corpus sources."""
    for name, text in ITRS_SOURCES.items():
        on_disk = (FIXDIR / f"{name}.itrs").read_text()
        assert on_disk.strip() == text.strip()
