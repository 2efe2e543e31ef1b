import io
import json
import subprocess
import sys

import pytest

from codegraphs.cli import main
from programs import LOOP_FN, GOLDEN


@pytest.fixture
def src(tmp_path):
    def make(text, name="prog.py"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return str(path)
    return make


def test_complexity(src, capsys):
    assert main(["complexity", src(GOLDEN["fn5"])]) == 0
    out = capsys.readouterr().out
    assert out.startswith("M=3 E=") and out.strip().endswith("P=1")


def test_liveness_table(src, capsys):
    assert main(["liveness", src(LOOP_FN)]) == 0
    rows = capsys.readouterr().out.strip().splitlines()[1:]
    assert [r.split("\t")[1:3] for r in rows] == [
        ["∅", "{x}"], ["{x}", "{i, x}"], ["{i, x}", "{x}"], ["{x}", "∅"]]


def test_liveness_json(src, capsys):
    assert main(["liveness", src(LOOP_FN), "--format", "json"]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data[1]["live_out"] == ["i", "x"]


def test_missing_file(capsys, tmp_path):
    assert main(["cfg", str(tmp_path / "missing.py")]) == 1
    assert "file not found" in capsys.readouterr().err


def test_analysis_error_prints_category(src, capsys):
    assert main(["cfg", src("return 1\n")]) == 1
    assert "ReturnOutsideFunction" in capsys.readouterr().err
    assert main(["pg", src("def f(:\n")]) == 1
    assert "SyntaxError" in capsys.readouterr().err


def test_usage_errors(src, capsys):
    assert main([]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["cfg", src("x = 1\n"), "--format", "png"]) == 2
    assert main(["pg", src("x = 1\n"), "--edge-types", "NOPE"]) == 2
    assert main(["corpus", ".", "--format", "csv"]) == 2
    assert main(["corpus", ".", "--workers", "0"]) == 2


def test_help_lists_every_flag(capsys):
    for command, flags in {
        "cfg": ["--format", "--interrupting", "--function", "--label-style", "--output", "--config"],
        "pg": ["--edge-types", "--format", "--output"],
        "liveness": ["--show-synthetic", "--interrupting", "--function"],
        "complexity": ["--format"],
        "corpus": ["--cap", "--workers", "--format", "--glob", "--timeout"],
    }.items():
        assert main([command, "--help"]) == 0
        out = capsys.readouterr().out
        for flag in flags:
            assert flag in out, (command, flag)


def test_json_stdout_is_pure(src, capsys):
    assert main(["pg", src("a = b\n"), "--format", "json"]) == 0
    captured = capsys.readouterr()
    assert json.loads(captured.out)["kind"] == "program_graph"
    assert captured.err == ""


def test_cfg_dot_function(src, capsys):
    assert main(["cfg", src(LOOP_FN), "--function", "fn1", "--label-style", "figure"]) == 0
    out = capsys.readouterr().out
    assert "b4" in out and "b5" not in out and "i = next(.0)" in out


def test_stdin(monkeypatch, capsys):
    monkeypatch.setattr(sys, "stdin", io.StringIO(GOLDEN["fn8"]))
    assert main(["complexity", "-"]) == 0
    assert capsys.readouterr().out.startswith("M=1 ")


def test_output_file(src, tmp_path):
    out = tmp_path / "g.json"
    assert main(["cfg", src(GOLDEN["fn7"]), "--format", "json", "--interrupting", "-o", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert any(e["type"] == "INTERRUPTING" for e in doc["edges"])


def test_config_and_environment(tmp_path, monkeypatch, capsys):
    (tmp_path / "corpus").mkdir()
    (tmp_path / "corpus" / "a.py").write_text("x = 1\n")
    conf = tmp_path / "conf"
    conf.write_text("format = jsonl\n# comment\nworkers = 2\n")
    assert main(["corpus", str(tmp_path / "corpus"), "--config", str(conf)]) == 0
    assert json.loads(capsys.readouterr().out.splitlines()[0])["record"] == "header"
    conf.write_text("bogus = 1\n")
    assert main(["corpus", str(tmp_path / "corpus"), "--config", str(conf)]) == 2
    monkeypatch.setenv("CODEGRAPHS_WORKERS", "zero")
    assert main(["corpus", str(tmp_path / "corpus")]) == 2


def test_module_entry_point(src):
    done = subprocess.run([sys.executable, "-m", "codegraphs", "complexity", src(GOLDEN["fn8"])],
                          capture_output=True, text=True)
    assert done.returncode == 0 and done.stdout.startswith("M=1")
