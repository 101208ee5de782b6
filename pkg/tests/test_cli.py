from __future__ import annotations

import json
import subprocess
import sys

import pytest

from specdiag.cli import main


@pytest.fixture
def files(tmp_path):
    def write(name, obj):
        path = tmp_path / name
        path.write_text(json.dumps(obj))
        return str(path)

    return write


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, json.loads(out)


def test_check_weak_identical(files, capsys):
    d = files("d.json", [3.0, 1.0])
    code, doc = run(["check", "--order", "weak", "--d", d, "--s", d], capsys)
    assert code == 0 and doc["report"]["verdict"] is True
    assert doc["schema"] == "specdiag/1"


def test_check_thompson_infeasible(files, capsys):
    d, s = files("d.json", [2.0, 0.0]), files("s.json", [2.0, 1.0])
    code, doc = run(["check", "--order", "thompson", "--d", d, "--s", s], capsys)
    assert code == 1 and doc["report"]["verdict"] is False


def test_construct_unitary(files, capsys, tmp_path):
    d = files("d.json", {"head": [0.9, 0.92, 0.95], "tail": {"kind": "ones"}})
    out = str(tmp_path / "u.json")
    code, doc = run(["construct", "--kind", "unitary", "--d", d, "--out", out], capsys)
    assert code == 0 and (doc["rows"], doc["cols"]) == (4, 4)
    assert doc["witness"]["N"] == 2 and json.loads(open(out).read())["entries"] == doc["entries"]


def test_construct_then_verify(files, capsys, tmp_path):
    d, s = files("d.json", [8.0, 2.0, 2.0]), files("s.json", [10.0, 5.0, 3.0])
    m = str(tmp_path / "m.json")
    assert run(["construct", "--kind", "thompson", "--d", d, "--s", s, "--out", m], capsys)[0] == 0
    code, doc = run(["verify", "--matrix", m, "--d", d, "--s", s], capsys)
    assert code == 0 and doc["report"]["pass"] is True
    bad = files("bad_s.json", [10.0, 5.0, 4.0])
    assert run(["verify", "--matrix", m, "--d", d, "--s", bad], capsys)[0] == 3


def test_plan_and_realize(files, capsys, tmp_path):
    d = files("d.json", {"head": [], "tail": {"kind": "geometric", "c": 0.5, "r": 0.5}})
    s = files("s.json", {"head": [1.0], "tail": {"kind": "geometric", "c": 0.5, "r": 0.5}})
    p = str(tmp_path / "p.json")
    code, doc = run(["plan", "--d", d, "--s", s, "--depth", "2", "--out", p], capsys)
    assert code == 0 and doc["case_tag"] == "Case2_InfimumNotAttained" and doc["data"]["m"][0] == 3
    code, doc = run(["realize", "--plan", p], capsys)
    assert code == 0 and doc["rows"] == 4


def test_certify_exit_codes(files, capsys):
    psd = files("psd.json", {"rows": 2, "cols": 2, "field": "real", "entries": [2.0, 1.0, 1.0, 1.0]})
    nil = files("nil.json", {"rows": 2, "cols": 2, "field": "real", "entries": [0.0, 1.0, 0.0, 0.0]})
    assert run(["certify", "--theorem", "trace", "--matrix", psd], capsys)[0] == 0
    assert run(["certify", "--theorem", "trace", "--matrix", nil], capsys)[0] == 2
    assert run(["certify", "--theorem", "tight-unitary", "--matrix", nil], capsys)[0] == 2


def test_sample(files, capsys, tmp_path):
    s = files("s.json", [3.0, 2.0, 1.0])
    out = tmp_path / "samples.json"
    code, doc = run(["sample", "--s", s, "--trials", "50", "--seed", "1", "--out", str(out)], capsys)
    assert code == 0 and doc["report"]["violations"] == 0
    assert len(json.loads(out.read_text())["diagonals"]) == 50


def test_usage_errors(files, capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{"head": [1,\n')
    code, doc = run(["check", "--order", "weak", "--d", str(broken), "--s", str(broken)], capsys)
    assert code == 64 and "broken.json:2" in doc["message"]
    assert run(["check", "--order", "weak"], capsys)[0] == 64
    assert run(["nonsense"], capsys)[0] == 64
    m = files("m.json", {"rows": 2, "cols": 2, "field": "real"})
    code, doc = run(["certify", "--theorem", "trace", "--matrix", m], capsys)
    assert code == 64 and "entries" in doc["message"]


def test_module_entry_point_version():
    out = subprocess.run([sys.executable, "-m", "specdiag", "--version"], capture_output=True, text=True, check=True)
    assert "specdiag/1" in out.stdout
