import io
import json
import subprocess
import sys
from pathlib import Path

import pytest

from linfty import cli

MANIFESTS = Path(__file__).resolve().parent.parent / "manifests"

RUNS = [
    ("check-linfty", "sl2", 0),
    ("check-linfty", "sl2_corrupt", 1),
    ("check-linfty", "affine_line", 0),
    ("build-q", "sl2", 0),
    ("build-q", "sl2_corrupt", 1),
    ("derived-brackets", "sl2", 0),
    ("transfer", "rotation", 0),
    ("check-zconn", "zconn_graded", 0),
    ("check-zconn", "zconn_line", 0),
    ("chern", "zconn_graded", 0),
    ("chern", "zconn_line", 0),
    ("transgression", "transgression", 0),
    ("atiyah", "atiyah_sl2", 0),
    ("kan", "kan_z3", 0),
    ("kan", "kan_poset", 0),
    ("path-object", "path_z2", 0),
    ("path-object", "kan_poset", 1),
    ("prism", "prism2", 0),
    ("collapsible", "collapsible", 0),
    ("mc-check", "locsys_z", 0),
    ("mc-check", "locsys_z_bad", 1),
    ("locsys-ops", "locsys_z", 0),
    ("chen", "chen", 0),
    ("phi", "phi", 0),
    ("rh", "rh_square", 0),
    ("rh", "rh_upper", 0),
    ("foliated-cohomology", "foliated", 0),
    ("check-linfty", "empty", 2),
    ("kan", "sl2", 2),
]


def run(command, name, fmt="text"):
    buf = io.StringIO()
    code = cli.run(command, str(MANIFESTS / f"{name}.json"), fmt, out=buf)
    return code, buf.getvalue()


@pytest.mark.parametrize("command,name,code", RUNS)
def test_exit_codes(command, name, code):
    assert run(command, name)[0] == code


@pytest.mark.parametrize("command,name,code", RUNS)
def test_json_reports(command, name, code):
    got, text = run(command, name, "json")
    data = json.loads(text)
    assert data["command"] == command
    assert data["status"] == {0: "pass", 1: "fail", 2: "error"}[got]


def test_every_command_has_a_manifest():
    assert {c for c, _, code in RUNS if code != 2} == set(cli.COMMANDS)


def test_corrupt_witness_reported():
    code, text = run("check-linfty", "sl2_corrupt", "json")
    failing = [c for c in json.loads(text)["checks"] if not c["passed"]]
    assert [c["witness"]["tuple"] for c in failing] == [["e", "f", "h"]]
    code, text = run("check-linfty", "sl2_corrupt")
    assert "FAIL" in text and "witness=" in text


@pytest.mark.parametrize("command,name", [("check-linfty", "sl2_corrupt"), ("rh", "rh_square"),
                                          ("mc-check", "locsys_z_bad"), ("transfer", "rotation")])
def test_deterministic(command, name):
    for fmt in ("text", "json"):
        assert run(command, name, fmt)[1] == run(command, name, fmt)[1]


def test_bad_inputs(tmp_path):
    cases = {"blank.json": "  ", "broken.json": "{", "list.json": "[1]",
             "schema.json": json.dumps({"schema": "other/2", "kind": "linfty"})}
    for fname, text in cases.items():
        p = tmp_path / fname
        p.write_text(text)
        assert cli.run("check-linfty", str(p), out=io.StringIO()) == 2
    assert cli.run("check-linfty", str(tmp_path / "missing.json"), out=io.StringIO()) == 2


def test_bad_rational(tmp_path):
    m = json.loads((MANIFESTS / "sl2.json").read_text())
    m["brackets"][0]["value"] = {"h": "1/0"}
    p = tmp_path / "m.json"
    p.write_text(json.dumps(m))
    assert cli.run("check-linfty", str(p), out=io.StringIO()) == 2


def test_internal_error_exit_code(monkeypatch):
    def boom(m, rep):
        raise RuntimeError("invariant broke")

    monkeypatch.setitem(cli.COMMANDS, "check-linfty", boom)
    assert run("check-linfty", "sl2")[0] == 3


@pytest.mark.parametrize("value,code", [("2", 0), ("1", 0), ("0", 2), ("many", 2)])
def test_thread_variable(monkeypatch, value, code):
    monkeypatch.setenv("LINFTY_THREADS", value)
    assert run("check-linfty", "sl2")[0] == code


def test_entry_point():
    proc = subprocess.run([sys.executable, "-m", "linfty", "check-linfty", str(MANIFESTS / "sl2.json"),
                           "--report", "json"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["status"] == "pass"
    assert cli.main(["mc-check", str(MANIFESTS / "locsys_z_bad.json")]) == 1
