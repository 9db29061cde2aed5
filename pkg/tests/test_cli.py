from __future__ import annotations

import json
import subprocess
import sys

import pytest

from stonegpd import catalog
from stonegpd.cli import EXIT_FAIL, EXIT_GUARD, EXIT_OK, EXIT_USAGE, main
from stonegpd.logic.printer import format_theory


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_models_summary(capsys):
    code, out, _ = run(capsys, "models", "--theory", "t_eq", "--bound", "2")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "4 models, 7 isomorphisms"


def test_models_json_is_deterministic(capsys):
    _, a, _ = run(capsys, "models", "--theory", "t_graph", "-n", "2", "--json")
    _, b, _ = run(capsys, "models", "--theory", "t_graph", "-n", "2", "--json")
    assert a == b
    data = json.loads(a)
    assert len(data["objects"]) == 5
    assert "object_topology" in data


def test_verify_topology_passes(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "topology", "--theory", "t_graph")
    assert code == EXIT_OK
    assert "local-homeomorphism: PASS" in out


def test_verify_all_json(capsys):
    code, out, _ = run(capsys, "verify", "--theory", "t_eq", "--json")
    assert code == EXIT_OK
    data = json.loads(out)
    assert data["ok"] and not any(e["status"] == "FAIL" for e in data["entries"])


def test_duality_skips_when_unstable(capsys):
    code, out, _ = run(capsys, "duality", "--theory", "t_graph", "-n", "2")
    assert code == EXIT_OK
    assert "SKIPPED (adequacy: hom counts differ at 2 and 3)" in out
    code, _, _ = run(capsys, "duality", "--theory", "t_graph", "-n", "2", "--strict")
    assert code == EXIT_FAIL


def test_duality_passes_and_dumps(capsys):
    code, out, _ = run(capsys, "duality", "--theory", "t_eq", "-n", "2", "--dump-tables")
    assert code == EXIT_OK
    assert '"counit"' in out and "triangle-identities: PASS" in out


def test_corrupt_unit_fails(capsys):
    code, out, _ = run(capsys, "duality", "--theory", "t_eq", "-n", "2", "--corrupt-unit")
    assert code == EXIT_FAIL
    assert "triangle-identities: FAIL" in out
    assert "eta functorial" in out


def test_stone_line(capsys):
    code, out, _ = run(capsys, "stone", "16")
    assert code == EXIT_OK
    assert out.strip() == "all 5 BAs up to 16 elements: round trip OK"


def test_stone_json(capsys):
    code, out, _ = run(capsys, "stone", "8", "--json")
    data = json.loads(out)
    assert code == EXIT_OK and [a["atoms"] for a in data["algebras"]] == [0, 1, 2, 3]


def test_stone_emit(capsys):
    _, out, _ = run(capsys, "stone", "4", "--emit")
    assert len(json.loads(out)) == 3


def test_export_writes_files(capsys, tmp_path):
    code, out, _ = run(capsys, "export", "--theory", "t_eq", "--out", str(tmp_path))
    assert code == EXIT_OK
    names = sorted(p.name for p in tmp_path.iterdir())
    assert "groupoid.json" in names and "groupoid.dot" in names and "sheaf0.json" in names


def test_theory_from_file(capsys, tmp_path):
    path = tmp_path / "mine.thy"
    path.write_text(format_theory(catalog.load("t_graph")))
    code, out, _ = run(capsys, "models", "--theory", str(path))
    assert code == EXIT_OK and out.startswith("5 models, 9 isomorphisms")


def test_tracked_formula_flag(capsys):
    code, out, _ = run(capsys, "verify", "--suite", "sheaf", "--track", "[x:V | true]")
    assert code == EXIT_OK
    assert "stable-open-decomposition: PASS" in out


@pytest.mark.parametrize("argv,code", [
    (["models", "--theory", "/nonexistent/theory.thy"], EXIT_USAGE),
    (["models", "--bound", "0"], EXIT_USAGE),
    (["models", "--track", "[x:W | true]"], EXIT_USAGE),
    (["frobnicate"], EXIT_USAGE),
    (["models", "--bound", "9"], EXIT_GUARD),
    (["models", "--theory", "two_sorted", "-n", "3", "--ceiling", "100"], EXIT_GUARD),
])
def test_exit_codes(capsys, argv, code):
    got, _, err = run(capsys, *argv)
    assert got == code
    if code != EXIT_USAGE or argv[0] != "frobnicate":
        assert err.startswith("error:")


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "stonegpd", "models", "-n", "1"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.startswith("2 models, 2 isomorphisms")
