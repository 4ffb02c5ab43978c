import json
import subprocess
import sys

import numpy as np
import pytest

from randerslie.cli import EXIT_FAIL, EXIT_OK, EXIT_USAGE, main

CLI_CATALOG = ["abelian(3)", "heisenberg3", "aff1", "so3"]


def run_cli(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


@pytest.mark.parametrize("name", CLI_CATALOG)
def test_catalog_show_then_validate_roundtrip(name, tmp_path, capsys):
    code, out, _ = run_cli(capsys, "catalog", "show", name)
    assert code == EXIT_OK
    record = json.loads(out)
    assert ("note" in record) == (name == "so3")
    path = write(tmp_path, "alg.json", out)
    code, out, _ = run_cli(capsys, "validate", path, "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["pass"] is True and doc["reports"][0]["residual"] == 0.0


def test_catalog_list_and_unknown(capsys):
    code, out, _ = run_cli(capsys, "catalog", "list", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["algebras"] == ["abelian(n)", "heisenberg3", "aff1", "so3"]
    code, _, err = run_cli(capsys, "catalog", "show", "sl2")
    assert code == EXIT_USAGE and "error" in err
    code, _, _ = run_cli(capsys, "catalog", "show")
    assert code == EXIT_USAGE


def test_validate_failure_exit_and_scale_hint(tmp_path, capsys):
    path = write(tmp_path, "long.json", {"algebra": "heisenberg3", "gram": np.eye(3).tolist(), "X": [0, 0, 2]})
    code, out, _ = run_cli(capsys, "validate", path, "--format", "json")
    assert code == EXIT_FAIL
    doc = json.loads(out)
    assert "N = 5" in doc["hint"]
    code, out, _ = run_cli(capsys, "validate", path, "--scale", "--format", "json")
    assert code == EXIT_OK and json.loads(out)["scale_N"] == 5


def test_validate_broken_algebra(tmp_path, capsys):
    rec = {"name": "broken", "dim": 3, "brackets": [
        {"i": 1, "j": 2, "k": 3, "c": 1.0}, {"i": 2, "j": 3, "k": 1, "c": 1.0}, {"i": 1, "j": 3, "k": 2, "c": -1.0},
        {"i": 1, "j": 2, "k": 1, "c": 0.9}]}
    code, out, _ = run_cli(capsys, "validate", write(tmp_path, "b.json", rec))
    assert code == EXIT_FAIL and "[FAIL] validate_algebra" in out


@pytest.mark.parametrize("content,needle", [
    ("{not json", "b.json:1:2"),
    ("[1, 2]", "expected a JSON object"),
    ('{"algebra": "sl2"}', "sl2"),
    ("{}", "neither"),
])
def test_validate_usage_errors(content, needle, tmp_path, capsys):
    code, _, err = run_cli(capsys, "validate", write(tmp_path, "b.json", content))
    assert code == EXIT_USAGE and needle in err


def test_missing_file(capsys):
    code, _, err = run_cli(capsys, "validate", "/nonexistent/x.json")
    assert code == EXIT_USAGE and "x.json" in err


def test_json_output_carries_text_fields(tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": "heisenberg3", "gram": np.eye(3).tolist(), "X": [0, 0, 0.5]})
    _, text, _ = run_cli(capsys, "validate", path)
    _, js, _ = run_cli(capsys, "validate", path, "--format", "json")
    doc = json.loads(js)
    for rep in doc["reports"]:
        assert f"{rep['check']}:" in text
        for key in rep["details"]:
            assert f"    {key}:" in text


@pytest.mark.parametrize("alg,x,der,kdim", [
    ("so3", [0, 0, 0.5], 3, 1),
    ("heisenberg3", [0, 0, 0.5], 6, 1),
    ("abelian(3)", [0, 0, 0], 9, 3),
])
def test_analyze_dimensions(alg, x, der, kdim, tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": alg, "gram": np.eye(3).tolist(), "X": x})
    code, out, _ = run_cli(capsys, "analyze", path, "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["der_dim"] == der and doc["kprime_dim"] == kdim
    assert len(doc["basis"]) == kdim
    assert doc["kprime_closure_residual"] < 1e-9


def test_verify_experiment(tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": "heisenberg3", "gram": np.eye(3).tolist(), "X": [0, 0, 0.5]})
    code, out, _ = run_cli(capsys, "verify", path, "--samples", "20", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [r["id"] for r in doc["records"]] == [
        "P-HOMOG", "P-HESSPD", "P-LEFTINV", "P-ISO-FWD", "P-ISO-BWD", "P-EQ-ISO", "P-XLEFTINV", "P-AUTISO",
        "P-T-MAP", "P-SCALING"]
    assert all(r["samples"] == 20 for r in doc["records"])


def test_verify_props_selection_and_seed(tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": "aff1", "X": [0, 0.5]})
    args = ["verify", path, "--props", "P-HOMOG,P-HESSPD", "--props", "P-SCALING", "--seed", "5", "--format", "json"]
    code, out, _ = run_cli(capsys, *args)
    assert code == EXIT_OK
    doc = json.loads(out)
    assert [r["id"] for r in doc["records"]] == ["P-HOMOG", "P-HESSPD", "P-SCALING"]
    assert {r["seed"] for r in doc["records"]} == {5}
    _, again, _ = run_cli(capsys, *args)
    strip = lambda d: [{k: v for k, v in r.items() if k != "wall_time"} for r in json.loads(d)["records"]]
    assert strip(out) == strip(again)


def test_verify_injected_map_and_fields(tmp_path, capsys):
    exp = {"algebra": "heisenberg3", "X": [0, 0, 0.5],
           "maps": [{"matrix": np.diag([1.0, -1.0, -1.0]).tolist()}],
           "fields": [{"kind": "chart_constant", "value": [0, 0, 0.5]}]}
    code, out, _ = run_cli(capsys, "verify", write(tmp_path, "e.json", exp), "--props", "P-ISO-BWD,P-XLEFTINV",
                           "--samples", "20", "--format", "json")
    assert code == EXIT_OK
    recs = {r["id"]: r for r in json.loads(out)["records"]}
    assert recs["P-ISO-BWD"]["residual"] == pytest.approx(1.0)


def test_verify_suite_file(tmp_path, capsys):
    suite = [{"id": "P-HOMOG", "algebra": "so3", "X": [0, 0, 0.5], "samples": 10},
             {"id": "P-SCALING", "algebra": "so3", "X": [0, 0, 2.0], "samples": 10}]
    code, out, _ = run_cli(capsys, "verify", write(tmp_path, "s.json", suite))
    assert code == EXIT_OK
    assert "2 properties, 0 failed" in out


@pytest.mark.parametrize("extra,needle", [
    (["--props", "P-NOPE"], "P-NOPE"),
])
def test_verify_usage_errors(extra, needle, tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": "so3"})
    code, _, err = run_cli(capsys, "verify", path, *extra)
    assert code == EXIT_USAGE and needle in err


def test_argparse_errors_exit_2(tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": "so3"})
    for argv in (["verify", path, "--samples", "0"], ["verify", path, "--tol", "-1"], ["frobnicate"], []):
        with pytest.raises(SystemExit) as exc:
            main(argv)
        assert exc.value.code == EXIT_USAGE
    capsys.readouterr()


def test_verify_invalid_randers_exits_1(tmp_path, capsys):
    path = write(tmp_path, "e.json", {"algebra": "so3", "X": [0, 0, 1.5]})
    code, out, _ = run_cli(capsys, "verify", path)
    assert code == EXIT_FAIL and "drift norm not below 1" in out


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "randerslie", "catalog", "show", "heisenberg3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["dim"] == 3
    proc = subprocess.run([sys.executable, "-m", "randerslie", "catalog", "show", "nope"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 2
