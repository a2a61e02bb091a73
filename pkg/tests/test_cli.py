import csv
import json
import subprocess
import sys

import pytest

from opfractal import __version__
from opfractal.cli import EXIT_ARGS, EXIT_OK, EXIT_REFUSED, HANDLERS, RunConfig, main

# small but non-trivial arguments for every subcommand
QUICK = {
    "transform": ["--t", "1", "30", "120"],
    "gamma": ["--m", "4"],
    "gram": ["--m", "4", "--scale", "5"],
    "expand": ["--t", "125", "--m", "6"],
    "parseval": ["--t", "1/2", "--m", "6"],
    "operator": ["--m", "5"],
    "regression": [],
    "moments": ["--v", "e0+e1", "--K", "4"],
    "atom": ["--v", "e1", "--K", "4", "--m", "10"],
    "ergodic": ["--f", "e1", "--N", "8"],
    "sample": ["--samples", "70000", "--depth", "12"],
    "char": ["--samples", "70000", "--t", "1", "30"],
    "pushforward": ["--samples", "70000"],
    "figure1": ["--levels", "3", "--grid", "21"],
}


def run_to(tmp_path, name, args, fmt=None):
    out = tmp_path / f"{name}.out"
    extra = ["--format", fmt] if fmt else []
    code = main([name, *args, *extra, "--output", str(out)])
    return code, out


def test_every_subcommand_is_covered():
    assert set(QUICK) == set(HANDLERS)


@pytest.mark.parametrize("name", sorted(QUICK))
def test_bit_identical_across_runs_and_threads(tmp_path, name):
    blobs = []
    for threads in ("1", "1", "3"):
        out = tmp_path / f"{name}-{len(blobs)}"
        assert main([name, *QUICK[name], "--threads", threads, "--output", str(out)]) == EXIT_OK
        blobs.append(out.read_bytes())
    assert blobs[0] == blobs[1] == blobs[2]


def test_regression_json(tmp_path):
    code, out = run_to(tmp_path, "regression", [])
    doc = json.loads(out.read_text())
    assert code == EXIT_OK
    assert doc["schema"] == 1 and doc["version"] == __version__ and doc["seed"] == 0
    r = doc["result"]
    assert r["terms"] == 512
    assert 0.49 <= r["coeff_e5_of_e125"] <= 0.51
    assert 0.57 <= r["coeff_e5_of_U3e1"] <= 0.59
    assert doc["truncation"] == {"m": 9, "terms": 512}


def test_gamma_csv(tmp_path):
    _, out = run_to(tmp_path, "gamma", ["--m", "2"])
    rows = list(csv.reader(out.open(newline="")))
    assert rows[0] == ["index", "gamma", "digits"]
    assert [r[1] for r in rows[1:]] == ["0", "1", "4", "5"]
    assert out.read_bytes().endswith(b"\r\n")


def test_moments_csv(tmp_path):
    _, out = run_to(tmp_path, "moments", ["--v", "e0", "--K", "8"])
    rows = list(csv.DictReader(out.open(newline="")))
    assert [int(r["k"]) for r in rows] == list(range(9))
    assert all(float(r["re"]) == 1.0 and float(r["im"]) == 0.0 for r in rows)


def test_refusal_exit_code_and_null_result(tmp_path):
    code, out = run_to(tmp_path, "ergodic", ["--f", "e1", "--N", "64"])
    assert code == EXIT_REFUSED
    doc = json.loads(out.read_text())
    assert doc["result"] is None
    assert "exceeds" in doc["reason"]
    assert doc["leakage_budget"] > 0.1


def test_refusal_can_be_lifted(tmp_path):
    code, out = run_to(tmp_path, "ergodic", ["--f", "e1", "--N", "16", "--max-leakage", "none"])
    assert code == EXIT_OK
    assert json.loads(out.read_text())["config"]["params"]["max_leakage"] is None


def test_argument_errors(tmp_path):
    assert main(["gamma", "--tol", "0"]) == EXIT_ARGS
    assert main(["figure1", "--levels", "13"]) == EXIT_ARGS
    assert main(["gamma", "--m", "40"]) == EXIT_ARGS
    with pytest.raises(SystemExit) as err:
        main(["nonsense"])
    assert err.value.code == 2
    with pytest.raises(ValueError):
        RunConfig("gamma", fmt="xml")


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("OPFRACTAL_OUTPUT_DIR", str(tmp_path / "d"))
    assert main(["gamma", "--m", "1"]) == EXIT_OK
    assert (tmp_path / "d" / "gamma.csv").read_text().startswith("index,gamma")
    assert not [p for p in (tmp_path / "d").iterdir() if p.name.endswith(".tmp")]


def test_stdout_and_module_entry():
    proc = subprocess.run(
        [sys.executable, "-m", "opfractal", "gamma", "--m", "1"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines() == ["index,gamma,digits", "0,0,0", "1,1,1"]


def test_json_has_no_nan(tmp_path):
    for name in ("atom", "char", "pushforward", "operator", "gram", "parseval"):
        _, out = run_to(tmp_path, name, QUICK[name], fmt="json")
        text = out.read_text()
        assert "NaN" not in text and "Infinity" not in text
        doc = json.loads(text)
        for key in ("schema", "tool", "version", "config", "seed", "truncation", "leakage_budget"):
            assert key in doc
