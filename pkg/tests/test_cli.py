import io
import json
import subprocess
import sys

import pytest

from smace.cli import main
from smace.io import generate_uniform_dataset, save_dataset
from smace.reports import parse_report

CONFIG = {
    "features": [{"name": "x1"}, {"name": "x2"}, {"name": "x3"}],
    "models": [
        {
            "name": "m1",
            "inputs": ["x2", "x3"],
            "backend": {"type": "linear", "coefficients": [2, 1]},
        },
        {
            "name": "m2",
            "inputs": ["x1", "x2", "x3"],
            "backend": {"type": "linear", "coefficients": [700, 1000, -500]},
        },
    ],
    "policy": {
        "rules": [
            {
                "name": "R3",
                "dsl": "if x1 <= 0.5 and x2 >= 0.6 and m1 >= 1 and m2 <= 600 then 1 else 0",
            }
        ],
        "default": 0,
    },
    "dataset": {"path": "data.csv", "format": "csv"},
}


@pytest.fixture()
def workspace(tmp_path):
    save_dataset(generate_uniform_dataset(("x1", "x2", "x3"), 400, 0), tmp_path / "data.csv")
    (tmp_path / "system.json").write_text(json.dumps(CONFIG))
    (tmp_path / "instance.json").write_text("[0.6, 0.1, 0.4]")
    return tmp_path


def _run(argv):
    out = io.StringIO()
    code = main(argv, out=out)
    return code, out.getvalue()


def test_validate_ok(workspace):
    code, output = _run(["validate", "--system", str(workspace / "system.json")])
    assert code == 0
    assert "valid" in output


def test_validate_reports_errors_and_exits_nonzero(workspace):
    config = json.loads(json.dumps(CONFIG))
    config["policy"]["rules"][0]["dsl"] = "if x1 >= x2 then 1"
    (workspace / "bad.json").write_text(json.dumps(config))
    code, output = _run(["validate", "--system", str(workspace / "bad.json")])
    assert code == 1
    assert "A2" in output


def test_explain_table_and_json(workspace):
    code, table = _run(
        [
            "explain",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--seed", "0",
        ]
    )
    assert code == 0
    assert "rule: R3" in table and "ranking" in table

    code, raw = _run(
        [
            "explain",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--seed", "0",
            "--format", "json",
        ]
    )
    assert code == 0
    report = parse_report(raw)
    assert report["rule"] == "R3"
    assert report["outcome"] == 0
    assert set(report["e"]) == {"x1", "x2", "x3"}
    assert set(report["r"]) == {"x1", "x2", "x3", "m1", "m2"}
    assert report["metadata"]["attribution_backend"] == "exact"
    assert report["metadata"]["background_seed"] == 0


def test_explain_unknown_rule_exits_2(workspace, capsys):
    code, _ = _run(
        [
            "explain",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--rule", "missing",
        ]
    )
    assert code == 2
    assert "RuleNotInPolicy" in capsys.readouterr().err


def test_explain_with_linear_engine(workspace):
    # all models here are linear, so the linear engine applies
    code, raw = _run(
        [
            "explain",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--backend", "linear",
            "--seed", "0",
            "--format", "json",
        ]
    )
    assert code == 0
    assert parse_report(raw)["metadata"]["attribution_backend"] == "linear"


def test_compare_json(workspace):
    code, raw = _run(
        [
            "compare",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--methods", "smace,shap,lime",
            "--seed", "0",
            "--format", "json",
        ]
    )
    assert code == 0
    document = parse_report(raw)
    assert set(document["methods"]) == {"smace", "shap", "lime"}
    assert set(document["methods"]["smace"]) == {"x1", "x2", "x3"}


def test_reproduce_cases_pass():
    for case in ("rules-generic", "rules-violation", "hybrid"):
        for flags in ([], ["--analytic-bounds"]):
            code, output = _run(["reproduce", "--case", case, *flags, "--seed", "0"])
            assert code == 0, output
            assert "PASS" in output


def test_reports_are_byte_identical_across_processes(workspace):
    argv = [
        sys.executable, "-m", "smace.cli",
        "explain",
        "--system", str(workspace / "system.json"),
        "--instance", str(workspace / "instance.json"),
        "--seed", "11",
        "--format", "json",
    ]
    first = subprocess.run(argv, capture_output=True, check=True)
    second = subprocess.run(argv, capture_output=True, check=True)
    assert first.stdout == second.stdout
    assert first.stdout


def test_real_report_round_trips_byte_identically(workspace):
    from smace.reports import emit_json

    code, raw = _run(
        [
            "explain",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--seed", "0",
            "--format", "json",
        ]
    )
    assert code == 0
    assert emit_json(parse_report(raw)) + "\n" == raw


def test_seed_falls_back_to_environment(workspace, monkeypatch):
    monkeypatch.setenv("SMACE_SEED", "23")
    code, raw = _run(
        [
            "explain",
            "--system", str(workspace / "system.json"),
            "--instance", str(workspace / "instance.json"),
            "--format", "json",
        ]
    )
    assert code == 0
    assert parse_report(raw)["metadata"]["background_seed"] == 23
