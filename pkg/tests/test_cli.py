import json
from pathlib import Path

import pytest

from src.backend.cli import render, run
from src.main import main

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def write(tmp_path, text: str) -> str:
    path = tmp_path / "instance.toml"
    path.write_text(text, encoding="utf-8")
    return str(path)


def test_decide_rational_instance():
    result = run(["decide", str(INSTANCES / "c4_sigma2.toml")])
    assert result.exit_code == 0
    assert result.report.subcommand == "decide"
    assert result.report.result["status"] == "rational"
    assert result.report.result["certificate"]["kind"] == "explicit_generators"
    assert result.summary.startswith("rational: C4/kernel-sigma^2")


def test_decide_obstructed_instance():
    result = run(["decide", str(INSTANCES / "c2_2_obstructed.toml")])
    assert result.exit_code == 1
    assert "(-1,-1)_{2,Q}" in result.summary


def test_decide_undecided_instance(tmp_path):
    path = write(tmp_path, 'group = "C3"\nparams = { c = 2 }\n')
    result = run(["decide", path])
    assert result.exit_code == 2
    assert result.report.result["status"] == "undecided"


def test_decide_batch():
    result = run(["decide", "--batch", str(INSTANCES / "batch.toml")])
    statuses = [entry["status"] for entry in result.report.result]
    assert statuses == ["rational", "rational", "not_rational", "rational", "rational"]
    assert result.exit_code == 1
    assert len(result.summary.splitlines()) == 5


def test_batch_with_an_invalid_instance(tmp_path):
    path = write(tmp_path, '[[instance]]\ngroup = "C2_3"\n\n[[instance]]\ngroup = "D4"\nH = "tau"\n')
    result = run(["decide", "--batch", path])
    assert result.exit_code == 3
    assert result.report.result[1]["error_code"] == "invalid_instance"


def test_invalid_instance_exit_code(tmp_path):
    path = write(tmp_path, 'group = "C2_2"\nepsilon = 2\nparams = { a = 2, b = 7 }\n')
    result = run(["decide", path])
    assert result.exit_code == 3
    assert "epsilon" in result.report.result["details"]["field_errors"]


def test_malformed_toml(tmp_path):
    path = write(tmp_path, 'group = "C4\n')
    result = run(["decide", path])
    assert result.exit_code == 65
    assert result.report.result["error_code"] == "parse_error"


@pytest.mark.parametrize("argv", [[], ["frobnicate"], ["decide", "/no/such/file.toml"],
                                  ["--bound", "-1", "conic", "2", "7"], ["symbol", "2", "3", "--deg", "5"]])
def test_usage_errors(argv):
    assert run(argv).exit_code == 64


def test_dim1():
    assert run(["dim1", "2", "-1"]).exit_code == 0
    assert run(["dim1", "-1", "-1"]).exit_code == 1


def test_conic():
    result = run(["conic", "2", "7"])
    assert result.exit_code == 0
    assert result.report.result == {"point": [3, 1, 1], "hilbert_symbol": "zero", "ramified_places": []}

    result = run(["conic", "-1", "-1"])
    assert result.exit_code == 0
    assert result.report.result["point"] is None
    assert result.report.result["ramified_places"] == ["2", "inf"]


def test_symbol():
    result = run(["symbol", "2", "7", "--deg", "3"])
    assert result.exit_code == 0
    assert result.report.result["value"] == "nonzero"
    assert result.report.inputs["base"] == "Q(omega)"

    result = run(["symbol", "-1", "-1", "--base", "Q(sqrt(-1))"])
    assert result.report.result["value"] == "zero"


def test_symbol_over_a_quadratic_extension():
    result = run(["symbol", "--deg", "2", "-1", "-1", "--ext", "-1"])
    assert result.exit_code == 0
    assert result.report.result["value"] == "zero"
    assert result.report.inputs["base"] == "Q(sqrt(-1))"

    result = run(["symbol", "--deg", "2", "-1", "-1", "--ext", "2"])
    assert result.report.result["value"] == "nonzero"

    assert run(["symbol", "-1", "-1", "--ext", "-1", "--base", "Q"]).exit_code == 64


def test_symbol_bound_after_the_subcommand():
    local = run(["symbol", "--deg", "3", "2", "5", "--bound", "0"])
    assert local.exit_code == 0
    assert local.report.result["value"] == "undecided"
    assert local.report.inputs["search_bound"] == 0

    global_flag = run(["--bound", "0", "symbol", "--deg", "3", "2", "5"])
    assert global_flag.report.result == local.report.result

    overridden = run(["--bound", "0", "symbol", "--deg", "3", "2", "7", "--bound", "3"])
    assert overridden.report.inputs["search_bound"] == 3
    assert overridden.report.result["value"] == "nonzero"


def test_classify():
    result = run(["classify", "sigma"])
    assert result.report.result["label"] == "C4"
    assert result.report.result["order"] == 4
    result = run(["classify", "0,1,1,0", "rho"])
    assert result.report.result["label"] == "D6"


def test_verify_case_and_list_cases():
    result = run(["verify-case", "C2_1/trivial-kernel"])
    assert result.exit_code == 0
    assert result.summary.startswith("PASS")
    tags = run(["list-cases"]).report.result
    assert "C2_1/trivial-kernel" in tags
    assert run(["verify-case", "C9/none"]).exit_code != 0


def test_reports_are_deterministic_without_timing():
    argv = ["decide", str(INSTANCES / "c4_sigma2.toml")]
    first = render(run(argv), include_timing=False)[0]
    second = render(run(argv), include_timing=False)[0]
    assert first == second
    payload = json.loads(first)
    assert "timing" not in payload
    assert payload["inputs"]["seed"] == 0


def test_main_prints_json(capsys):
    assert main(["--json-only", "conic", "2", "7"]) == 0
    out, err = capsys.readouterr()
    assert json.loads(out)["result"]["point"] == [3, 1, 1]
    assert err == ""
