"""CLI contract: commands, formats, exit codes, reproducibility."""

import json
from pathlib import Path

import pytest
from click.testing import CliRunner

from nmavc.cli import main

BSC = {"rows": [["7/10", "3/10"], ["3/10", "7/10"]]}
BAD_ROW_SUM = {"rows": [["7/10", "7/10"], ["3/10", "7/10"]]}
FLOAT_ROWS = {"rows": [[0.7, 0.3], [0.3, 0.7]]}
IDENTITY_2 = {"rows": ["10", "01"]}
PARITY_45 = {"rows": ["10001", "01001", "00101", "00011"]}

IDENTITY_CODE_K1 = {
    "k": 1, "n": 1, "rho": 0,
    "enc": {"0": ["0"], "1": ["1"]},
    "dec": {"0": "0", "1": "1"},
}

LINEAR_CODE_K1_N3 = {
    "k": 1, "n": 3, "rho": 0,
    "enc": {"0": ["000"], "1": ["111"]},
    "dec": {"000": "0", "111": "1"},
}


@pytest.fixture()
def runner():
    return CliRunner()


def write(tmp_path: Path, name: str, payload) -> str:
    path = tmp_path / name
    path.write_text(json.dumps(payload))
    return str(path)


def test_decompose_bsc(runner, tmp_path):
    path = write(tmp_path, "bsc.json", BSC)
    result = runner.invoke(main, ["decompose", path, "--format", "json"])
    assert result.exit_code == 0
    assert '"keep": "7/10"' in result.output
    assert '"flip": "3/10"' in result.output
    assert '"0"' in result.output and '"3/10"' in result.output


def test_decompose_identity(runner, tmp_path):
    path = write(tmp_path, "id.json", {"rows": [["1", "0"], ["0", "1"]]})
    result = runner.invoke(main, ["decompose", path, "--format", "json"])
    assert result.exit_code == 0
    report = json.loads(result.output.split("\n", 1)[1])
    assert report["alphas"] == {
        "keep": "1", "flip": "0", "set0": "0", "set1": "0", "erase": "0"
    }


def test_decompose_invalid_rows_exit_2(runner, tmp_path):
    for name, payload in (("bad.json", BAD_ROW_SUM), ("float.json", FLOAT_ROWS)):
        path = write(tmp_path, name, payload)
        result = runner.invoke(main, ["decompose", path])
        assert result.exit_code == 2


def test_delta_identity(runner, tmp_path):
    path = write(tmp_path, "i2.json", IDENTITY_2)
    result = runner.invoke(main, ["delta", path, "1/10", "--format", "json"])
    assert result.exit_code == 0
    report = json.loads(result.output.split("\n", 1)[1])
    assert report["delta"] == "19/100"


def test_delta_budget_exit_3(runner, tmp_path):
    wide = {"rows": ["1" * 25]}
    path = write(tmp_path, "wide.json", wide)
    result = runner.invoke(main, ["delta", path, "1/10", "--budget", "20"])
    assert result.exit_code == 3


def test_nm_verify_identity_code(runner, tmp_path):
    code = write(tmp_path, "code.json", IDENTITY_CODE_K1)
    seqs = write(
        tmp_path, "seqs.json",
        {"channels": {"id": {"rows": [["1", "0"], ["0", "1"]]}},
         "sequences": [["id"]]},
    )
    result = runner.invoke(
        main,
        ["nm-verify", code, "--sequences", seqs, "--budget", "100000",
         "--threshold", "0", "--format", "json"],
    )
    assert result.exit_code == 0, result.output


def test_nm_verify_threshold_failure(runner, tmp_path):
    # The linear repetition code has bit-family epsilon 1/2 (offset
    # attack), which misses a threshold of 1/4.
    code = write(tmp_path, "code.json", LINEAR_CODE_K1_N3)
    result = runner.invoke(
        main,
        ["nm-verify", code, "--family", "bit", "--budget", "100000",
         "--threshold", "1/4", "--format", "json"],
    )
    assert result.exit_code == 1
    report = json.loads(result.output.split("\n", 1)[1])
    assert report["certificate"]["epsilon"] == "1/2"
    assert report["passed"] is False


def test_nm_verify_budget_exit_3(runner, tmp_path):
    code = write(tmp_path, "code.json", LINEAR_CODE_K1_N3)
    result = runner.invoke(
        main, ["nm-verify", code, "--family", "bit", "--budget", "10"]
    )
    assert result.exit_code == 3


def test_nm_verify_requires_one_mode(runner, tmp_path):
    code = write(tmp_path, "code.json", IDENTITY_CODE_K1)
    result = runner.invoke(main, ["nm-verify", code, "--budget", "10"])
    assert result.exit_code == 2


def test_search_reports_micro_epsilon(runner, tmp_path):
    out = str(tmp_path / "searched.json")
    result = runner.invoke(
        main,
        ["search", "--k", "1", "--n", "1", "--rho", "0", "--trials", "4",
         "--seed", "0", "--out", out],
    )
    assert result.exit_code == 0
    payload = json.loads(Path(out).read_text())
    assert payload["meta"]["epsilon"] == "1/2"


def test_search_then_verify_round_trip(runner, tmp_path):
    out = str(tmp_path / "code.json")
    result = runner.invoke(
        main,
        ["search", "--k", "1", "--n", "3", "--rho", "1", "--trials", "6",
         "--seed", "4", "--out", out],
    )
    assert result.exit_code == 0
    meta_eps = json.loads(Path(out).read_text())["meta"]["epsilon"]
    verify = runner.invoke(
        main,
        ["nm-verify", out, "--family", "bit", "--budget", "100000",
         "--threshold", meta_eps, "--format", "json"],
    )
    assert verify.exit_code == 0, verify.output


def test_search_json_reproducible(runner, tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        out = str(tmp_path / name)
        result = runner.invoke(
            main,
            ["search", "--k", "1", "--n", "3", "--rho", "1", "--trials", "5",
             "--seed", "77", "--out", out, "--format", "json"],
        )
        assert result.exit_code == 0
        payload = json.loads(Path(out).read_text())
        payload["provenance"].pop("generated_at")
        outputs.append(json.dumps(payload, sort_keys=True))
    assert outputs[0] == outputs[1]


def demo_spec_path() -> str:
    return str(
        Path(__file__).parent.parent / "src" / "nmavc" / "data"
        / "demo_composed_spec.json"
    )


def test_composed_verify_demo_spec(runner, tmp_path):
    # Scaled-down run of the shipped demo: random sequences keep it fast;
    # the acceptance suite runs the exhaustive version.  The inner code
    # is inlined so the spec is self-contained under tmp_path.
    spec = json.loads(Path(demo_spec_path()).read_text())
    spec["sequences"] = {"random": 5, "seed": 13}
    spec["inner_code"] = json.loads(
        (Path(demo_spec_path()).parent / "demo_inner_code.json").read_text()
    )
    spec_file = tmp_path / "spec.json"
    spec_file.write_text(json.dumps(spec))
    result = runner.invoke(
        main,
        ["composed-verify", "--spec", str(spec_file), "--threshold", "3/8",
         "--format", "json"],
    )
    assert result.exit_code == 0, result.output
    report = json.loads(result.output.split("\n", 1)[1])
    assert report["delta"] == "4073/50000"
    assert report["passed"] is True


def test_composed_verify_missing_field_exit_2(runner, tmp_path):
    spec_file = write(tmp_path, "spec.json", {"outer": PARITY_45})
    result = runner.invoke(main, ["composed-verify", "--spec", str(spec_file)])
    assert result.exit_code == 2


def test_csv_format(runner, tmp_path):
    path = write(tmp_path, "bsc.json", BSC)
    result = runner.invoke(main, ["decompose", path, "--format", "csv"])
    assert result.exit_code == 0
    assert "key,value" in result.output
    assert "alphas.keep,7/10" in result.output


def test_text_format(runner, tmp_path):
    path = write(tmp_path, "i2.json", IDENTITY_2)
    result = runner.invoke(main, ["delta", path, "0", "--format", "text"])
    assert result.exit_code == 0
    assert "delta = 0" in result.output
