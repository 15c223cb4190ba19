import json
import math

import pytest

from geonull import cli
from geonull.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_analyze_flat_space(capsys):
    code, out, err = run_cli(
        capsys, "analyze", "--metric", "euclidean", "--dim", "3", "--point", "0,0,0"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == "geonull/1"
    assert doc["command"] == "analyze"
    assert doc["nullity"]["nullity"] == 3
    assert doc["nullity"]["conullity"] == 0
    assert doc["curvature"]["scalar_trace"] == pytest.approx(0.0, abs=1e-12)
    assert doc["curvature"]["nonflat_plane_curvature"] is None
    assert doc["splitting"] is None
    assert "took" in err and "took" not in out


def test_analyze_conullity3_worked_example(capsys):
    code, out, _ = run_cli(
        capsys, "analyze", "--metric", "conullity3", "--point", "0,0,0,0"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["nullity"]["conullity"] == 3
    assert doc["curvature"]["scalar_trace"] == pytest.approx(0.8, abs=1e-9)
    matrix = doc["splitting"]["matrix"]
    assert matrix[0][1] == pytest.approx(math.sqrt(2.0) / 5.0, abs=1e-8)
    assert doc["splitting"]["classification"]["kind"] == "nilpotent"
    kernel = doc["nullity"]["kernel_basis"][0]
    assert kernel == pytest.approx([0.0, 0.0, 1.0, 0.0], abs=1e-10)


def test_analyze_conullity_two_family(capsys):
    code, out, _ = run_cli(
        capsys, "analyze", "--metric", "sekigawa", "--p", "exp(u)", "--point", "0,0,0"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["nullity"]["conullity"] == 2
    assert doc["curvature"]["scalar_trace"] == pytest.approx(-2.0, abs=1e-9)
    assert doc["curvature"]["half_trace"] == pytest.approx(-1.0, abs=1e-9)
    assert doc["curvature"]["nonflat_plane_curvature"] == pytest.approx(-1.0, abs=1e-8)


def test_analyze_seed_is_recorded(capsys):
    code, out, _ = run_cli(
        capsys, "analyze", "--metric", "sphere", "--point", "1,0", "--seed", "7"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["seed"] == 7
    assert doc["curvature"]["sectional_min"] == pytest.approx(1.0, abs=1e-9)
    assert doc["curvature"]["sectional_max"] == pytest.approx(1.0, abs=1e-9)


def test_usage_errors_exit_one(capsys):
    assert run_cli(capsys)[0] == 1
    assert run_cli(capsys, "frobnicate")[0] == 1
    assert run_cli(capsys, "scan", "--metric", "euclidean")[0] == 1
    assert run_cli(capsys, "analyze", "--metric", "euclidean", "--point", "bogus")[0] == 1


def test_domain_errors_exit_two(capsys):
    code, out, err = run_cli(capsys, "analyze", "--metric", "sphere", "--point", "0,0")
    assert code == 2
    assert out == ""
    assert "error" in err


def test_version_flag(capsys):
    code, out, _ = run_cli(capsys, "--version")
    assert code == 0
    assert out.startswith("geonull ")


def test_scan_csv_layout(capsys):
    code, out, _ = run_cli(
        capsys,
        "scan",
        "--metric",
        "sekigawa",
        "--p",
        "2+u",
        "--grid",
        "u=-2.5:0.5:7,x=0:1:2",
    )
    assert code == 0
    lines = out.split("\r\n")
    assert lines[-1] == ""
    lines = lines[:-1]
    assert lines[0] == "x,u,v,scal,nullity,conullity,classification,status"
    assert len(lines) == 1 + 7 * 2
    # row-major over the grid axes, last axis fastest
    u_col = [line.split(",")[1] for line in lines[1:]]
    assert u_col[0] == u_col[1] == "-2.5"
    assert u_col[2] == u_col[3] == "-2"
    statuses = [line.split(",")[-1] for line in lines[1:]]
    # p = 2 + u crosses the positivity floor between u = -2 and u = -1.5
    assert statuses[:4] == ["domain"] * 4
    assert set(statuses[4:]) == {"ok"}
    domain_row = lines[1].split(",")
    assert domain_row[3] == "" and domain_row[4] == ""


def test_scan_thread_count_does_not_change_bytes(capsys, monkeypatch):
    argv = (
        "scan",
        "--metric",
        "conullity3",
        "--grid",
        "u=-1:1:3,w=-1:1:3",
    )
    monkeypatch.setenv("GEONULL_THREADS", "1")
    _, serial, _ = run_cli(capsys, *argv)
    monkeypatch.setenv("GEONULL_THREADS", "4")
    _, threaded, _ = run_cli(capsys, *argv)
    assert serial == threaded
    assert serial.count("\r\n") == 10


def test_scan_out_file(tmp_path, capsys):
    target = tmp_path / "rows.csv"
    code, out, _ = run_cli(
        capsys,
        "scan",
        "--metric",
        "euclidean",
        "--dim",
        "2",
        "--grid",
        "x0=0:1:2",
        "--out",
        str(target),
    )
    assert code == 0
    assert out == ""
    raw = target.read_bytes()
    assert raw.count(b"\r\n") == 3
    assert raw.startswith(b"x0,x1,scal,")


def test_flow_nullity_mode(capsys):
    code, out, _ = run_cli(
        capsys, "flow", "--metric", "conullity3", "--point", "0,0,0,0", "--tmax", "1"
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["mode"] == "nullity"
    assert doc["kernel_dimension"] == 1
    assert not doc["truncated"]
    assert doc["aborted"] is None
    assert doc["max_deviation"] < 1e-4
    assert doc["start_matrix"][0][1] == pytest.approx(math.sqrt(2.0) / 5.0, abs=1e-8)
    assert len(doc["samples"]) >= 5
    for sample in doc["samples"]:
        assert set(sample) == {"t", "C", "predicted", "deviation"}
        assert sample["deviation"] < 1e-4


def test_flow_custom_direction_reports_failure(capsys):
    code, out, _ = run_cli(
        capsys,
        "flow",
        "--metric",
        "conullity3",
        "--point",
        "0,0,0,0",
        "--direction",
        "0,1,0,0",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["mode"] == "custom"
    check = doc["nullity_check"]
    assert check["passed"] is False
    assert check["max_velocity_misalignment"] == pytest.approx(1.0, abs=1e-8)


def test_flow_kernel_direction_passes(capsys):
    code, out, _ = run_cli(
        capsys,
        "flow",
        "--metric",
        "conullity3",
        "--point",
        "0,0,0,0",
        "--direction",
        "0,0,1,0",
    )
    assert code == 0
    doc = json.loads(out)
    assert doc["nullity_check"]["passed"] is True
    assert doc["nullity_check"]["max_velocity_misalignment"] < 1e-8


def test_verify_text_output(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "riccati")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "seed 1729"
    assert lines[1] == "suite riccati: PASS"
    assert lines[-1] == "overall: PASS"
    assert all("[pass]" in line for line in lines[2:-1])


def test_verify_custom_seed_recorded(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "euclidean", "--seed", "7")
    assert code == 0
    assert out.splitlines()[0] == "seed 7"


def test_verify_all_suites_json(capsys):
    code, out, _ = run_cli(capsys, "verify", "--json")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert [s["suite"] for s in doc["suites"]] == list(cli.SUITE_ORDER)
    for suite in doc["suites"]:
        assert suite["passed"] is True
        assert all(check["passed"] for check in suite["checks"])


def test_verify_json_is_byte_deterministic(capsys):
    _, first, _ = run_cli(capsys, "verify", "--suite", "conullity3", "--json")
    _, second, _ = run_cli(capsys, "verify", "--suite", "conullity3", "--json")
    assert first == second


def test_verify_failure_exit_code(capsys, monkeypatch):
    def fake_suite(name, seed=cli.DEFAULT_SEED):
        return {
            "suite": name,
            "checks": [
                {
                    "name": "forced",
                    "passed": False,
                    "computed": 1.0,
                    "expected": 0.0,
                    "tolerance": 1e-9,
                }
            ],
            "passed": False,
        }

    monkeypatch.setattr(cli, "run_suite", fake_suite)
    code, out, _ = run_cli(capsys, "verify", "--suite", "sphere")
    assert code == 3
    assert "FAIL" in out
    assert out.splitlines()[-1] == "overall: FAIL"


def test_catalog_listing(capsys):
    code, out, _ = run_cli(capsys, "catalog")
    assert code == 0
    for name in ("euclidean", "sphere", "polar", "product", "sekigawa", "conullity3"):
        assert name + ":" in out

    code, out, _ = run_cli(capsys, "catalog", "--json")
    doc = json.loads(out)
    assert len(doc["entries"]) == 6
    for entry in doc["entries"]:
        assert entry["expectations"]


def test_json_out_matches_stdout(tmp_path, capsys):
    _, stdout_doc, _ = run_cli(capsys, "verify", "--suite", "product", "--json")
    target = tmp_path / "verify.json"
    code, out, _ = run_cli(
        capsys, "verify", "--suite", "product", "--json", "--out", str(target)
    )
    assert code == 0
    assert out == ""
    assert target.read_text() == stdout_doc
