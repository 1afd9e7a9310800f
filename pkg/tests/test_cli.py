"""
Test file for the yardloc command line
Exit codes, output streams and report files of each subcommand.
"""

import io
import json

import pytest

from main_cli import EXIT_DOMAIN, EXIT_OK, EXIT_USAGE, YardLocCLI
from modules.reporting import read_report


def run(*argv):
    stdout, stderr = io.StringIO(), io.StringIO()
    code = YardLocCLI(stdout=stdout, stderr=stderr).run(list(argv))
    return code, stdout.getvalue(), stderr.getvalue()


@pytest.fixture
def broken_instance(tmp_path, sample_path):
    with open(sample_path("line3"), encoding="utf-8") as handle:
        data = json.load(handle)
    data["demands"].append({"origin": "A", "destination": "A", "volume": 10})
    data["demands"][0]["volume"] = -5
    path = tmp_path / "broken.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return str(path)


def test_validate_sample(sample_path):
    code, _, _ = run("validate", sample_path("line3"))
    assert code == EXIT_OK


def test_validate_reports_violations(broken_instance):
    code, out, err = run("validate", broken_instance)
    assert code == EXIT_DOMAIN
    assert "DEMAND-SELF-LOOP" in out
    assert "DEMAND-VOLUME" in out
    assert "violation" in err


def test_validate_missing_file(tmp_path):
    code, _, err = run("validate", str(tmp_path / "absent.json"))
    assert code == EXIT_USAGE
    assert "I/O error" in err


def test_validate_malformed_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("[1, 2", encoding="utf-8")
    assert run("validate", str(path))[0] == EXIT_USAGE


def test_count(sample_path):
    code, out, _ = run("count", sample_path("line3"))
    assert code == EXIT_OK
    assert "combinations including plan 0: 2" in out
    assert "combinations excluding plan 0: 1" in out


def test_solve_line3(tmp_path, sample_path):
    report = tmp_path / "report.txt"
    code, out, err = run("solve", sample_path("line3"), "--out", str(report))
    assert code == EXIT_OK
    assert "Cost Breakdown" in out
    assert "objective 438000.000" in err
    records = read_report(str(report))
    assert records["cost"][0]["objective"] == 438000
    assert records["decision"][0]["plan"] == 0


def test_solve_expansion_pays_off(tmp_path, sample_path):
    report = tmp_path / "report.txt"
    assert run("solve", sample_path("line3_expand"), "--out", str(report))[0] == EXIT_OK
    records = read_report(str(report))
    assert records["decision"][0]["plan"] == 1
    assert records["cost"][0]["z_total"] == 1200


def test_budget_override_zero(tmp_path, sample_path):
    report = tmp_path / "report.txt"
    code, _, _ = run("solve", sample_path("line3_expand"), "--budget-override", "0", "--out", str(report))
    assert code == EXIT_OK
    records = read_report(str(report))
    assert all(entry["plan"] == 0 for entry in records["decision"])
    assert records["cost"][0]["budget"] == 0


def test_track_fn_override(tmp_path, sample_path):
    report = tmp_path / "report.txt"
    assert run("solve", sample_path("line3"), "--track-fn", "linear", "--out", str(report))[0] == EXIT_OK
    assert read_report(str(report))["instance"][0]["track_fn"] == "linear"


def test_step_override_keeps_file_thresholds(tmp_path, sample_path):
    with open(sample_path("line3"), encoding="utf-8") as handle:
        data = json.load(handle)
    data["economics"]["track_fn"] = {"kind": "step", "thresholds": [100, 200, 400]}
    instance = tmp_path / "narrow.json"
    instance.write_text(json.dumps(data), encoding="utf-8")
    report = tmp_path / "report.txt"
    assert run("solve", str(instance), "--track-fn", "step", "--out", str(report))[0] == EXIT_OK
    yards = {entry["node"]: entry for entry in read_report(str(report))["yard"]}
    # relayed, A sends 150 cars to B: one track under a_n = 200 n, two here
    assert yards["A"]["tracks_used"] == 2


def test_solve_log_file(tmp_path, sample_path):
    log = tmp_path / "log.jsonl"
    assert run("solve", sample_path("line3_expand"), "--log", str(log))[0] == EXIT_OK
    entries = [json.loads(line) for line in log.read_text(encoding="utf-8").splitlines()]
    assert [entry["decision"] for entry in entries] == [[0], [1]]


@pytest.mark.parametrize("mode", ["enumerate", "anneal"])
def test_reports_identical_across_runs_and_threads(tmp_path, sample_path, monkeypatch, mode):
    outputs = []
    for index, threads in enumerate(("1", "4")):
        monkeypatch.setenv("YARDLOC_THREADS", threads)
        path = tmp_path / f"report{index}.txt"
        code, _, _ = run("solve", sample_path("line3_expand"), "--mode", mode, "--tcs", "heuristic",
                         "--seed", "3", "--out", str(path))
        assert code == EXIT_OK
        outputs.append(path.read_bytes())
    assert outputs[0] == outputs[1]


def test_enumeration_limit_suggests_anneal(sample_path):
    code, _, err = run("solve", sample_path("line3_expand"), "--enumerate-limit", "1")
    assert code == EXIT_DOMAIN
    assert "--mode anneal" in err


def test_solve_invalid_instance(broken_instance):
    code, out, _ = run("solve", broken_instance)
    assert code == EXIT_DOMAIN
    assert "DEMAND-VOLUME" in out


def test_generate_then_validate(tmp_path):
    path = tmp_path / "gen" / "six.json"
    code, _, err = run("generate", "--nodes", "6", "--seed", "4", "--out", str(path))
    assert code == EXIT_OK
    assert "wrote 6 nodes" in err
    assert run("validate", str(path))[0] == EXIT_OK


def test_generate_bad_spec(tmp_path):
    code, _, _ = run("generate", "--nodes", "1", "--out", str(tmp_path / "x.json"))
    assert code == EXIT_USAGE


@pytest.mark.parametrize("argv", [
    [],
    ["solve"],
    ["solve", "x.json", "--mode", "greedy"],
    ["frobnicate"],
])
def test_bad_arguments(argv):
    assert YardLocCLI(stdout=io.StringIO(), stderr=io.StringIO()).run(argv) == EXIT_USAGE
