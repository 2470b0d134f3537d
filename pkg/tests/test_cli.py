import json

import pytest

from dqc.cli import ExperimentConfig, main
from dqc.mbqc import MeasurementPattern, zero_pattern


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_emit_pattern_is_deterministic(capsys):
    _, a = run(capsys, "emit-pattern", "--n", "2", "--m", "4", "--seed", "3")
    _, b = run(capsys, "emit-pattern", "--n", "2", "--m", "4", "--seed", "3")
    assert a.out == b.out
    p = MeasurementPattern.loads(a.out)
    assert (p.n, p.m) == (2, 4)


def test_emit_all_zero_pattern(capsys, tmp_path):
    out = tmp_path / "p.json"
    code, _ = run(capsys, "emit-pattern", "--n", "1", "--m", "3", "--generator", "all-zero", "--out", str(out))
    assert code == 0
    assert MeasurementPattern.loads(out.read_text()) == zero_pattern(1, 3)


def test_run_ubqc_with_loaded_pattern(capsys, tmp_path):
    path = tmp_path / "p.json"
    run(capsys, "emit-pattern", "--n", "1", "--m", "2", "--seed", "5", "--out", str(path))
    code, cap = run(capsys, "run-ubqc", "--pattern", str(path), "--seed", "1")
    assert code == 0
    report = json.loads(cap.out)
    assert report["pass"] and report["output_distance"] <= 1e-9
    assert len(report["transcript"]["rounds"]) == 3 * 2 + 1
    assert report["pattern"] == json.loads(path.read_text())


def test_run_ubqc_sample_mode_records_values(capsys):
    code, cap = run(capsys, "run-ubqc", "--n", "1", "--m", "2", "--mode", "sample", "--seed", "2")
    assert code == 0
    rounds = json.loads(cap.out)["transcript"]["rounds"]
    assert all(r["value"] is not None for r in rounds if r["kind"] != "qubit")


def test_run_qotp(capsys):
    code, cap = run(capsys, "run-qotp", "--trials", "3")
    assert code == 0 and json.loads(cap.out)["pass"]


def test_check_blindness(capsys):
    code, cap = run(capsys, "check", "--suite", "blindness", "--n", "1", "--m", "1", "--trials", "2")
    report = json.loads(cap.out)
    assert code == 0
    assert list(report) == ["check", "epsilon", "pass", "trials", "seed", "tol", "citation"]
    assert report["check"] == "blindness" and report["trials"] == 2


@pytest.mark.parametrize("argv", [
    ["check", "--suite", "nonsense"],
    ["frobnicate"],
    ["run-ubqc", "--n", "3", "--m", "4"],
    ["emit-pattern", "--n", "1"],
    ["emit-pattern", "--n", "1", "--m", "2", "--generator", "spiral"],
    ["check", "--suite", "qotp", "--n", "1", "--m", "1"],
])
def test_usage_errors_exit_2(capsys, argv):
    with pytest.raises(SystemExit) as exc:
        raise SystemExit(main(argv))
    assert exc.value.code == 2


def test_bad_pattern_file_exits_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"n": 1, "m": 1, "angles": [[9]]}))
    assert main(["run-ubqc", "--pattern", str(path)]) == 2
    assert main(["run-ubqc", "--pattern", str(tmp_path / "missing.json")]) == 2


def test_capacity_can_be_raised(monkeypatch):
    cfg = ExperimentConfig("run-ubqc", n=3, m=4)
    monkeypatch.setenv("DQC_QUBIT_CAP", "20")
    cfg.check_cap()
