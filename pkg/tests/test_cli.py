from __future__ import annotations

import json
import subprocess
import sys
from fractions import Fraction

import pytest

from hyperzr import suites
from hyperzr.cli import main
from hyperzr.hidden_matching import HHInstance, sample_hh_instance
from hyperzr.ldc import code_to_json, hadamard_code, hadamard_decoder
from hyperzr.streaming import sample_ug
from hyperzr.suites import CheckRow, SuiteConfig, run_suite


def read_summary(out, suite):
    return json.loads((out / f"{suite}_summary.json").read_text())


def test_inequalities_suite_passes(tmp_path):
    out = tmp_path / "o"
    assert main(["verify", "--suite", "inequalities", "--trials", "5", "--out", str(out)]) == 0
    summary = read_summary(out, "inequalities")
    assert summary["suite"] == "inequalities"
    assert summary["failures"] == []
    assert set(summary) >= {"suite", "params", "checks", "failures"}
    assert min(c["slack"] for c in summary["checks"]) >= -1e-9
    assert {"anchor", "lhs", "rhs", "slack", "pass"} <= set(summary["checks"][0])
    csv_lines = (out / "inequalities_detail.csv").read_text().splitlines()
    assert csv_lines[0] == "suite,anchor,kind,params,lhs,rhs,slack,pass"
    assert len(csv_lines) == len(summary["checks"]) + 1


def test_hh_suite_reports_collision_value(tmp_path):
    out = tmp_path / "o"
    assert main(["hh-sim", "--trials", "200", "--out", str(out)]) == 0
    rows = [c for c in read_summary(out, "hh")["checks"] if c["anchor"] == "collision-acceptance" and c["params"]["r"] == 3]
    assert len(rows) == 1
    assert rows[0]["rhs"] == pytest.approx(5 / 9, abs=1e-15)
    assert rows[0]["lhs"] == pytest.approx(5 / 9, abs=1e-12)


def test_unknown_suite_writes_nothing(tmp_path, capsys):
    out = tmp_path / "o"
    with pytest.raises(SystemExit) as info:
        main(["verify", "--suite", "bogus", "--out", str(out)])
    assert info.value.code == 2
    assert not out.exists()


@pytest.mark.parametrize(
    "config, flags",
    [({"seed": 1, "colour": "red"}, []), ({}, ["--threads", "0"]), ({}, ["--trials", "0"])],
)
def test_invalid_config_exits_two(tmp_path, config, flags):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps(config))
    out = tmp_path / "o"
    assert main(["verify", "--suite", "ldc", "--config", str(cfg), "--out", str(out), *flags]) == 2
    assert not out.exists()


def test_malformed_config_exits_two(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text("{not json")
    assert main(["verify", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2


def test_config_file_is_used(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"seed": 9, "trials": 50, "params": {"ldc": {"noise": 0.1}}}))
    out = tmp_path / "o"
    assert main(["ldc-lab", "--config", str(cfg), "--out", str(out)]) == 0
    params = read_summary(out, "ldc")["params"]
    assert params["seed"] == 9
    assert params["ldc"]["noise"] == 0.1 and params["ldc"]["trials"] == 50


@pytest.mark.parametrize("suite", ["inequalities", "hh", "ug", "ldc"])
def test_csv_is_deterministic(tmp_path, suite):
    texts = []
    for threads in (1, 3, 1):
        out = tmp_path / f"t{threads}_{len(texts)}"
        main(["verify", "--suite", suite, "--seed", "4", "--trials", "60", "--threads", str(threads), "--out", str(out)])
        texts.append((out / f"{suite}_detail.csv").read_bytes())
    assert texts[0] == texts[1] == texts[2]


def test_seed_changes_output(tmp_path):
    runs = []
    for seed in (1, 2):
        out = tmp_path / str(seed)
        main(["verify", "--suite", "ldc", "--seed", str(seed), "--trials", "60", "--out", str(out)])
        runs.append((out / "ldc_detail.csv").read_text())
    assert runs[0] != runs[1]


def fake_table(monkeypatch, rows):
    def builder(params, trials, tol):
        return [lambda rng: [CheckRow(**row) for row in rows]]

    monkeypatch.setitem(suites.SUITE_TABLE, "ldc", (builder, {}, 1))


def test_hard_failure_exits_one(tmp_path, monkeypatch):
    fake_table(monkeypatch, [dict(anchor="broken", params={}, lhs=0, rhs=1, slack=-1, passed=False)])
    out = tmp_path / "o"
    assert main(["verify", "--suite", "ldc", "--out", str(out)]) == 1
    assert read_summary(out, "ldc")["failures"] == ["broken"]


def test_statistical_miss_is_only_a_warning(tmp_path, monkeypatch):
    fake_table(monkeypatch, [dict(anchor="noisy", params={}, lhs=0, rhs=1, slack=-1, passed=False, kind="statistical")])
    out = tmp_path / "o"
    assert main(["verify", "--suite", "ldc", "--out", str(out)]) == 0
    summary = read_summary(out, "ldc")
    assert summary["failures"] == [] and summary["warnings"] == ["noisy"]


def test_gross_violation_aborts(tmp_path, monkeypatch):
    from hyperzr.inequalities import InequalityReport

    def builder(params, trials, tol):
        bad = InequalityReport("x", 0.0, 1.0, -1.0, {})
        return [lambda rng: [suites._inequality_row("x", [bad], {}, tol)]]

    monkeypatch.setitem(suites.SUITE_TABLE, "ldc", (builder, {}, 1))
    out = tmp_path / "o"
    assert main(["verify", "--suite", "ldc", "--out", str(out)]) == 1
    assert not out.exists()


def test_suite_config_validation():
    with pytest.raises(ValueError):
        SuiteConfig(suite="nope")
    result = run_suite(SuiteConfig(suite="ldc", trials=30))
    assert not result.hard_failures


def test_hh_instance_mode(tmp_path, capsys):
    inst = sample_hh_instance(4, 2, 1, 3, "YES", seed=0)
    path = tmp_path / "inst.json"
    path.write_text(inst.to_json())
    assert main(["hh-sim", "--instance", str(path), "--repetitions", "3"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report == {"label": "YES", "classical": "YES", "quantum": "YES", "quantum_accept_probability": pytest.approx(1.0)}
    assert HHInstance.from_json(path.read_text()).M.alpha == Fraction(1)


def test_ug_stream_mode(tmp_path, capsys):
    inst = sample_ug("N", 6, 3, 3, 4, 1, seed=0)
    path = tmp_path / "stream.jsonl"
    path.write_text(inst.to_jsonl())
    assert main(["ug-stream", "--stream", str(path), "-r", "3", "-n", "6", "-t", "3", "--alg", "counter"]) == 0
    assert json.loads(capsys.readouterr().out) == {"algorithm": "counter", "constraints": 8, "output": 8 / 3}
    assert main(["ug-stream", "--stream", str(path), "--alg", "counter"]) == 2
    assert main(["ug-stream", "--stream", str(path), "-r", "3", "-n", "6", "-t", "3", "--alg", "magic"]) == 2


def test_ldc_code_mode(tmp_path, capsys):
    code = hadamard_code(2, 2)
    path = tmp_path / "code.json"
    path.write_text(code_to_json(code, hadamard_decoder(code)))
    assert main(["ldc-lab", "--code", str(path), "--delta", "0.05"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["smoothness"]["c"] == pytest.approx(2.0)
    assert report["as_ldc"]["epsilon"] == pytest.approx(0.5 - 0.1)
    assert [len(c["matching"]) for c in report["certificates"]] == [2, 2]


def test_missing_file_exits_two(tmp_path):
    assert main(["ldc-lab", "--code", str(tmp_path / "absent.json")]) == 2


def test_module_entry_point(tmp_path):
    proc = subprocess.run(
        [sys.executable, "-m", "hyperzr", "verify", "--suite", "ldc", "--trials", "20", "--out", str(tmp_path)],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
    assert "PASS ldc/hadamard-clean" in proc.stdout
