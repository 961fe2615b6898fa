"""Exit codes, output formats, and report files of the command line."""

import json
from pathlib import Path

import pytest

from dyadlab.cli import main

QUICK = ["--level", "10", "--factors", "1", "--tower-depth", "0"]


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# -- exit code policy


def test_no_arguments_is_usage(capsys):
    assert run(capsys, [])[0] == 2


def test_unknown_flag_is_usage(capsys):
    assert run(capsys, ["density", "plan", "--nope"])[0] == 2


def test_unknown_command_is_usage(capsys):
    assert run(capsys, ["frobnicate"])[0] == 2


def test_divisibility_guard_is_usage(capsys):
    code, _, err = run(capsys, ["assembly", "run", "--p", "7", "--q", "3"])
    assert code == 2
    assert "q must not divide p+2" in err


def test_bad_epsilon_is_usage(capsys):
    code, _, err = run(capsys, ["density", "plan", "--epsilon", "1/3"])
    assert code == 2
    assert "dyadic" in err


def test_infeasible_plan_is_usage(capsys):
    code, _, err = run(
        capsys, ["density", "plan", "--epsilon", "1/2^6", "--level", "4"]
    )
    assert code == 2


def test_failed_certificate_is_exit_one(capsys):
    # depth 1 cannot separate the longer commutator words
    code, _, err = run(
        capsys, ["rf", "check-freeness", "--maxword", "4", "--maxdepth", "1"]
    )
    assert code == 1
    assert "invariant failed" in err


# -- density


def test_plan_json_frozen(capsys):
    code, out, _ = run(capsys, ["density", "plan"])
    assert code == 0
    payload = json.loads(out)
    assert payload["n_seq"] == [2, 3]
    assert payload["delta_seq"] == [{"num": 1, "exp": 1}, {"num": 1, "exp": 3}]


def test_plan_csv(capsys):
    code, out, _ = run(capsys, ["density", "plan", "--format", "csv"])
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "k,n,eps,delta"
    assert lines[1] == "0,2,8,1/2^1"
    assert lines[2] == "1,3,8,1/2^3"


def test_assemble_support(capsys):
    code, out, _ = run(capsys, ["density", "assemble"])
    assert code == 0
    assert json.loads(out)["support"] == {"num": 3, "exp": 2}


def test_synthesize_all_level_two_targets(capsys):
    code, out, _ = run(capsys, ["density", "synthesize", "--all-targets", "2"])
    assert code == 0
    assert json.loads(out)["targets"] == 24


def test_synthesize_rejects_unplanned_level(capsys):
    code, _, err = run(capsys, ["density", "synthesize", "--all-targets", "5"])
    assert code == 2
    assert "not in the plan" in err


# -- commuting, rf, faithful


def test_commuting_demo_recovers(capsys):
    code, out, _ = run(
        capsys, ["commuting", "demo", "--trials", "2", "--seed", "3"]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["all_exact"] is True
    assert len(payload["rows"]) == 6


def test_commuting_rejects_shared_divisor(capsys):
    code, _, err = run(capsys, ["commuting", "demo", "--bases", "2,4"])
    assert code == 2
    assert "not coprime" in err


def test_rf_frozen_histogram(capsys):
    code, out, _ = run(capsys, ["rf", "check-freeness", "--maxword", "3"])
    assert code == 0
    payload = json.loads(out)
    assert payload["words"] == 52
    assert payload["separation_depths"] == {"1": 48, "3": 4}
    assert [a["carrier"] for a in payload["actions"]] == [9, 27, 2187]


def test_tower_frozen_stages(capsys):
    code, out, _ = run(capsys, ["faithful", "tower", "--depth", "1"])
    assert code == 0
    payload = json.loads(out)
    assert payload["carriers"] == [3, 3]
    assert payload["stage_word_counts"] == [1, 45]
    assert payload["epsilons"] == [{"num": 1, "exp": 6}, {"num": 1, "exp": 12}]


# -- assembly


def test_assembly_run_report_files(capsys, tmp_path):
    report = tmp_path / "run.json"
    code, out, err = run(
        capsys, ["assembly", "run", *QUICK, "--report", str(report)]
    )
    assert code == 0
    payload = json.loads(out)
    assert payload["budget"] == {
        "measure": {"num": 17, "exp": 6},
        "bound": [1, 1],
        "passed": True,
    }
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [
        "run.json",
        "run_budget.png",
        "run_census.csv",
        "run_census.png",
        "run_claims.csv",
        "run_ledger.csv",
        "run_manifest.json",
    ]
    manifest = json.loads((tmp_path / "run_manifest.json").read_text())
    assert manifest["command"][:2] == ["assembly", "run"]
    assert len(manifest["reports"]) == 6
    assert json.loads(report.read_text())["budget"]["passed"] is True


def test_schreier_word_padding(capsys):
    code, out, _ = run(
        capsys, ["assembly", "schreier", *QUICK, "--word", "0000001"]
    )
    assert code == 0
    payload = json.loads(out)
    assert len(payload["vertices"]) == 1024
    assert payload["labels"] == ["T", "g1"]


def test_schreier_rejects_long_word(capsys):
    code, _, err = run(
        capsys, ["assembly", "schreier", *QUICK, "--word", "0" * 25]
    )
    assert code == 2
    assert "longer than the orbit level" in err


def test_schreier_dot_format(capsys):
    code, out, _ = run(
        capsys,
        [
            "assembly", "schreier", "--level", "4", "--factors", "0",
            "--tower-depth", "0", "--format", "dot",
        ],
    )
    assert code == 0
    assert out.startswith("digraph schreier {")
    assert out.rstrip().endswith("}")


def test_dot_rejected_elsewhere(capsys):
    code, _, _ = run(capsys, ["assembly", "folner", *QUICK, "--format", "dot"])
    assert code == 2


def test_folner_default_interval(capsys):
    code, out, _ = run(capsys, ["assembly", "folner", *QUICK])
    assert code == 0
    (row,) = json.loads(out)["rows"]
    assert row["flagged"] is True
    assert row["ratios"]["T"] == [2, 1]
    assert row["ratios"]["g1"] == [0, 1]


def test_stab_frozen_signature(capsys):
    code, out, _ = run(capsys, ["assembly", "stab", *QUICK, "--radius", "2"])
    assert code == 0
    payload = json.loads(out)
    assert payload["words"] == [[], [2], [-2], [2, 2], [-2, -2]]


# -- selftest and report plumbing


def test_selftest_quick_table(capsys):
    code, out, _ = run(capsys, ["selftest", "--quick"])
    assert code == 0
    assert out.splitlines()[-1] == "all passed"
    assert sum("pass" in line for line in out.splitlines()) >= 10


def test_selftest_json_deterministic(capsys):
    code1, out1, _ = run(capsys, ["selftest", "--quick", "--format", "json"])
    code2, out2, _ = run(capsys, ["selftest", "--quick", "--format", "json"])
    assert code1 == code2 == 0
    assert out1 == out2
    assert json.loads(out1)["all_passed"] is True


def test_report_dir_variable(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("DYADLAB_REPORT_DIR", str(tmp_path))
    code, _, _ = run(capsys, ["density", "plan", "--report", "plan.json"])
    assert code == 0
    assert (tmp_path / "plan.json").exists()
    assert (tmp_path / "plan_plan.png").exists()
    assert (tmp_path / "plan_manifest.json").exists()


def test_selftest_report_files(capsys, tmp_path):
    report = tmp_path / "cert.json"
    code, _, _ = run(
        capsys, ["selftest", "--quick", "--report", str(report)]
    )
    assert code == 0
    names = sorted(p.name for p in tmp_path.iterdir())
    assert names == [
        "cert.json",
        "cert_criteria.csv",
        "cert_criteria.png",
        "cert_manifest.json",
    ]
    cert = json.loads(report.read_text())
    assert cert["all_passed"] is True
    assert [row["criterion"] for row in cert["criteria"]] == list(range(1, 11))
