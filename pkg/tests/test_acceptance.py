"""Acceptance criteria: one test and one pass/fail line per criterion.

Run with `pytest -v tests/test_acceptance.py` to see the ten verdict
lines.  Every check is exact: distances are dyadic identities, order
classes are integer equalities, and budgets are strict inequalities
on rationals.  Time limits are wall-clock ceilings for the full
(non-quick) criterion bodies.
"""

import json
import time
from fractions import Fraction

from dyadlab.cli import main
from dyadlab.selftest import (
    criterion_commuting,
    criterion_determinism,
    criterion_faithful,
    criterion_generation,
    criterion_kappa_ledger,
    criterion_pipeline,
    criterion_residual,
    criterion_roots,
    criterion_support,
    criterion_synthesis,
)

SEED = 0


def _passes(row: dict, budget_seconds: float, elapsed: float) -> None:
    assert row["failures"] == 0, row
    assert row["status"] == "pass"
    assert elapsed < budget_seconds, (
        f"criterion {row['criterion']} took {elapsed:.1f}s,"
        f" budget {budget_seconds}s"
    )


def test_criterion_01_support_identity():
    started = time.monotonic()
    row = criterion_support(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 1.0, elapsed)
    assert row["cases"] == 7
    assert row["detail"]["measures"]["2"] == "1/2^1"
    assert row["detail"]["measures"]["8"] == "1/2^7"


def test_criterion_02_root_laws():
    started = time.monotonic()
    row = criterion_roots(quick=False, seed=SEED)
    elapsed = time.monotonic() - started
    _passes(row, 30.0, elapsed)
    assert row["detail"]["trials"] == 200
    assert row["cases"] == 800
    assert row["detail"]["involutions"] > 0


def test_criterion_03_generation():
    started = time.monotonic()
    row = criterion_generation(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 60.0, elapsed)
    assert row["detail"]["closure_sizes"] == {"2": 24, "3": 40320}


def test_criterion_04_word_ledger():
    started = time.monotonic()
    row = criterion_kappa_ledger(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 60.0, elapsed)
    assert row["detail"]["kappa"] == {"2": 6, "3": 28}
    assert row["detail"]["levels"] == [2, 3]
    assert row["detail"]["support"] == "3/2^2"
    assert row["detail"]["epsilon"] == "1"


def test_criterion_05_word_synthesis():
    started = time.monotonic()
    row = criterion_synthesis(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 60.0, elapsed)
    assert row["detail"]["targets"] == 24


def test_criterion_06_commuting_recovery():
    started = time.monotonic()
    row = criterion_commuting(quick=False, seed=SEED)
    elapsed = time.monotonic() - started
    _passes(row, 60.0, elapsed)
    assert row["cases"] == 300
    assert row["detail"]["bases"] == [2, 3, 5]


def test_criterion_07_residual_finiteness():
    started = time.monotonic()
    row = criterion_residual(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 120.0, elapsed)
    assert row["detail"]["words"] == 1456
    assert row["detail"]["separation_depths"] == {
        "1": 1272,
        "2": 136,
        "3": 48,
    }
    assert all(order in (3, 9, 27) for order in row["detail"]["generator_orders"])


def test_criterion_08_faithful_family():
    started = time.monotonic()
    row = criterion_faithful(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 60.0, elapsed)
    assert row["detail"]["shrink_translates"] == 21
    assert row["detail"]["perturbed_translates"] == 46


def test_criterion_09_pipeline_end_to_end(capsys, tmp_path):
    started = time.monotonic()
    report = tmp_path / "pipeline.json"
    code = main(
        [
            "assembly", "run",
            "--m", "1", "--p", "5", "--q", "3",
            "--level", "14", "--factors", "2",
            "--report", str(report),
        ]
    )
    capsys.readouterr()
    assert code == 0
    certificate = json.loads(report.read_text())
    assert certificate["budget"]["passed"] is True
    assert all(ok for _, _, ok in certificate["disjointness"])
    assert all(r["exact"] for r in certificate["recovery"])

    row = criterion_pipeline(quick=False)
    elapsed = time.monotonic() - started
    _passes(row, 600.0, elapsed)
    detail = row["detail"]
    assert detail["budget"] == "777/2^10"
    assert detail["gate"] == "1/1"
    assert detail["support_u"] == "383/2^9"
    assert detail["orbit_level"] == 19
    stages = detail["stages"]
    assert [s["n"] for s in stages] == [0, 1]
    assert stages[0]["t_ratio"] == "2/1"
    assert stages[1]["t_ratio"] == "2/3"
    assert len(stages[1]["interval"]) == 3
    assert stages[0]["orbit"] == 245760
    for n, stage in enumerate(stages):
        assert Fraction(stage["t_ratio"]) == Fraction(2, 2 * n + 1)


def test_criterion_10_determinism(capsys, tmp_path):
    started = time.monotonic()
    row = criterion_determinism(quick=True, seed=SEED)
    _passes(row, 60.0, time.monotonic() - started)

    first = tmp_path / "a.json"
    second = tmp_path / "b.json"
    assert main(["selftest", "--quick", "--seed", "7", "--report", str(first)]) == 0
    out1 = capsys.readouterr().out
    assert main(["selftest", "--quick", "--seed", "7", "--report", str(second)]) == 0
    out2 = capsys.readouterr().out
    assert out1 == out2
    assert first.read_bytes() == second.read_bytes()
    assert json.loads(first.read_text())["all_passed"] is True
