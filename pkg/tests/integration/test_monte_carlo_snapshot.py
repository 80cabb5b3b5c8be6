"""Seeded Monte-Carlo study on a synthetic radial feeder, checked against a stored summary."""

import pathlib

import pytest

from dcflow.config import McConfig
from dcflow.generate import generate_network
from dcflow.service import McSummary, run_monte_carlo

SNAPSHOT = pathlib.Path(__file__).parent / "data" / "feeder10_mc_summary.json"
CONFIG = McConfig(trials=1000, seed=0, p_scale_range=(0.0, 2.0), iz_scale_range=(0.0, 2.0))


@pytest.fixture(scope="module")
def summary():
    return run_monte_carlo(generate_network("radial", 10, seed=0), CONFIG)


@pytest.mark.slow
def test_feeder_agreement(summary):
    assert summary.trials == 1000
    assert summary.setup_failures == 0
    assert summary.agree_count + summary.fail_count == summary.trials
    assert summary.agree_count / summary.trials >= 0.9
    assert summary.soundness_violations == 0
    for table in summary.condition_vs_success.values():
        total = table.holds_success + table.holds_failure
        total += table.fails_success + table.fails_failure
        assert total == summary.trials


@pytest.mark.slow
def test_feeder_summary_snapshot(summary):
    if not SNAPSHOT.exists():
        SNAPSHOT.parent.mkdir(exist_ok=True)
        SNAPSHOT.write_text(summary.model_dump_json(indent=2) + "\n")
        pytest.skip(f"recorded {SNAPSHOT.name}")
    frozen = McSummary.model_validate_json(SNAPSHOT.read_text())
    assert summary.model_dump(exclude={"worst_disagreement"}) == frozen.model_dump(
        exclude={"worst_disagreement"}
    )
    assert summary.worst_disagreement == pytest.approx(frozen.worst_disagreement, abs=1e-12)
