import csv
import io
import math
from dataclasses import replace

import pytest

from klearn.errors import InvalidParameterError
from klearn.experiments import (
    SUMMARY_FIELDS,
    TRIAL_FIELDS,
    ExperimentConfig,
    TrialRecord,
    render_consistency,
    render_impossibility,
    run_consistency,
    run_impossibility,
    run_trial,
    summarize,
)
from klearn.formula import make_formula

SMALL = ExperimentConfig(n_grid=[20, 40], trials=6, seed=3)


def test_trial_is_reproducible_in_isolation():
    records = run_consistency(SMALL)
    again = run_trial(SMALL, 40, 4)
    assert again == next(r for r in records if r.n == 40 and r.trial == 4)


def test_parallel_matches_serial():
    serial = run_consistency(SMALL)
    parallel = run_consistency(replace(SMALL, jobs=2))
    assert serial == parallel


def test_order_and_fields():
    records = run_consistency(SMALL)
    assert [(r.n, r.trial) for r in records] == [(n, t) for n in (20, 40) for t in range(6)]
    assert all(r.wall_time_ms is None for r in records)
    assert all(r.attempts >= 1 for r in records)


def test_exact_sampler():
    config = ExperimentConfig(n_grid=[15], trials=5, sampler="exact")
    for r in run_consistency(config):
        assert r.attempts == 1 and r.status in ("RootFound", "ClampedLow", "ClampedHigh", "NonIdentifiable")


def test_failure_is_recorded():
    unsat = make_formula(2, 1, 2, [[1], [-1]])
    config = replace(SMALL, max_attempts=10, trials=2)
    records = run_consistency(config, family=lambda n, cfg, seed: unsat)
    assert all(r.status == "Failed:BudgetExhaustedError" for r in records)
    assert all(r.attempts == 10 and r.beta_hat is None for r in records)
    summary = summarize(records)
    assert summary[0]["failed"] == 2 and summary[0]["median_abs_error"] is None


def test_summarize():
    records = [TrialRecord(10, t, 0.5, 0.5 + e, "RootFound", e, 4, 1, None) for t, e in enumerate([0.1, 0.3, 0.2])]
    (row,) = summarize(records)
    assert row["median_abs_error"] == pytest.approx(0.2)
    assert row["p90_abs_error"] == pytest.approx(0.28)
    assert row["root_found"] == 3


def test_render_csv():
    records = run_consistency(replace(SMALL, trials=2))
    trials, summary = render_consistency(records, "csv")
    rows = list(csv.DictReader(io.StringIO(trials)))
    assert list(rows[0]) == TRIAL_FIELDS
    assert rows[0]["wall_time_ms"] == ""
    assert summary.splitlines()[0] == ",".join(SUMMARY_FIELDS)


@pytest.mark.parametrize(
    "changes",
    [dict(kind="other"), dict(trials=0), dict(n_grid=[]), dict(sampler="mcmc"), dict(format="xml"),
     dict(seed=-1), dict(sampler="exact", n_grid=[40])],
)
def test_validate(changes):
    with pytest.raises(InvalidParameterError):
        replace(SMALL, **changes).validate()


class TestImpossibility:
    def test_psi0(self):
        config = ExperimentConfig(kind="impossibility", k=4, n_grid=[8, 12], beta_star=4 * math.log(2), trials=30)
        rows = run_impossibility(config)
        assert [r["n"] for r in rows] == [8, 12]
        for row in rows:
            assert row["p_all_true"] >= 1 / (1 + 2.0 ** -row["n"])
            assert row["concentration_bound"] is not None
            assert row["NonIdentifiable"] + row["RootFound"] + row["ClampedLow"] + row["ClampedHigh"] == 30
        assert rows[0]["p_all_true"] == pytest.approx(0.999746595245508, rel=1e-12)

    def test_psi1_mirror(self):
        config = ExperimentConfig(kind="impossibility", k=4, n_grid=[12], beta_star=-4 * math.log(2), trials=20,
                                  variant="psi1", beta_pair=(-3.0, -4.0))
        (row,) = run_impossibility(config)
        assert row["p_all_false"] >= 1 / (1 + 2.0**-12)
        assert row["total_variation"] == pytest.approx(7.31906673e-07, rel=1e-6)

    def test_wrong_sign_has_no_bound(self):
        config = ExperimentConfig(kind="impossibility", k=4, n_grid=[8], beta_star=-3.0, trials=5)
        (row,) = run_impossibility(config)
        assert row["concentration_bound"] is None

    def test_psi2_row(self):
        config = ExperimentConfig(kind="impossibility", k=4, n_grid=[12], beta_star=3.0, trials=10, variant="psi2")
        (row,) = run_impossibility(config)
        assert row["jstar"] == 16 and row["verified"] is True
        assert row["degree"] <= 128
        text = render_impossibility([row], "csv")
        assert text.splitlines()[0].startswith("n,k,variant")
