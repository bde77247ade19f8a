"""
Run metrics, aggregation, paired t-tests, comparison reports and run loading
"""

import json
import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import stats

from evaluation import (
    DegenerateVarianceError,
    EmptyResultsError,
    PER_RUN_COLUMNS,
    PairingError,
    ReportFormat,
    RunDirectoryError,
    RunMetrics,
    aggregate_runs,
    blend_probability,
    compare_models,
    emit_report,
    find_run_directories,
    format_mean_sd,
    load_run_metrics,
    load_runs,
    metrics_for_run,
    metrics_from_records,
    paired_t_test,
    per_run_rows,
    read_csv_report,
    report_rows,
)
from evaluation.statistics import aggregate_values, two_sided_p_value
from ingestion.records import OutcomeStatus
from orchestrator import BatchSummary, PipelineExecutor, RunStore
from provider import MockBackend
from tests.factories import FIXED_TIME, make_run_record

EXPIRED = OutcomeStatus.EXPIRED
SURVIVED = OutcomeStatus.SURVIVED


def run_metrics(accuracy: float, mse: float, transparency: float = 50.0, excluded: int = 0) -> RunMetrics:
    return RunMetrics(
        accuracy_percent=accuracy,
        los_mae_days=math.sqrt(mse),
        los_mse_days2=mse,
        los_rmse_days=math.sqrt(mse),
        mean_transparency=transparency,
        n_patients=10,
        n_excluded=excluded,
    )


# =============================================================================
# Per-run metrics
# =============================================================================

class TestRunMetrics:

    def test_los_errors_and_accuracy(self):
        records = [
            make_run_record("1", 0.8, 6.0, EXPIRED, 3.0),
            make_run_record("2", 0.8, 10.0, SURVIVED, 5.0),
        ]
        metrics = metrics_from_records(records)
        assert metrics.accuracy_percent == pytest.approx(50.0)
        assert metrics.los_mae_days == pytest.approx(4.0)
        assert metrics.los_mse_days2 == pytest.approx(17.0)
        assert metrics.los_rmse_days == pytest.approx(4.1231, abs=1e-4)
        assert metrics.n_patients == 2
        assert metrics.n_excluded == 0

    def test_failed_records_are_excluded(self):
        records = [
            make_run_record("1", 0.2, 4.0, SURVIVED, 4.0),
            make_run_record("2", None, 1.0, EXPIRED, 9.0),
        ]
        metrics = metrics_from_records(records)
        assert metrics.n_patients == 1
        assert metrics.n_excluded == 1
        assert metrics.accuracy_percent == 100.0
        assert metrics.los_mae_days == 0.0

    def test_all_failed(self):
        with pytest.raises(EmptyResultsError):
            metrics_from_records([make_run_record("1", None, 1.0, EXPIRED, 2.0)])

    def test_threshold(self):
        records = [make_run_record("1", 0.6, 3.0, EXPIRED, 3.0)]
        assert metrics_from_records(records).accuracy_percent == 100.0
        assert metrics_from_records(records, threshold=0.7).accuracy_percent == 0.0

    def test_apache_blend(self):
        records = [make_run_record("1", 0.4, 3.0, EXPIRED, 3.0, apache_mortality=0.8)]
        assert metrics_from_records(records).accuracy_percent == 0.0
        assert metrics_from_records(records, apache_blend_weight=0.5).accuracy_percent == 100.0

    def test_blend_probability(self):
        assert blend_probability(0.4, 0.8, 0.5) == pytest.approx(0.6)
        assert blend_probability(0.4, 0.8, 0.0) == 0.4
        assert blend_probability(0.4, None, 0.7) == 0.4
        with pytest.raises(ValueError):
            blend_probability(0.4, 0.8, 1.5)

    @pytest.mark.parametrize("mse, rmse", [(35.5, 5.95), (48.1, 6.94)])
    def test_rmse_is_root_of_mse(self, mse, rmse):
        metrics = run_metrics(60.0, mse)
        assert metrics.los_rmse_days == pytest.approx(rmse, abs=0.01)
        with pytest.raises(ValueError):
            RunMetrics(**{**metrics.model_dump(), "los_rmse_days": rmse + 0.5})


# =============================================================================
# Aggregation and t-tests
# =============================================================================

class TestStatistics:

    def test_aggregate(self):
        aggregate = aggregate_values([4.0, 6.0])
        assert aggregate.mean == 5.0
        assert aggregate.sd == pytest.approx(1.4142, abs=1e-4)
        assert aggregate.n_runs == 2
        assert aggregate_values([3.0]).sd is None
        with pytest.raises(EmptyResultsError):
            aggregate_values([])

    def test_aggregate_runs(self):
        aggregates = aggregate_runs([run_metrics(50.0, 16.0), run_metrics(70.0, 16.0)])
        assert aggregates["accuracy_percent"].mean == 60.0
        assert aggregates["los_mse_days2"].sd == 0.0

    def test_format_mean_sd(self):
        assert format_mean_sd(58.61, 1.14) == "58.6 (1.1)"
        assert format_mean_sd(5.0, None) == "5.0"
        assert format_mean_sd(5.0, 0.25, digits=2) == "5.00 (0.25)"

    def test_zero_t_gives_p_one(self):
        assert two_sided_p_value(0.0, 7) == pytest.approx(1.0)

    def test_known_values(self):
        result = paired_t_test([1.0, 3.0], [1.0, 1.0])
        assert result.t_statistic == pytest.approx(1.0)
        assert result.df == 1
        assert result.p_value == pytest.approx(0.5)
        assert result.mean_difference == 1.0

    def test_degenerate(self):
        with pytest.raises(DegenerateVarianceError) as exc_info:
            paired_t_test([3.0, 4.0, 5.0], [1.0, 2.0, 3.0])
        assert exc_info.value.mean_difference == 2.0

    @pytest.mark.parametrize("a, b", [
        ([0.1 + 0.2, 0.3, 0.3, 0.3], [0.3, 0.3, 0.3, 0.3]),
        ([1000.3, 1000.3, float(np.nextafter(1000.3, 2000.0))], [0.0, 0.0, 0.0]),
    ])
    def test_rounding_noise_is_degenerate(self, a, b):
        with pytest.raises(DegenerateVarianceError):
            paired_t_test(a, b)

    def test_small_real_spread_is_tested(self):
        result = paired_t_test([1.0, 1.001, 1.002], [0.0, 0.0, 0.0])
        assert result.mean_difference == pytest.approx(1.001)
        assert result.p_value < 0.05

    @pytest.mark.parametrize("a, b", [([1.0, 2.0], [1.0]), ([1.0], [2.0])])
    def test_unpaired(self, a, b):
        with pytest.raises(ValueError):
            paired_t_test(a, b)


paired_samples = st.integers(min_value=2, max_value=50).flatmap(
    lambda n: st.tuples(
        st.lists(st.floats(min_value=-100, max_value=100), min_size=n, max_size=n),
        st.lists(st.floats(min_value=-100, max_value=100), min_size=n, max_size=n),
    )
)


@settings(max_examples=200, deadline=None)
@given(samples=paired_samples)
def test_paired_t_test_matches_scipy(samples):
    a, b = samples
    assume(np.std(np.subtract(a, b), ddof=1) > 1e-3)

    result = paired_t_test(a, b)
    oracle = stats.ttest_rel(a, b)
    assert result.t_statistic == pytest.approx(oracle.statistic, rel=1e-6, abs=1e-9)
    assert result.p_value == pytest.approx(oracle.pvalue, rel=1e-6, abs=1e-9)

    assume(abs(result.p_value - 0.05) > 1e-6)
    assert (not result.ci.contains(0.0)) is (result.p_value < 0.05)

    swapped = paired_t_test(b, a)
    assert swapped.t_statistic == pytest.approx(-result.t_statistic)
    assert swapped.p_value == pytest.approx(result.p_value)


# =============================================================================
# Comparison and reports
# =============================================================================

@pytest.fixture
def report():
    mas = [run_metrics(acc, mse, 80.0, excluded=1) for acc, mse in [(58.0, 35.0), (60.0, 36.0), (57.0, 35.5)]]
    sas = [run_metrics(acc, mse, 40.0) for acc, mse in [(50.0, 48.0), (55.0, 48.5), (49.0, 47.8)]]
    return compare_models(mas, sas, seeds=[3, 5, 9])


class TestComparison:

    def test_rows(self, report):
        assert [row.metric for row in report.rows] == [
            "accuracy_percent", "los_mae_days", "los_mse_days2", "los_rmse_days", "mean_transparency",
        ]
        accuracy = report.row("accuracy_percent")
        assert accuracy.best == "MAS"
        assert accuracy.mean_difference == pytest.approx(7.0)
        assert accuracy.df == 2
        assert not accuracy.degenerate
        assert report.row("los_mse_days2").best == "MAS"
        assert report.excluded == {"MAS": 3, "SAS": 0}

    def test_constant_difference_is_degenerate(self, report):
        row = report.row("mean_transparency")
        assert row.degenerate
        assert row.mean_difference == pytest.approx(40.0)
        assert row.t_statistic is None
        assert row.p_value is None
        assert row.ci is None

    @pytest.mark.parametrize("n_mas, n_sas", [(8, 7), (1, 1)])
    def test_pairing(self, n_mas, n_sas):
        with pytest.raises(PairingError):
            compare_models([run_metrics(50.0, 4.0)] * n_mas, [run_metrics(50.0, 4.0)] * n_sas)

    def test_json_and_csv_agree(self, report):
        document = json.loads(emit_report(report, "json"))
        frame, _ = read_csv_report(emit_report(report, ReportFormat.CSV))

        assert document["n_runs"] == 3
        assert list(frame["metric"]) == [row["metric"] for row in document["rows"]]
        for column in ("mas_mean", "mas_sd", "sas_mean", "mean_difference", "t_statistic", "p_value"):
            expected = [np.nan if row[column] is None else row[column] for row in document["rows"]]
            np.testing.assert_allclose(frame[column].to_numpy(dtype=float), expected, rtol=1e-12)

    def test_per_run_rows(self, report):
        assert [run.seed for run in report.per_run] == [3, 5, 9]
        first = report.per_run[0]
        assert (first.mas_accuracy_percent, first.sas_accuracy_percent) == (58.0, 50.0)
        assert first.mas_los_mae_days == pytest.approx(math.sqrt(35.0))
        assert (first.mas_transparency, first.sas_transparency) == (80.0, 40.0)

    def test_per_run_defaults_to_run_index(self):
        runs = [run_metrics(50.0, 4.0), run_metrics(60.0, 9.0)]
        assert [run.seed for run in compare_models(runs, runs).per_run] == [0, 1]

    def test_seed_count_must_match(self):
        runs = [run_metrics(50.0, 4.0), run_metrics(60.0, 9.0)]
        with pytest.raises(PairingError):
            compare_models(runs, runs, seeds=[1])

    def test_per_run_survives_json_and_csv(self, report):
        expected = per_run_rows(report)
        document = json.loads(emit_report(report, "json"))
        assert document["per_run"] == expected

        metrics, per_run = read_csv_report(emit_report(report, "csv"))
        assert list(metrics["metric"]) == [row["metric"] for row in document["rows"]]
        assert list(per_run.columns) == PER_RUN_COLUMNS
        assert list(per_run["seed"]) == [row["seed"] for row in expected]
        for column in PER_RUN_COLUMNS[1:]:
            np.testing.assert_allclose(per_run[column].to_numpy(dtype=float),
                                       [row[column] for row in expected], rtol=1e-12)

    def test_markdown(self, report):
        text = emit_report(report)
        accuracy_line = next(line for line in text.splitlines() if line.startswith("| Mortality Accuracy"))
        mas = report.row("accuracy_percent").mas
        assert f"**{format_mean_sd(mas.mean, mas.sd, 2)}**" in accuracy_line
        assert "n/a (identical paired samples)" in text
        assert "MAS 3, SAS 0" in text
        assert "| 9 | 57.00 | 49.00 |" in text

    def test_report_rows(self, report):
        rows = report_rows(report)
        assert rows[0]["best"] == "MAS"
        assert rows[-1]["ci_low"] is None

    def test_unknown_format(self, report):
        with pytest.raises(ValueError):
            emit_report(report, "xml")


# =============================================================================
# Persisted runs
# =============================================================================

def persist_run(root, seed: int, label: str, probabilities) -> None:
    store = RunStore(root, f"run-seed{seed}", label)
    for k, probability in enumerate(probabilities):
        store.save_record(make_run_record(str(k + 1), probability, 4.0, EXPIRED, 2.0, seed=seed, graph_label=label))
    store.save_summary(BatchSummary(
        run_id=store.run_id,
        graph_label=label,
        seed=seed,
        attempted=len(probabilities),
        succeeded=sum(p is not None for p in probabilities),
        failed=sum(p is None for p in probabilities),
        max_parallel=1,
        peak_in_flight=1,
        wall_seconds=0.0,
        started_at=FIXED_TIME,
        finished_at=FIXED_TIME,
    ))


class TestLoader:

    def test_seed_order_and_label_filter(self, tmp_path):
        for seed in (2, 0, 1):
            persist_run(tmp_path, seed, "MAS", [0.9, 0.1])
            persist_run(tmp_path, seed, "SAS", [0.9, None])

        directories = find_run_directories(tmp_path, "mas")
        assert [d.parent.name for d in directories] == ["run-seed0", "run-seed1", "run-seed2"]
        assert all(d.name == "MAS" for d in directories)
        assert len(find_run_directories(tmp_path)) == 6

        runs = load_runs(tmp_path, "SAS")
        assert [run.summary.seed for run in runs] == [0, 1, 2]
        assert [r.stay_id for r in runs[0].records] == ["1", "2"]

    def test_recomputed_metrics(self, tmp_path):
        persist_run(tmp_path, 0, "MAS", [0.9, 0.1])
        persist_run(tmp_path, 0, "SAS", [0.9, None])
        assert [m.accuracy_percent for m in load_run_metrics(tmp_path, graph_label="MAS")] == [50.0]
        sas = load_run_metrics(tmp_path, graph_label="SAS")[0]
        assert sas.accuracy_percent == 100.0
        assert sas.n_excluded == 1

    def test_stored_metrics_when_records_are_gone(self, tmp_path):
        persist_run(tmp_path, 0, "MAS", [0.9, 0.1])
        store = RunStore(tmp_path, "run-seed0", "MAS")
        store.save_metrics(run_metrics(42.0, 9.0).model_dump())
        for path in store.directory.glob("[0-9]*.json"):
            path.unlink()

        runs = load_runs(tmp_path, "MAS")
        assert runs[0].records == []
        assert metrics_for_run(runs[0]).accuracy_percent == 42.0

    def test_no_records_no_metrics(self, tmp_path):
        persist_run(tmp_path, 0, "MAS", [])
        with pytest.raises(RunDirectoryError):
            load_run_metrics(tmp_path)

    def test_missing_runs(self, tmp_path):
        with pytest.raises(RunDirectoryError):
            find_run_directories(tmp_path / "absent")
        with pytest.raises(RunDirectoryError):
            find_run_directories(tmp_path)


async def test_mock_mas_beats_chance(mas_graph, cohort, exemplars, fast_policy):
    held_out = {e.stay_id for e in exemplars}
    patients = [p for p in cohort if p.stay_id not in held_out]
    result = await PipelineExecutor(mas_graph, MockBackend(), fast_policy, exemplars=exemplars) \
        .run_batch(patients, 8, seed=0)
    metrics = metrics_from_records(result.records)
    assert metrics.n_excluded == 0
    assert metrics.accuracy_percent > 70.0
    assert metrics.mean_transparency > 0.0
