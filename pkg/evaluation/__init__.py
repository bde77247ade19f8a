"""Run metrics, aggregation, paired comparison and reports"""

from evaluation.metrics import (
    METRIC_FIELDS,
    EmptyResultsError,
    PatientResult,
    RunMetrics,
    blend_probability,
    compute_run_metrics,
    metrics_from_records,
    results_from_records,
)
from evaluation.statistics import (
    ConfidenceInterval,
    DegenerateVarianceError,
    MetricAggregate,
    PairedTTestResult,
    aggregate_runs,
    format_mean_sd,
    paired_t_test,
)
from evaluation.comparison import ComparisonReport, MetricComparison, PairingError, PerRunRow, compare_models
from evaluation.report import (
    PER_RUN_COLUMNS,
    REPORT_COLUMNS,
    ReportFormat,
    emit_report,
    per_run_rows,
    read_csv_report,
    report_rows,
)
from evaluation.loader import (
    PersistedRun,
    RunDirectoryError,
    find_run_directories,
    load_run_metrics,
    load_runs,
    metrics_for_run,
)

__all__ = [
    # Metrics
    "METRIC_FIELDS",
    "EmptyResultsError",
    "PatientResult",
    "RunMetrics",
    "blend_probability",
    "compute_run_metrics",
    "metrics_from_records",
    "results_from_records",

    # Statistics
    "ConfidenceInterval",
    "DegenerateVarianceError",
    "MetricAggregate",
    "PairedTTestResult",
    "aggregate_runs",
    "format_mean_sd",
    "paired_t_test",

    # Comparison and reports
    "ComparisonReport",
    "MetricComparison",
    "PairingError",
    "PerRunRow",
    "compare_models",
    "PER_RUN_COLUMNS",
    "REPORT_COLUMNS",
    "ReportFormat",
    "emit_report",
    "per_run_rows",
    "read_csv_report",
    "report_rows",

    # Loading
    "PersistedRun",
    "RunDirectoryError",
    "find_run_directories",
    "load_run_metrics",
    "load_runs",
    "metrics_for_run",
]
