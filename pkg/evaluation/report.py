"""
Comparison Report Documents
JSON, CSV and Markdown renderings of a ComparisonReport
"""

import json
from enum import Enum
import io
from typing import Any, Dict, List, Optional, Tuple, Union

import pandas as pd

from evaluation.comparison import ComparisonReport, MetricComparison
from evaluation.statistics import format_mean_sd

REPORT_COLUMNS = [
    "metric",
    "label",
    "mas_mean",
    "mas_sd",
    "sas_mean",
    "sas_sd",
    "mean_difference",
    "t_statistic",
    "df",
    "p_value",
    "ci_low",
    "ci_high",
    "degenerate",
    "best",
]
PER_RUN_COLUMNS = [
    "seed",
    "mas_accuracy_percent",
    "sas_accuracy_percent",
    "mas_los_mae_days",
    "sas_los_mae_days",
    "mas_transparency",
    "sas_transparency",
]


class ReportFormat(str, Enum):
    JSON = "json"
    CSV = "csv"
    MARKDOWN = "markdown"


def report_rows(report: ComparisonReport) -> List[Dict[str, Any]]:
    """One flat dict per metric, keys in REPORT_COLUMNS order"""
    rows = []
    for row in report.rows:
        rows.append({
            "metric": row.metric,
            "label": row.label,
            "mas_mean": row.mas.mean,
            "mas_sd": row.mas.sd,
            "sas_mean": row.sas.mean,
            "sas_sd": row.sas.sd,
            "mean_difference": row.mean_difference,
            "t_statistic": row.t_statistic,
            "df": row.df,
            "p_value": row.p_value,
            "ci_low": row.ci.low if row.ci else None,
            "ci_high": row.ci.high if row.ci else None,
            "degenerate": row.degenerate,
            "best": row.best or "",
        })
    return rows


def per_run_rows(report: ComparisonReport) -> List[Dict[str, Any]]:
    """One flat dict per run pair, keys in PER_RUN_COLUMNS order"""
    return [row.model_dump() for row in report.per_run]


def _fmt(value: Optional[float], digits: int) -> str:
    return "n/a" if value is None else f"{value:.{digits}f}"


def _cell(row: MetricComparison, model: str) -> str:
    aggregate = row.mas if model == "MAS" else row.sas
    text = format_mean_sd(aggregate.mean, aggregate.sd, digits=2)
    return f"**{text}**" if row.best == model else text


def _markdown(report: ComparisonReport) -> str:
    lines = [
        "| Metric | MAS | SAS | Difference (MAS - SAS) | t | df | p | 95% CI |",
        "|---|---|---|---|---|---|---|---|",
    ]
    for row in report.rows:
        if row.degenerate:
            t_text, p_text, ci_text = "n/a", "n/a (identical paired samples)", "n/a"
        else:
            t_text = _fmt(row.t_statistic, 3)
            p_text = _fmt(row.p_value, 4)
            ci_text = f"[{row.ci.low:.2f}, {row.ci.high:.2f}]"
        lines.append(
            f"| {row.label} | {_cell(row, 'MAS')} | {_cell(row, 'SAS')} | "
            f"{row.mean_difference:.2f} | {t_text} | {row.df} | {p_text} | {ci_text} |"
        )
    excluded = ", ".join(f"{label} {count}" for label, count in sorted(report.excluded.items()))
    lines += [
        "",
        f"Mean (SD) over {report.n_runs} paired runs; bold marks the better model.",
        f"Patients excluded for missing or unparsable predictions: {excluded or 'none'}.",
    ]
    if report.per_run:
        lines += [
            "",
            "| Seed | MAS accuracy (%) | SAS accuracy (%) | MAS LOS MAE (days) | SAS LOS MAE (days) "
            "| MAS transparency | SAS transparency |",
            "|---|---|---|---|---|---|---|",
        ]
        for run in report.per_run:
            lines.append(
                f"| {run.seed} | {run.mas_accuracy_percent:.2f} | {run.sas_accuracy_percent:.2f} | "
                f"{run.mas_los_mae_days:.2f} | {run.sas_los_mae_days:.2f} | "
                f"{run.mas_transparency:.2f} | {run.sas_transparency:.2f} |"
            )
    return "\n".join(lines) + "\n"


def emit_report(report: ComparisonReport, fmt: Union[ReportFormat, str] = ReportFormat.MARKDOWN) -> str:
    """
    Render a comparison report

    Args:
        report: Comparison report
        fmt: json, csv or markdown

    Returns:
        Document text
    """
    fmt = ReportFormat(fmt)
    rows = report_rows(report)
    if fmt is ReportFormat.JSON:
        document = {
            "n_runs": report.n_runs,
            "excluded": report.excluded,
            "rows": rows,
            "per_run": per_run_rows(report),
        }
        return json.dumps(document, indent=2) + "\n"
    if fmt is ReportFormat.CSV:
        # Metric table, blank line, per-run table
        metrics = pd.DataFrame(rows, columns=REPORT_COLUMNS).to_csv(index=False, lineterminator="\n")
        per_run = pd.DataFrame(per_run_rows(report), columns=PER_RUN_COLUMNS) \
            .to_csv(index=False, lineterminator="\n")
        return f"{metrics}\n{per_run}"
    return _markdown(report)


def read_csv_report(text: str) -> Tuple[pd.DataFrame, pd.DataFrame]:
    """Metric and per-run tables of a CSV report"""
    metrics, _, per_run = text.partition("\n\n")
    return pd.read_csv(io.StringIO(metrics)), pd.read_csv(io.StringIO(per_run))
