"""
Run Directory Loading
Finds persisted runs on disk and recomputes their metrics offline
"""

from pathlib import Path
from typing import List, NamedTuple, Optional, Union

from loguru import logger

from evaluation.metrics import RunMetrics, metrics_from_records
from orchestrator.run_record import METRICS_FILE, SUMMARY_FILE, BatchSummary, RunRecord, RunStore
from prediction.contract import DEFAULT_THRESHOLD


class RunDirectoryError(ValueError):
    """No usable run directories"""


class PersistedRun(NamedTuple):
    directory: Path
    summary: BatchSummary
    records: List[RunRecord]


def find_run_directories(root: Union[str, Path], graph_label: Optional[str] = None) -> List[Path]:
    """
    Every <run-id>/<graph-label> directory under root, ordered by seed then run id

    Raises:
        RunDirectoryError: root missing or no run found
    """
    root = Path(root)
    if not root.is_dir():
        raise RunDirectoryError(f"run directory {root} does not exist")

    found = []
    for summary_path in root.rglob(SUMMARY_FILE):
        directory = summary_path.parent
        if graph_label and directory.name.lower() != graph_label.lower():
            continue
        summary = BatchSummary.model_validate_json(summary_path.read_text(encoding="utf-8"))
        found.append((summary.seed, summary.run_id, directory))

    if not found:
        raise RunDirectoryError(f"no runs found under {root}")
    return [directory for _, _, directory in sorted(found)]


def load_runs(root: Union[str, Path], graph_label: Optional[str] = None) -> List[PersistedRun]:
    runs = []
    for directory in find_run_directories(root, graph_label):
        store = RunStore.open(directory)
        runs.append(PersistedRun(directory, store.load_summary(), store.load_records()))
    logger.info(f"📂 Loaded {len(runs)} runs from {root}")
    return runs


def metrics_for_run(run: PersistedRun, threshold: float = DEFAULT_THRESHOLD,
                    apache_blend_weight: float = 0.0) -> RunMetrics:
    """
    Metrics of one persisted run

    Recomputed from the records when they are present; otherwise the stored
    metrics.json is used as written (threshold and blend weight not reapplied).

    Raises:
        RunDirectoryError: neither records nor stored metrics
    """
    if run.records:
        return metrics_from_records(run.records, threshold, apache_blend_weight)
    stored = RunStore.open(run.directory).load_metrics()
    if stored is None:
        raise RunDirectoryError(f"{run.directory} holds neither records nor {METRICS_FILE}")
    logger.warning(f"⚠️ No records in {run.directory}, using its stored metrics")
    return RunMetrics.model_validate(stored)


def load_run_metrics(root: Union[str, Path], threshold: float = DEFAULT_THRESHOLD,
                     apache_blend_weight: float = 0.0,
                     graph_label: Optional[str] = None) -> List[RunMetrics]:
    """Per-run metrics in seed order"""
    return [
        metrics_for_run(run, threshold, apache_blend_weight)
        for run in load_runs(root, graph_label)
    ]
