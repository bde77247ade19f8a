"""
Run Records and Persistence

Layout under the output directory:

    <run-id>/<graph-label>/<stay-id>.json   one RunRecord per patient
    <run-id>/<graph-label>/summary.json     BatchSummary
    <run-id>/<graph-label>/metrics.json     per-run metrics (written by the CLI)

run-id is the UTC start time plus the run's seed. Records hold prompts and
responses only; provider credentials never reach them.
"""

import json
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field

from ingestion.records import OutcomeLabel, OutcomeStatus, stay_sort_key
from prediction.contract import PredictionOutcome
from prediction.validation import ValidationFeedback
from transparency.scorer import TransparencyReport, TransparencyScorer

SCHEMA_VERSION = 1
SUMMARY_FILE = "summary.json"
METRICS_FILE = "metrics.json"
RESERVED_FILES = (SUMMARY_FILE, METRICS_FILE)

# Fields that legitimately differ between two identical runs
TIMING_EXCLUDE: Dict[str, Any] = {
    "run_id": True,
    "started_at": True,
    "finished_at": True,
    "entries": {"__all__": {"started_offset", "finished_offset", "wall_seconds"}},
}


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def new_run_id(seed: int, now: Optional[datetime] = None) -> str:
    """UTC timestamp (microseconds) plus seed, e.g. 20250101T120000123456Z-seed3"""
    now = now or utc_now()
    return f"{now.astimezone(timezone.utc):%Y%m%dT%H%M%S%fZ}-seed{seed}"


class RunStatus(str, Enum):
    SUCCESS = "success"
    FAILED = "failed"


class ActualOutcome(BaseModel):
    status: OutcomeStatus
    actual_los_days: float = Field(ge=0)

    @classmethod
    def from_label(cls, label: OutcomeLabel) -> "ActualOutcome":
        return cls(status=label.status, actual_los_days=label.actual_los_days)

    def to_label(self) -> OutcomeLabel:
        return OutcomeLabel(status=self.status, actual_los_days=self.actual_los_days)


class TaskEntry(BaseModel):
    """One node's exchange with the model"""
    agent: str
    model_id: str
    system_text: str
    user_text: str
    response_text: str
    attempts: int = Field(ge=1)
    started_offset: float
    finished_offset: float
    wall_seconds: float = Field(ge=0)
    reask_user_text: Optional[str] = None

    @property
    def reasked(self) -> bool:
        return self.reask_user_text is not None


class RunRecord(BaseModel):
    """
    Everything persisted for one patient's run

    On success there is one entry per graph node in layer order; a failed
    record keeps the entries that completed before the failure.
    """
    schema_version: int = SCHEMA_VERSION
    run_id: str
    stay_id: str
    graph_label: str
    status: RunStatus
    error: Optional[str] = None
    failed_node: Optional[str] = None
    seed: int
    model_ids: Dict[str, str] = Field(default_factory=dict)
    started_at: datetime
    finished_at: datetime
    entries: List[TaskEntry] = Field(default_factory=list)
    prediction_node: Optional[str] = None
    explanation_nodes: List[str] = Field(default_factory=list)
    prediction: Optional[PredictionOutcome] = None
    validation: Optional[ValidationFeedback] = None
    transparency: Optional[TransparencyReport] = None
    actual_outcome: ActualOutcome
    apache_predicted_mortality: Optional[float] = None

    @property
    def succeeded(self) -> bool:
        return self.status is RunStatus.SUCCESS

    def entry(self, agent: str) -> Optional[TaskEntry]:
        for entry in self.entries:
            if entry.agent == agent:
                return entry
        return None

    def comparable(self) -> Dict[str, Any]:
        """Record content without timing fields"""
        return self.model_dump(mode="json", exclude=TIMING_EXCLUDE)

    def rescored(self, scorer: TransparencyScorer) -> "RunRecord":
        """Copy with transparency recomputed from the stored responses"""
        if not self.succeeded or self.prediction_node is None:
            return self
        prediction = self.entry(self.prediction_node)
        explanation = "\n\n".join(
            entry.response_text for entry in map(self.entry, self.explanation_nodes) if entry
        )
        report = scorer.score(prediction.response_text if prediction else "", explanation)
        return self.model_copy(update={"transparency": report})


class BatchSummary(BaseModel):
    run_id: str
    graph_label: str
    seed: int
    attempted: int = Field(ge=0)
    succeeded: int = Field(ge=0)
    failed: int = Field(ge=0)
    failed_stay_ids: List[str] = Field(default_factory=list)
    max_parallel: int = Field(ge=1)
    peak_in_flight: int = Field(ge=0)
    wall_seconds: float = Field(ge=0)
    started_at: datetime
    finished_at: datetime


class RunStore:
    """
    Reads and writes one run's documents

    Features:
    - One JSON document per patient
    - Batch summary and metrics beside the records
    - Records load back in stay-id order
    """

    def __init__(self, root: Union[str, Path], run_id: str, graph_label: str):
        self.root = Path(root)
        self.run_id = run_id
        self.graph_label = graph_label
        self.directory = self.root / run_id / graph_label

    @classmethod
    def open(cls, directory: Union[str, Path]) -> "RunStore":
        """Store for an existing <run-id>/<graph-label> directory"""
        directory = Path(directory)
        return cls(directory.parent.parent, directory.parent.name, directory.name)

    def _write(self, name: str, content: str) -> Path:
        self.directory.mkdir(parents=True, exist_ok=True)
        path = self.directory / name
        path.write_text(content, encoding="utf-8")
        return path

    def record_path(self, stay_id: str) -> Path:
        return self.directory / f"{stay_id}.json"

    def save_record(self, record: RunRecord) -> Path:
        return self._write(f"{record.stay_id}.json", record.model_dump_json(indent=2))

    def save_summary(self, summary: BatchSummary) -> Path:
        return self._write(SUMMARY_FILE, summary.model_dump_json(indent=2))

    def save_metrics(self, metrics: Dict[str, Any]) -> Path:
        return self._write(METRICS_FILE, json.dumps(metrics, indent=2, sort_keys=True))

    def load_records(self) -> List[RunRecord]:
        paths = [
            p for p in self.directory.glob("*.json")
            if p.name not in RESERVED_FILES
        ]
        records = [RunRecord.model_validate_json(p.read_text(encoding="utf-8")) for p in paths]
        return sorted(records, key=lambda r: stay_sort_key(r.stay_id))

    def load_summary(self) -> BatchSummary:
        return BatchSummary.model_validate_json((self.directory / SUMMARY_FILE).read_text(encoding="utf-8"))

    def load_metrics(self) -> Optional[Dict[str, Any]]:
        path = self.directory / METRICS_FILE
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8"))
