"""
Per-Run Metrics
Mortality accuracy, LOS error and mean transparency over one run's patients
"""

import math
from dataclasses import dataclass
from typing import Iterable, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, Field, model_validator

from ingestion.records import OutcomeLabel, OutcomeStatus
from orchestrator.run_record import RunRecord
from prediction.contract import DEFAULT_THRESHOLD, PredictionOutcome, classify

RMSE_TOLERANCE = 1e-9

# (field, display label, higher is better)
METRIC_FIELDS: Tuple[Tuple[str, str, bool], ...] = (
    ("accuracy_percent", "Mortality Accuracy (%)", True),
    ("los_mae_days", "LOS Mean Error (days)", False),
    ("los_mse_days2", "LOS Mean Squared Error (days²)", False),
    ("los_rmse_days", "Root Mean Squared Error (days)", False),
    ("mean_transparency", "Average Transparency Score", True),
)


class EmptyResultsError(ValueError):
    """No usable patient results"""


def blend_probability(agent_probability: float, apache_probability: Optional[float],
                      weight: float) -> float:
    """Mix the agent's mortality probability with APACHE's; agent only when APACHE is absent"""
    if not 0.0 <= weight <= 1.0:
        raise ValueError(f"blend weight must be in [0, 1], got {weight}")
    if apache_probability is None or weight == 0.0:
        return agent_probability
    return (1.0 - weight) * agent_probability + weight * apache_probability


@dataclass(frozen=True)
class PatientResult:
    stay_id: str
    predicted: PredictionOutcome
    predicted_status: OutcomeStatus
    actual: OutcomeLabel
    transparency_overall: float

    @property
    def correct(self) -> bool:
        return self.predicted_status is self.actual.status

    @property
    def los_error(self) -> float:
        return self.predicted.predicted_los_days - self.actual.actual_los_days

    @classmethod
    def from_record(cls, record: RunRecord, threshold: float = DEFAULT_THRESHOLD,
                    apache_blend_weight: float = 0.0) -> Optional["PatientResult"]:
        """Result for a successful record, None when the run produced no prediction"""
        if not record.succeeded or record.prediction is None:
            return None
        probability = blend_probability(
            record.prediction.mortality_probability,
            record.apache_predicted_mortality,
            apache_blend_weight,
        )
        return cls(
            stay_id=record.stay_id,
            predicted=record.prediction,
            predicted_status=classify(probability, threshold),
            actual=record.actual_outcome.to_label(),
            transparency_overall=record.transparency.overall if record.transparency else 0.0,
        )


class RunMetrics(BaseModel):
    """Metrics of one run; n_excluded counts patients without a usable prediction"""
    accuracy_percent: float = Field(ge=0, le=100)
    los_mae_days: float = Field(ge=0)
    los_mse_days2: float = Field(ge=0)
    los_rmse_days: float = Field(ge=0)
    mean_transparency: float = Field(ge=0, le=100)
    n_patients: int = Field(ge=1)
    n_excluded: int = Field(default=0, ge=0)

    @model_validator(mode="after")
    def _rmse_matches_mse(self) -> "RunMetrics":
        if abs(self.los_rmse_days - math.sqrt(self.los_mse_days2)) > RMSE_TOLERANCE:
            raise ValueError(
                f"los_rmse_days {self.los_rmse_days} != sqrt(los_mse_days2) {math.sqrt(self.los_mse_days2)}"
            )
        return self


def compute_run_metrics(results: Iterable[PatientResult], n_excluded: int = 0) -> RunMetrics:
    """
    Compute one run's metrics

    Args:
        results: Patient results of the run
        n_excluded: Patients left out (failed or unparsed), carried into the metrics

    Returns:
        RunMetrics

    Raises:
        EmptyResultsError: no results
    """
    results = list(results)
    if not results:
        raise EmptyResultsError("cannot compute metrics without patient results")

    correct = np.array([r.correct for r in results], dtype=float)
    errors = np.array([r.los_error for r in results], dtype=float)
    transparency = np.array([r.transparency_overall for r in results], dtype=float)

    mse = float(np.mean(errors ** 2))
    return RunMetrics(
        accuracy_percent=float(100.0 * correct.mean()),
        los_mae_days=float(np.mean(np.abs(errors))),
        los_mse_days2=mse,
        los_rmse_days=math.sqrt(mse),
        mean_transparency=float(transparency.mean()),
        n_patients=len(results),
        n_excluded=n_excluded,
    )


def results_from_records(records: Iterable[RunRecord], threshold: float = DEFAULT_THRESHOLD,
                         apache_blend_weight: float = 0.0) -> Tuple[List[PatientResult], int]:
    """Patient results plus the number of records without a usable prediction"""
    results = []
    excluded = 0
    for record in records:
        result = PatientResult.from_record(record, threshold, apache_blend_weight)
        if result is None:
            excluded += 1
        else:
            results.append(result)
    return results, excluded


def metrics_from_records(records: Iterable[RunRecord], threshold: float = DEFAULT_THRESHOLD,
                         apache_blend_weight: float = 0.0) -> RunMetrics:
    results, excluded = results_from_records(records, threshold, apache_blend_weight)
    return compute_run_metrics(results, n_excluded=excluded)
