"""
Few-shot exemplar construction

One exemplar per outcome status, chosen as the most complete record of its
stratum (present APACHE variables + distinct lab names + notes; ties go to the
lower stay id).
"""

from dataclasses import dataclass
from typing import List, Tuple

from ingestion.features import extract_features
from ingestion.records import OutcomeStatus, PatientRecord, stay_sort_key
from ingestion.sampling import StratumError
from agents.formatting import format_apache_variables, format_labs, format_vitals


@dataclass(frozen=True)
class FewShotExemplar:
    stay_id: str
    status: OutcomeStatus
    demographics: str
    apache_lines: Tuple[str, ...]
    lab_lines: Tuple[str, ...]
    vital_lines: Tuple[str, ...]
    outcome_line: str

    def render(self) -> str:
        def block(title: str, lines: Tuple[str, ...]) -> str:
            body = "\n".join(lines) if lines else "NONE REPORTED"
            return f"[{title}]\n{body}"

        return "\n".join([
            f"=== EXAMPLE CASE ({self.status.value.upper()}) ===",
            block("DEMOGRAPHICS", (self.demographics,)),
            block("APACHE VARIABLES", self.apache_lines),
            block("LABS", self.lab_lines),
            block("VITALS", self.vital_lines),
            block("ACTUAL OUTCOME", (self.outcome_line,)),
            "=== END EXAMPLE CASE ===",
        ])


def _best(records: List[PatientRecord]) -> PatientRecord:
    return min(records, key=lambda r: (-r.completeness_score, stay_sort_key(r.stay_id)))


def exemplar_from_record(record: PatientRecord) -> FewShotExemplar:
    features = extract_features(record)
    age = "unknown" if record.age is None else f"{record.age:g}"
    return FewShotExemplar(
        stay_id=record.stay_id,
        status=record.outcome.status,
        demographics=f"Age: {age} | Sex: {record.sex.value}",
        apache_lines=tuple(format_apache_variables(record.apache)),
        lab_lines=tuple(format_labs(features.distinct_labs)),
        vital_lines=tuple(format_vitals(features.recent_vitals)),
        outcome_line=(
            f"Actual outcome: {record.outcome.status.value}; "
            f"ICU stay {record.outcome.actual_los_days:.1f} days"
        ),
    )


def build_few_shot(pool: List[PatientRecord]) -> List[FewShotExemplar]:
    """
    Pick one expired and one survived exemplar

    Args:
        pool: Candidate records

    Returns:
        [expired exemplar, survived exemplar]

    Raises:
        StratumError: a status has no candidate
    """
    exemplars = []
    for status in (OutcomeStatus.EXPIRED, OutcomeStatus.SURVIVED):
        stratum = [r for r in pool if r.outcome.status is status]
        if not stratum:
            raise StratumError(status.value, 1, 0)
        exemplars.append(exemplar_from_record(_best(stratum)))
    return exemplars
