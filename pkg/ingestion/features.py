"""
Feature Extraction
Selects the slice of a PatientRecord that agents actually see
"""

from collections import Counter
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

from ingestion.records import (
    ApacheBundle,
    AuthorRole,
    ClinicalNote,
    LabResult,
    MedicationEntry,
    PatientRecord,
    Sex,
    VitalSample,
)

MAX_RECENT_VITALS = 10
MAX_SELECTED_NOTES = 3
MAX_TOP_MEDICATIONS = 20

ROLE_PRIORITY: Dict[AuthorRole, int] = {
    AuthorRole.PHYSICIAN: 0,
    AuthorRole.NURSE: 1,
    AuthorRole.OTHER: 2,
}


@dataclass(frozen=True)
class DemographicsSummary:
    stay_id: str
    age: Optional[float]
    sex: Sex

    def describe(self) -> str:
        age = "unknown age" if self.age is None else f"{self.age:g} years"
        return f"Stay ID: {self.stay_id} | Age: {age} | Sex: {self.sex.value}"


@dataclass(frozen=True)
class FeatureBundle:
    """Agent-facing view of one stay"""
    demographics: DemographicsSummary
    recent_vitals: Tuple[VitalSample, ...]
    distinct_labs: Tuple[LabResult, ...]
    selected_notes: Tuple[ClinicalNote, ...]
    top_medications: Tuple[MedicationEntry, ...]
    apache: ApacheBundle


def select_recent_vitals(vitals: Tuple[VitalSample, ...]) -> Tuple[VitalSample, ...]:
    ordered = sorted(vitals, key=lambda v: v.offset_minutes)
    return tuple(ordered[-MAX_RECENT_VITALS:])


def select_distinct_labs(labs: Tuple[LabResult, ...]) -> Tuple[LabResult, ...]:
    """Latest sample per lab name, ordered by name"""
    latest: Dict[str, LabResult] = {}
    for lab in sorted(labs, key=lambda l: l.offset_minutes):
        # Later entries at the same offset replace earlier ones
        latest[lab.name] = lab
    return tuple(latest[name] for name in sorted(latest))


def select_notes(notes: Tuple[ClinicalNote, ...]) -> Tuple[ClinicalNote, ...]:
    """Physician before nurse before other; most recent first; then by text"""
    ranked = sorted(
        notes,
        key=lambda n: (ROLE_PRIORITY[n.author_role], -n.offset_minutes, n.text),
    )
    return tuple(ranked[:MAX_SELECTED_NOTES])


def select_top_medications(meds: Tuple[MedicationEntry, ...]) -> Tuple[MedicationEntry, ...]:
    """
    Most frequently given drugs

    Each drug is represented by its most recent entry. Ranking is descending
    count with ties broken by drug name.
    """
    counts = Counter(m.drug_name for m in meds)
    latest: Dict[str, MedicationEntry] = {}
    for med in sorted(meds, key=lambda m: m.offset_minutes):
        latest[med.drug_name] = med
    ranked = sorted(counts, key=lambda name: (-counts[name], name))
    return tuple(latest[name] for name in ranked[:MAX_TOP_MEDICATIONS])


def extract_features(record: PatientRecord) -> FeatureBundle:
    """
    Build the FeatureBundle for one record

    Args:
        record: A loaded PatientRecord

    Returns:
        FeatureBundle (pure function of the record)
    """
    return FeatureBundle(
        demographics=DemographicsSummary(
            stay_id=record.stay_id,
            age=record.age,
            sex=record.sex,
        ),
        recent_vitals=select_recent_vitals(record.vitals),
        distinct_labs=select_distinct_labs(record.labs),
        selected_notes=select_notes(record.notes),
        top_medications=select_top_medications(record.medications),
        apache=record.apache,
    )
