"""
Patient Record Types
Immutable values produced by cohort loading and shared across pipeline workers
"""

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Tuple

TRUNCATION_MARK = "[truncated]"


class OutcomeStatus(str, Enum):
    """ICU discharge status"""
    EXPIRED = "expired"
    SURVIVED = "survived"


class AuthorRole(str, Enum):
    """Who wrote a clinical note"""
    PHYSICIAN = "physician"
    NURSE = "nurse"
    OTHER = "other"


class Sex(str, Enum):
    MALE = "male"
    FEMALE = "female"
    UNKNOWN = "unknown"


def stay_sort_key(stay_id: str) -> Tuple[int, int, str]:
    """Order numeric stay ids numerically, everything else lexicographically after them"""
    if stay_id.isdigit():
        return (0, int(stay_id), "")
    return (1, 0, stay_id)


def _check_finite(name: str, value: Optional[float]) -> None:
    if value is not None and not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value}")


@dataclass(frozen=True)
class VitalSample:
    """One periodic vital-sign observation"""
    offset_minutes: int
    heart_rate: Optional[float] = None
    sbp: Optional[float] = None
    spo2: Optional[float] = None
    temperature: Optional[float] = None

    def __post_init__(self):
        if self.offset_minutes < 0:
            raise ValueError(f"offset_minutes must be >= 0, got {self.offset_minutes}")
        for name in ("heart_rate", "sbp", "spo2", "temperature"):
            _check_finite(name, getattr(self, name))
        if self.spo2 is not None and not 0 <= self.spo2 <= 100:
            raise ValueError(f"spo2 must be in [0, 100], got {self.spo2}")


@dataclass(frozen=True)
class LabResult:
    name: str
    value: float
    unit: str
    offset_minutes: int

    def __post_init__(self):
        if not self.name:
            raise ValueError("lab name must be non-empty")
        _check_finite("lab value", self.value)


@dataclass(frozen=True)
class ClinicalNote:
    author_role: AuthorRole
    offset_minutes: int
    text: str

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("note text must be non-empty")


@dataclass(frozen=True)
class MedicationEntry:
    drug_name: str
    offset_minutes: int
    dose_text: str = ""

    def __post_init__(self):
        if not self.drug_name:
            raise ValueError("drug_name must be non-empty")


@dataclass(frozen=True)
class ApacheBundle:
    """APACHE physiology variables plus the APACHE outcome predictions"""
    aps_variables: Dict[str, float] = field(default_factory=dict)
    apache_predicted_mortality: Optional[float] = None
    apache_predicted_los: Optional[float] = None

    def __post_init__(self):
        for name, value in self.aps_variables.items():
            _check_finite(name, value)
        p = self.apache_predicted_mortality
        if p is not None and not 0 <= p <= 1:
            raise ValueError(f"apache_predicted_mortality must be in [0, 1], got {p}")

    @property
    def present_variable_count(self) -> int:
        return len(self.aps_variables)


@dataclass(frozen=True)
class OutcomeLabel:
    status: OutcomeStatus
    actual_los_days: float

    def __post_init__(self):
        if self.actual_los_days < 0:
            raise ValueError(f"actual_los_days must be >= 0, got {self.actual_los_days}")


@dataclass(frozen=True)
class PatientRecord:
    """
    One ICU stay

    Event lists are stored as tuples sorted ascending by offset (stable, so
    same-offset events keep source order). Vitals, labs and notes must each
    be non-empty.
    """
    stay_id: str
    age: Optional[float]
    sex: Sex
    vitals: Tuple[VitalSample, ...]
    labs: Tuple[LabResult, ...]
    notes: Tuple[ClinicalNote, ...]
    medications: Tuple[MedicationEntry, ...]
    apache: ApacheBundle
    outcome: OutcomeLabel

    def __post_init__(self):
        for name in ("vitals", "labs", "notes"):
            if not getattr(self, name):
                raise ValueError(f"stay {self.stay_id}: {name} must be non-empty")
        for name in ("vitals", "labs", "notes", "medications"):
            events = tuple(sorted(getattr(self, name), key=lambda e: e.offset_minutes))
            object.__setattr__(self, name, events)

    @property
    def completeness_score(self) -> int:
        """Present APACHE variables + distinct lab names + notes"""
        return (
            self.apache.present_variable_count
            + len({lab.name for lab in self.labs})
            + len(self.notes)
        )
