"""
Plain-text formatting of clinical data for prompts
"""

from typing import Iterable, List, Optional

from ingestion.features import FeatureBundle
from ingestion.records import (
    ApacheBundle,
    ClinicalNote,
    LabResult,
    MedicationEntry,
    OutcomeLabel,
    VitalSample,
)

NONE_REPORTED = "NONE REPORTED"


def _num(value: Optional[float], digits: int = 1) -> str:
    return "--" if value is None else f"{value:.{digits}f}"


def format_vitals(vitals: Iterable[VitalSample]) -> List[str]:
    return [
        f"t+{v.offset_minutes}min HR {_num(v.heart_rate, 0)} SBP {_num(v.sbp, 0)} "
        f"SpO2 {_num(v.spo2, 0)} Temp {_num(v.temperature)}"
        for v in vitals
    ]


def format_respiratory(vitals: Iterable[VitalSample]) -> List[str]:
    return [
        f"t+{v.offset_minutes}min SpO2 {_num(v.spo2, 0)} Temp {_num(v.temperature)}"
        for v in vitals
        if v.spo2 is not None or v.temperature is not None
    ]


def format_cardiovascular(vitals: Iterable[VitalSample]) -> List[str]:
    return [
        f"t+{v.offset_minutes}min HR {_num(v.heart_rate, 0)} SBP {_num(v.sbp, 0)}"
        for v in vitals
        if v.heart_rate is not None or v.sbp is not None
    ]


def format_labs(labs: Iterable[LabResult]) -> List[str]:
    return [
        f"{lab.name}: {lab.value:g} {lab.unit}".rstrip() + f" (t+{lab.offset_minutes}min)"
        for lab in labs
    ]


def format_apache_variables(apache: ApacheBundle) -> List[str]:
    return [f"{name}: {value:g}" for name, value in sorted(apache.aps_variables.items())]


def format_apache(apache: ApacheBundle) -> List[str]:
    """APS variables followed by the APACHE predictions when present"""
    lines = format_apache_variables(apache)
    if apache.apache_predicted_mortality is not None:
        lines.append(f"APACHE predicted mortality: {apache.apache_predicted_mortality:.4f}")
    if apache.apache_predicted_los is not None:
        lines.append(f"APACHE predicted LOS (days): {apache.apache_predicted_los:.2f}")
    return lines


def format_notes(notes: Iterable[ClinicalNote]) -> List[str]:
    return [
        f"[{note.author_role.value.upper()} t+{note.offset_minutes}min]\n{note.text}"
        for note in notes
    ]


def format_medications(meds: Iterable[MedicationEntry]) -> List[str]:
    return [
        f"{med.drug_name}" + (f" ({med.dose_text})" if med.dose_text else "")
        + f" t+{med.offset_minutes}min"
        for med in meds
    ]


def format_timeline(features: FeatureBundle) -> List[str]:
    """Event counts and offset ranges per data stream"""
    lines = []
    streams = [
        ("Vitals", [v.offset_minutes for v in features.recent_vitals]),
        ("Labs", [lab.offset_minutes for lab in features.distinct_labs]),
        ("Notes", [n.offset_minutes for n in features.selected_notes]),
        ("Medications", [m.offset_minutes for m in features.top_medications]),
    ]
    for label, offsets in streams:
        if offsets:
            lines.append(f"{label}: {len(offsets)} entries from t+{min(offsets)}min to t+{max(offsets)}min")
    return lines


def format_outcome(outcome: OutcomeLabel) -> List[str]:
    return [
        f"Outcome: {outcome.status.value}",
        f"ICU length of stay (days): {outcome.actual_los_days:.2f}",
    ]


def join_lines(lines: List[str], separator: str = "\n") -> str:
    """Join lines; empty input renders as NONE REPORTED"""
    text = separator.join(line for line in lines if line.strip())
    return text if text.strip() else NONE_REPORTED
