"""
Synthetic eICU-shaped Fixtures

Generates a small cohort in the same seven-file layout as an eICU export so the
whole pipeline runs offline. Each stay gets a hidden severity in [0, 1] that
drives its vitals, labs, APACHE predictions and outcome; severity itself is not
written anywhere.
"""

from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np
import pandas as pd
from loguru import logger

from config.logging_config import log_function_call
from ingestion.schema import SchemaConfig

FIRST_STAY_ID = 100001
FLOAT_FORMAT = "%.4f"

# (name, unit, value at severity 0, value at severity 1, noise sd)
_LAB_PANEL = [
    ("BUN", "mg/dL", 14.0, 55.0, 4.0),
    ("bicarbonate", "mmol/L", 25.0, 15.0, 1.5),
    ("creatinine", "mg/dL", 0.9, 3.6, 0.25),
    ("glucose", "mg/dL", 110.0, 210.0, 20.0),
    ("Hgb", "g/dL", 13.0, 8.5, 0.8),
    ("lactate", "mmol/L", 1.1, 6.5, 0.5),
    ("platelets x 1000", "K/mcL", 240.0, 90.0, 25.0),
    ("potassium", "mmol/L", 4.0, 5.4, 0.3),
    ("sodium", "mmol/L", 139.0, 131.0, 2.0),
    ("WBC x 1000", "K/mcL", 8.0, 21.0, 2.0),
]

# (name, value at severity 0, value at severity 1)
_APS_VARIABLES = [
    ("intubated", 0.0, 1.0),
    ("vent", 0.0, 1.0),
    ("dialysis", 0.0, 0.6),
    ("eyes", 4.0, 1.5),
    ("motor", 6.0, 2.5),
    ("verbal", 5.0, 1.5),
    ("urine", 2200.0, 450.0),
    ("wbc", 8.0, 21.0),
    ("temperature", 37.0, 38.6),
    ("respiratoryrate", 16.0, 32.0),
    ("sodium", 139.0, 131.0),
    ("heartrate", 82.0, 128.0),
    ("meanbp", 88.0, 58.0),
    ("ph", 7.40, 7.22),
    ("hematocrit", 39.0, 26.0),
    ("creatinine", 0.9, 3.6),
    ("albumin", 3.8, 2.1),
    ("pao2", 95.0, 62.0),
    ("pco2", 40.0, 52.0),
    ("bun", 14.0, 55.0),
    ("glucose", 110.0, 210.0),
    ("bilirubin", 0.7, 3.5),
    ("fio2", 28.0, 75.0),
]

_DRUGS = [
    "acetaminophen", "amiodarone", "cefepime", "dexmedetomidine", "enoxaparin",
    "fentanyl", "furosemide", "heparin", "insulin regular", "meropenem",
    "metoprolol", "midazolam", "norepinephrine", "pantoprazole", "piperacillin-tazobactam",
    "propofol", "sodium chloride 0.9%", "vancomycin", "vasopressin", "potassium chloride",
]

_DIAGNOSES = [
    "septic shock", "community-acquired pneumonia", "acute respiratory failure",
    "diabetic ketoacidosis", "upper GI bleed", "acute kidney injury",
    "COPD exacerbation", "post-operative monitoring", "cardiogenic shock",
]

_NOTE_TYPES = ["Physician Progress", "Nursing Assessment", "Case Management"]

_NOTE_TEMPLATES = {
    "Physician Progress": (
        "Day {day}. Assessment: {diagnosis}. Hemodynamics {trend}; lactate {lactate:.1f}. "
        "Plan: continue current management, reassess volume status, follow cultures."
    ),
    "Nursing Assessment": (
        "Patient {mental}. HR {hr:.0f}, SBP {sbp:.0f}, SpO2 {spo2:.0f}%. "
        "Urine output {urine}. Family updated at bedside."
    ),
    "Case Management": (
        "Reviewed disposition options for {diagnosis}. Insurance verified; "
        "discharge planning to follow clinical course."
    ),
}


class SyntheticCohortGenerator:
    """
    Seeded generator for eICU-shaped CSV fixtures

    Features:
    - All seven source files with the configured headers
    - Outcome-correlated vitals, labs and APACHE values
    - Occasional missing vital values and APACHE -1 sentinels
    - Two APACHE result versions per stay (IV and IVa)
    - Byte-identical output for a fixed seed
    """

    def __init__(self, seed: int, schema: Optional[SchemaConfig] = None):
        self.seed = seed
        self.schema = schema or SchemaConfig()
        self.rng = np.random.default_rng(seed)

    def _lerp(self, low: float, high: float, severity: float) -> float:
        return low + (high - low) * severity

    def _labels(self, n_stays: int, expired_fraction: float) -> np.ndarray:
        n_expired = int(round(n_stays * expired_fraction))
        labels = np.zeros(n_stays, dtype=bool)
        labels[self.rng.permutation(n_stays)[:n_expired]] = True
        return labels

    def generate(self, n_stays: int, expired_fraction: float) -> Dict[str, pd.DataFrame]:
        """Build every table in memory"""
        if n_stays < 1:
            raise ValueError(f"n_stays must be >= 1, got {n_stays}")
        if not 0 <= expired_fraction <= 1:
            raise ValueError(f"expired_fraction must be in [0, 1], got {expired_fraction}")

        s = self.schema
        labels = self._labels(n_stays, expired_fraction)
        patients, vitals, labs, notes, meds, aps, results = [], [], [], [], [], [], []

        for index, expired in enumerate(labels):
            stay = FIRST_STAY_ID + index
            severity = float(self.rng.uniform(0.55, 0.95) if expired else self.rng.uniform(0.05, 0.45))
            los_days = float(np.clip(self.rng.lognormal(np.log(2.0 + 4.0 * severity), 0.35), 0.3, 40.0))
            discharge_offset = int(round(los_days * 1440))
            age = int(self.rng.integers(19, 95))

            patients.append({
                s.patient.stay_id: stay,
                s.patient.age: "> 89" if age > 89 else str(age),
                s.patient.sex: "Male" if self.rng.random() < 0.5 else "Female",
                s.patient.discharge_status: s.patient.expired_value if expired else "Alive",
                s.patient.discharge_offset: discharge_offset,
            })

            # Vitals: hourly, first row always complete
            n_vitals = int(self.rng.integers(8, 17))
            for k in range(n_vitals):
                row = {
                    s.vitals.stay_id: stay,
                    s.vitals.offset: 60 * k,
                    s.vitals.heart_rate: self._lerp(80, 125, severity) + self.rng.normal(0, 6),
                    s.vitals.sbp: self._lerp(128, 85, severity) + self.rng.normal(0, 8),
                    s.vitals.spo2: float(np.clip(self._lerp(98, 88, severity) + self.rng.normal(0, 1.5), 70, 100)),
                    s.vitals.temperature: self._lerp(36.9, 38.5, severity) + self.rng.normal(0, 0.3),
                }
                if k > 0:
                    for column in (s.vitals.heart_rate, s.vitals.sbp, s.vitals.spo2, s.vitals.temperature):
                        if self.rng.random() < 0.05:
                            row[column] = np.nan
                vitals.append(row)

            # Labs: two or three draws of a random panel subset
            n_draws = int(self.rng.integers(2, 4))
            for draw in range(n_draws):
                offset = int(self.rng.integers(0, 12 * 60)) + draw * 720
                panel = sorted(self.rng.choice(len(_LAB_PANEL), size=int(self.rng.integers(6, 11)), replace=False))
                for i in panel:
                    name, unit, low, high, sd = _LAB_PANEL[i]
                    labs.append({
                        s.lab.stay_id: stay,
                        s.lab.offset: offset,
                        s.lab.name: name,
                        s.lab.value: max(0.1, self._lerp(low, high, severity) + self.rng.normal(0, sd)),
                        s.lab.unit: unit,
                    })

            # Notes
            diagnosis = _DIAGNOSES[int(self.rng.integers(len(_DIAGNOSES)))]
            n_notes = int(self.rng.integers(2, 6))
            for k in range(n_notes):
                note_type = _NOTE_TYPES[0] if k == 0 else _NOTE_TYPES[int(self.rng.integers(len(_NOTE_TYPES)))]
                text = _NOTE_TEMPLATES[note_type].format(
                    day=k + 1,
                    diagnosis=diagnosis,
                    trend="worsening" if severity > 0.5 else "improving",
                    lactate=self._lerp(1.1, 6.5, severity),
                    mental="lethargic, responds to voice" if severity > 0.5 else "alert and oriented",
                    hr=self._lerp(80, 125, severity),
                    sbp=self._lerp(128, 85, severity),
                    spo2=self._lerp(98, 88, severity),
                    urine="poor" if severity > 0.5 else "adequate",
                )
                notes.append({
                    s.note.stay_id: stay,
                    s.note.offset: int(self.rng.integers(30, 60 * 24)),
                    s.note.note_type: note_type,
                    s.note.text: text,
                })

            # Medications
            n_drugs = int(self.rng.integers(3, 9))
            for i in sorted(self.rng.choice(len(_DRUGS), size=n_drugs, replace=False)):
                for _ in range(int(self.rng.integers(1, 5))):
                    meds.append({
                        s.medication.stay_id: stay,
                        s.medication.offset: int(self.rng.integers(0, 60 * 24)),
                        s.medication.drug_name: _DRUGS[i],
                        s.medication.dose: f"{int(self.rng.integers(1, 20)) * 5} mg",
                    })

            # APACHE physiology, -1 for missing
            row = {s.apache_aps.stay_id: stay}
            for name, low, high in _APS_VARIABLES:
                if self.rng.random() < 0.1:
                    row[name] = s.apache_aps.missing_sentinel
                else:
                    row[name] = round(self._lerp(low, high, severity) * (1 + self.rng.normal(0, 0.05)), 2)
            aps.append(row)

            mortality = float(np.clip(severity + self.rng.normal(0, 0.07), 0.01, 0.99))
            predicted_los = float(np.clip(los_days * np.exp(self.rng.normal(0, 0.3)), 0.2, 60.0))
            for version, jitter in (("IV", 0.9), (s.apache_result.preferred_version, 1.0)):
                results.append({
                    s.apache_result.stay_id: stay,
                    s.apache_result.version: version,
                    s.apache_result.predicted_mortality: round(min(mortality * jitter, 0.99), 4),
                    s.apache_result.predicted_los: round(predicted_los * jitter, 4),
                })

        vitals_df = pd.DataFrame(vitals)
        # Scramble row order; the loader is responsible for sorting
        vitals_df = vitals_df.iloc[self.rng.permutation(len(vitals_df))]

        return {
            s.patient.file: pd.DataFrame(patients),
            s.vitals.file: vitals_df,
            s.lab.file: pd.DataFrame(labs),
            s.note.file: pd.DataFrame(notes),
            s.medication.file: pd.DataFrame(meds),
            s.apache_aps.file: pd.DataFrame(aps),
            s.apache_result.file: pd.DataFrame(results),
        }


@log_function_call
def generate_synthetic(
    seed: int,
    n_stays: int,
    expired_fraction: float,
    out_dir: Union[str, Path],
    schema_config: Optional[SchemaConfig] = None
) -> List[Path]:
    """
    Write a synthetic cohort as eICU-shaped CSV files

    Args:
        seed: RNG seed
        n_stays: Number of ICU stays (>= 1)
        expired_fraction: Share of expired stays, rounded to the nearest count
        out_dir: Destination directory (created if needed)
        schema_config: Column-name map (eICU defaults if None)

    Returns:
        Paths of the written files

    Raises:
        ValueError: bad arguments
        OSError: directory not writable
    """
    tables = SyntheticCohortGenerator(seed, schema_config).generate(n_stays, expired_fraction)

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written: List[Path] = []
    for name, frame in tables.items():
        path = out / name
        frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")
        written.append(path)

    logger.info(f"🧪 Wrote {len(written)} synthetic files for {n_stays} stays to {out}")
    return written
