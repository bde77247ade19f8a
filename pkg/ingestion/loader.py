"""
Cohort Loader
Reads eICU-shaped CSV files, joins them per ICU stay and enforces completeness

Rows that cannot be parsed are skipped and tallied per file. Vital-sign gaps are
filled by carrying the last observation forward within each channel of a stay;
leading gaps stay absent.
"""

import json
import math
from collections import Counter, defaultdict
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from loguru import logger

from config.logging_config import log_function_call, pipeline_logger
from ingestion.records import (
    TRUNCATION_MARK,
    ApacheBundle,
    AuthorRole,
    ClinicalNote,
    LabResult,
    MedicationEntry,
    OutcomeLabel,
    OutcomeStatus,
    PatientRecord,
    Sex,
    VitalSample,
    stay_sort_key,
)
from ingestion.schema import NoteColumns, SchemaConfig

NOTE_CHAR_LIMIT = 4000
MINUTES_PER_DAY = 1440.0
VITAL_CHANNELS = ("heart_rate", "sbp", "spo2", "temperature")


class LoadError(Exception):
    """Cohort could not be loaded"""


class MissingFileError(LoadError):
    def __init__(self, path: Path):
        super().__init__(f"Required file not found: {path.name} (looked in {path.parent})")
        self.path = path


class EmptyCohortError(LoadError):
    """No stay survived the completeness filter"""


@dataclass
class LoadReport:
    """What happened while loading a cohort"""
    stays_seen: int = 0
    loaded: int = 0
    dropped: Dict[str, int] = field(default_factory=dict)
    dropped_stay_ids: List[str] = field(default_factory=list)
    malformed_rows: Dict[str, int] = field(default_factory=dict)
    imputed_vital_values: int = 0
    truncated_notes: int = 0

    @property
    def dropped_total(self) -> int:
        return len(self.dropped_stay_ids)

    @property
    def malformed_total(self) -> int:
        return sum(self.malformed_rows.values())

    def to_dict(self) -> dict:
        data = asdict(self)
        data["dropped_total"] = self.dropped_total
        data["imputation"] = "last observation carried forward per vital channel"
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def truncate_note(text: str, limit: int = NOTE_CHAR_LIMIT) -> Tuple[str, bool]:
    """Cut a note to `limit` characters and mark it"""
    if len(text) <= limit:
        return text, False
    return f"{text[:limit].rstrip()} {TRUNCATION_MARK}", True


def classify_author(note_type: str, columns: NoteColumns) -> AuthorRole:
    """Derive the author role from the note type text"""
    lowered = f"{note_type.lower()} "
    if any(marker in lowered for marker in columns.physician_markers):
        return AuthorRole.PHYSICIAN
    if any(marker in lowered for marker in columns.nurse_markers):
        return AuthorRole.NURSE
    return AuthorRole.OTHER


def _parse_age(raw: Optional[str]) -> Optional[float]:
    if raw is None:
        return None
    text = str(raw).strip()
    if text.startswith(">"):
        # eICU reports ages above 89 as "> 89"
        return 90.0
    try:
        value = float(text)
    except ValueError:
        return None
    return value if math.isfinite(value) else None


def _parse_sex(raw: Optional[str]) -> Sex:
    text = str(raw or "").strip().lower()
    if text.startswith("m"):
        return Sex.MALE
    if text.startswith("f"):
        return Sex.FEMALE
    return Sex.UNKNOWN


class CohortLoader:
    """
    Loads one directory of source files into PatientRecords

    Features:
    - Configurable file and column names
    - Malformed-row tally per file
    - Completeness filter (>= 1 vital, lab and note per stay)
    - LOCF gap filling for vitals
    - Note truncation for prompt budgeting
    """

    def __init__(self, data_dir: Union[str, Path], schema: Optional[SchemaConfig] = None):
        self.data_dir = Path(data_dir)
        self.schema = schema or SchemaConfig()
        self.report = LoadReport()

    def _tally(self, file_name: str, count: int) -> None:
        if count:
            self.report.malformed_rows[file_name] = (
                self.report.malformed_rows.get(file_name, 0) + int(count)
            )

    def _read(self, file_name: str, required: List[str]) -> pd.DataFrame:
        """Read one CSV as strings, skipping rows with the wrong field count"""
        path = self.data_dir / file_name
        if not path.is_file():
            raise MissingFileError(path)

        bad_lines: List[List[str]] = []

        def _skip(line: List[str]) -> None:
            bad_lines.append(line)
            return None

        df = pd.read_csv(
            path,
            dtype=str,
            keep_default_na=True,
            on_bad_lines=_skip,
            engine="python",
        )
        self._tally(file_name, len(bad_lines))

        missing = [col for col in required if col not in df.columns]
        if missing:
            raise LoadError(f"{file_name} is missing columns: {', '.join(missing)}")

        return df

    def _clean_keys(self, df: pd.DataFrame, file_name: str, stay_col: str,
                    offset_col: Optional[str] = None) -> pd.DataFrame:
        """Normalize stay id / offset columns and drop rows where they are unusable"""
        df = df.copy()
        df["stay_key"] = df[stay_col].fillna("").str.strip()
        valid = df["stay_key"] != ""
        if offset_col is not None:
            df["offset_key"] = pd.to_numeric(df[offset_col], errors="coerce")
            valid &= df["offset_key"].notna()
        self._tally(file_name, (~valid).sum())
        df = df[valid]
        if offset_col is not None:
            df = df.assign(offset_key=df["offset_key"].round().astype(int))
        return df

    def _load_patients(self) -> Dict[str, dict]:
        cols = self.schema.patient
        df = self._read(cols.file, [cols.stay_id, cols.age, cols.sex,
                                    cols.discharge_status, cols.discharge_offset])
        df = self._clean_keys(df, cols.file, cols.stay_id)

        statuses = df[cols.discharge_status].fillna("").str.strip()
        los_offsets = pd.to_numeric(df[cols.discharge_offset], errors="coerce")

        patients: Dict[str, dict] = {}
        malformed = 0
        for stay, age_raw, sex_raw, status_raw, los_minutes in zip(
            df["stay_key"], df[cols.age], df[cols.sex], statuses, los_offsets
        ):
            if stay in patients or not status_raw or pd.isna(los_minutes) or los_minutes < 0:
                malformed += 1
                continue
            status = (OutcomeStatus.EXPIRED
                      if status_raw.lower() == cols.expired_value.lower()
                      else OutcomeStatus.SURVIVED)
            patients[stay] = {
                "age": _parse_age(age_raw),
                "sex": _parse_sex(sex_raw if isinstance(sex_raw, str) else ""),
                "outcome": OutcomeLabel(status=status,
                                        actual_los_days=float(los_minutes) / MINUTES_PER_DAY),
            }
        self._tally(cols.file, malformed)
        return patients

    def _load_vitals(self) -> Dict[str, List[VitalSample]]:
        cols = self.schema.vitals
        source = {
            "heart_rate": cols.heart_rate,
            "sbp": cols.sbp,
            "spo2": cols.spo2,
            "temperature": cols.temperature,
        }
        df = self._read(cols.file, [cols.stay_id, cols.offset, *source.values()])
        df = self._clean_keys(df, cols.file, cols.stay_id, cols.offset)

        negative = df["offset_key"] < 0
        self._tally(cols.file, negative.sum())
        df = df[~negative]

        values = pd.DataFrame({
            channel: pd.to_numeric(df[column], errors="coerce")
            for channel, column in source.items()
        }, index=df.index).replace([np.inf, -np.inf], np.nan)
        values.loc[(values["spo2"] < 0) | (values["spo2"] > 100), "spo2"] = np.nan

        channels = list(VITAL_CHANNELS)
        frame = pd.concat([df[["stay_key", "offset_key"]], values], axis=1)
        frame = frame.sort_values(["stay_key", "offset_key"], kind="mergesort")
        before = frame[channels].isna()
        frame[channels] = frame.groupby("stay_key", sort=False)[channels].ffill()
        after = frame[channels].notna()
        self.report.imputed_vital_values += int((before & after).to_numpy().sum())

        # Rows still empty after carrying forward are leading gaps
        frame = frame[after.any(axis=1)]

        vitals: Dict[str, List[VitalSample]] = defaultdict(list)
        readings = frame[channels].astype(object).where(frame[channels].notna(), None)
        for stay, offset, (hr, sbp, spo2, temp) in zip(
            frame["stay_key"], frame["offset_key"], readings.itertuples(index=False, name=None)
        ):
            vitals[stay].append(VitalSample(
                offset_minutes=int(offset),
                heart_rate=None if hr is None else float(hr),
                sbp=None if sbp is None else float(sbp),
                spo2=None if spo2 is None else float(spo2),
                temperature=None if temp is None else float(temp),
            ))
        return vitals

    def _load_labs(self) -> Dict[str, List[LabResult]]:
        cols = self.schema.lab
        df = self._read(cols.file, [cols.stay_id, cols.offset, cols.name, cols.value])
        df = self._clean_keys(df, cols.file, cols.stay_id, cols.offset)

        values = pd.to_numeric(df[cols.value], errors="coerce")
        names = df[cols.name].fillna("").str.strip()
        units = df[cols.unit].fillna("").str.strip() if cols.unit in df.columns else pd.Series("", index=df.index)
        valid = np.isfinite(values.fillna(np.inf)) & (names != "")
        self._tally(cols.file, (~valid).sum())

        labs: Dict[str, List[LabResult]] = defaultdict(list)
        for stay, offset, name, value, unit in zip(
            df["stay_key"][valid], df["offset_key"][valid], names[valid], values[valid], units[valid]
        ):
            labs[stay].append(LabResult(name=name, value=float(value), unit=unit,
                                        offset_minutes=int(offset)))
        return labs

    def _load_notes(self) -> Dict[str, List[ClinicalNote]]:
        cols = self.schema.note
        df = self._read(cols.file, [cols.stay_id, cols.offset, cols.note_type, cols.text])
        df = self._clean_keys(df, cols.file, cols.stay_id, cols.offset)

        texts = df[cols.text].fillna("").str.strip()
        valid = texts != ""
        self._tally(cols.file, (~valid).sum())

        notes: Dict[str, List[ClinicalNote]] = defaultdict(list)
        for stay, offset, note_type, text in zip(
            df["stay_key"][valid], df["offset_key"][valid],
            df[cols.note_type][valid].fillna(""), texts[valid]
        ):
            text, truncated = truncate_note(text)
            self.report.truncated_notes += int(truncated)
            notes[stay].append(ClinicalNote(
                author_role=classify_author(note_type, cols),
                offset_minutes=int(offset),
                text=text,
            ))
        return notes

    def _load_medications(self) -> Dict[str, List[MedicationEntry]]:
        cols = self.schema.medication
        df = self._read(cols.file, [cols.stay_id, cols.offset, cols.drug_name])
        df = self._clean_keys(df, cols.file, cols.stay_id, cols.offset)

        names = df[cols.drug_name].fillna("").str.strip()
        doses = df[cols.dose].fillna("").str.strip() if cols.dose in df.columns else pd.Series("", index=df.index)
        valid = names != ""
        self._tally(cols.file, (~valid).sum())

        meds: Dict[str, List[MedicationEntry]] = defaultdict(list)
        for stay, offset, name, dose in zip(
            df["stay_key"][valid], df["offset_key"][valid], names[valid], doses[valid]
        ):
            meds[stay].append(MedicationEntry(drug_name=name, offset_minutes=int(offset),
                                              dose_text=dose))
        return meds

    def _load_apache(self) -> Dict[str, ApacheBundle]:
        aps_cols = self.schema.apache_aps
        aps = self._read(aps_cols.file, [aps_cols.stay_id])
        aps = self._clean_keys(aps, aps_cols.file, aps_cols.stay_id)
        aps = aps.drop_duplicates("stay_key", keep="first")

        variable_cols = [c for c in aps.columns
                         if c not in (aps_cols.stay_id, "stay_key") and not c.startswith("Unnamed")]
        numeric = aps[variable_cols].apply(pd.to_numeric, errors="coerce")
        variables: Dict[str, Dict[str, float]] = {}
        for stay, (_, row) in zip(aps["stay_key"], numeric.iterrows()):
            variables[stay] = {
                name: float(value)
                for name, value in row.items()
                if pd.notna(value) and math.isfinite(value) and value != aps_cols.missing_sentinel
            }

        res_cols = self.schema.apache_result
        res = self._read(res_cols.file, [res_cols.stay_id, res_cols.predicted_mortality,
                                         res_cols.predicted_los])
        res = self._clean_keys(res, res_cols.file, res_cols.stay_id)
        if res_cols.version in res.columns:
            preferred = res[res_cols.version].fillna("").str.strip() == res_cols.preferred_version
            res = res.assign(version_rank=(~preferred).astype(int)).sort_values(["stay_key", "version_rank"], kind="mergesort")
        res = res.drop_duplicates("stay_key", keep="first")

        predictions: Dict[str, Tuple[Optional[float], Optional[float]]] = {}
        for stay, mort_raw, los_raw in zip(res["stay_key"], res[res_cols.predicted_mortality],
                                           res[res_cols.predicted_los]):
            mort = pd.to_numeric(mort_raw, errors="coerce")
            los = pd.to_numeric(los_raw, errors="coerce")
            mortality = None
            if pd.notna(mort) and mort != res_cols.missing_sentinel:
                if 0 <= mort <= 1:
                    mortality = float(mort)
                else:
                    self._tally(res_cols.file, 1)
            length = float(los) if pd.notna(los) and los >= 0 and math.isfinite(los) else None
            predictions[stay] = (mortality, length)

        bundles: Dict[str, ApacheBundle] = {}
        for stay in set(variables) | set(predictions):
            mortality, length = predictions.get(stay, (None, None))
            bundles[stay] = ApacheBundle(
                aps_variables=variables.get(stay, {}),
                apache_predicted_mortality=mortality,
                apache_predicted_los=length,
            )
        return bundles

    def load(self) -> List[PatientRecord]:
        """
        Load and join every source file

        Returns:
            Records sorted by stay id, one per complete stay

        Raises:
            MissingFileError: a source file is absent
            EmptyCohortError: no stay passed the completeness filter
        """
        for name in self.schema.file_names():
            if not (self.data_dir / name).is_file():
                raise MissingFileError(self.data_dir / name)

        patients = self._load_patients()
        vitals = self._load_vitals()
        labs = self._load_labs()
        notes = self._load_notes()
        meds = self._load_medications()
        apache = self._load_apache()

        self.report.stays_seen = len(patients)
        dropped: Counter = Counter()
        records: List[PatientRecord] = []

        for stay in sorted(patients, key=stay_sort_key):
            reasons = [
                reason for reason, source in (("no_vitals", vitals), ("no_labs", labs), ("no_notes", notes))
                if not source.get(stay)
            ]
            if reasons:
                dropped.update(reasons)
                self.report.dropped_stay_ids.append(stay)
                continue

            info = patients[stay]
            records.append(PatientRecord(
                stay_id=stay,
                age=info["age"],
                sex=info["sex"],
                vitals=tuple(vitals[stay]),
                labs=tuple(labs[stay]),
                notes=tuple(notes[stay]),
                medications=tuple(meds.get(stay, ())),
                apache=apache.get(stay, ApacheBundle()),
                outcome=info["outcome"],
            ))

        self.report.dropped = dict(dropped)
        self.report.loaded = len(records)

        pipeline_logger.log_load_report(
            self.report.loaded, self.report.dropped_total,
            self.report.malformed_total, self.report.imputed_vital_values,
        )

        if not records:
            raise EmptyCohortError(
                f"No complete stays in {self.data_dir} "
                f"({self.report.stays_seen} seen, {self.report.dropped_total} dropped)"
            )

        return records


@log_function_call
def load_cohort(
    data_dir: Union[str, Path],
    schema_config: Optional[SchemaConfig] = None
) -> Tuple[List[PatientRecord], LoadReport]:
    """
    Load a cohort from eICU-shaped CSV files

    Args:
        data_dir: Directory holding the seven source files
        schema_config: Column-name map (eICU defaults if None)

    Returns:
        (records, load report)
    """
    loader = CohortLoader(data_dir, schema_config)
    records = loader.load()
    logger.info(f"Loaded {len(records)} stays from {data_dir}")
    return records, loader.report
