"""
Cohort loading, feature extraction, sampling and synthetic fixtures
"""

from pathlib import Path
from typing import Dict, List

import pandas as pd
import pytest

from ingestion import (
    EmptyCohortError,
    MissingFileError,
    SchemaConfig,
    StratumError,
    extract_features,
    generate_synthetic,
    load_cohort,
    sample_balanced,
)
from ingestion.features import MAX_RECENT_VITALS, MAX_SELECTED_NOTES, MAX_TOP_MEDICATIONS
from ingestion.loader import NOTE_CHAR_LIMIT, classify_author, truncate_note
from ingestion.records import AuthorRole, OutcomeLabel, OutcomeStatus, PatientRecord, Sex, stay_sort_key
from tests.factories import make_record

SCHEMA = SchemaConfig()


def base_tables() -> Dict[str, List[dict]]:
    """Two complete stays in eICU column naming"""
    return {
        "patient.csv": [
            {"patientunitstayid": "1", "age": "> 89", "gender": "Female",
             "unitdischargestatus": "Expired", "unitdischargeoffset": "2880"},
            {"patientunitstayid": "2", "age": "54", "gender": "Male",
             "unitdischargestatus": "Alive", "unitdischargeoffset": "1440"},
        ],
        "vitalPeriodic.csv": [
            {"patientunitstayid": "1", "observationoffset": "60", "heartrate": None,
             "systemicsystolic": "110", "sao2": "96", "temperature": "37.2"},
            {"patientunitstayid": "1", "observationoffset": "0", "heartrate": "80",
             "systemicsystolic": "120", "sao2": "97", "temperature": "37.0"},
            {"patientunitstayid": "1", "observationoffset": "120", "heartrate": "90",
             "systemicsystolic": None, "sao2": None, "temperature": None},
            {"patientunitstayid": "2", "observationoffset": "0", "heartrate": None,
             "systemicsystolic": None, "sao2": None, "temperature": None},
            {"patientunitstayid": "2", "observationoffset": "30", "heartrate": "70",
             "systemicsystolic": "130", "sao2": "99", "temperature": "36.8"},
        ],
        "lab.csv": [
            {"patientunitstayid": "1", "labresultoffset": "10", "labname": "lactate",
             "labresult": "4.1", "labmeasurenamesystem": "mmol/L"},
            {"patientunitstayid": "1", "labresultoffset": "500", "labname": "lactate",
             "labresult": "5.3", "labmeasurenamesystem": "mmol/L"},
            {"patientunitstayid": "2", "labresultoffset": "20", "labname": "creatinine",
             "labresult": "0.9", "labmeasurenamesystem": "mg/dL"},
        ],
        "note.csv": [
            {"patientunitstayid": "1", "noteoffset": "100", "notetype": "Physician Progress",
             "notetext": "Septic shock, on pressors."},
            {"patientunitstayid": "2", "noteoffset": "50", "notetype": "Nursing Assessment",
             "notetext": "Comfortable overnight."},
        ],
        "medication.csv": [
            {"patientunitstayid": "1", "drugstartoffset": "5", "drugname": "norepinephrine",
             "dosage": "8 mg"},
        ],
        "apacheApsVar.csv": [
            {"patientunitstayid": "1", "heartrate": "130", "creatinine": "-1"},
            {"patientunitstayid": "2", "heartrate": "85", "creatinine": "0.9"},
        ],
        "apachePatientResult.csv": [
            {"patientunitstayid": "1", "apacheversion": "IV",
             "predictedicumortality": "0.2", "predictediculos": "3.0"},
            {"patientunitstayid": "1", "apacheversion": "IVa",
             "predictedicumortality": "0.3", "predictediculos": "4.0"},
            {"patientunitstayid": "2", "apacheversion": "IVa",
             "predictedicumortality": "-1", "predictediculos": "1.5"},
        ],
    }


def write_tables(directory: Path, tables: Dict[str, List[dict]]) -> Path:
    directory.mkdir(parents=True, exist_ok=True)
    for name, rows in tables.items():
        pd.DataFrame(rows).to_csv(directory / name, index=False)
    return directory


@pytest.fixture
def small_dir(tmp_path) -> Path:
    return write_tables(tmp_path / "small", base_tables())


def by_id(records: List[PatientRecord]) -> Dict[str, PatientRecord]:
    return {r.stay_id: r for r in records}


# =============================================================================
# Loading
# =============================================================================

class TestLoader:

    def test_loads_complete_stays_in_id_order(self, small_dir):
        records, report = load_cohort(small_dir)
        assert [r.stay_id for r in records] == ["1", "2"]
        assert report.stays_seen == 2
        assert report.loaded == 2
        assert report.dropped_total == 0

    def test_outcome_and_demographics(self, small_dir):
        records = by_id(load_cohort(small_dir)[0])
        assert records["1"].outcome == OutcomeLabel(OutcomeStatus.EXPIRED, 2.0)
        assert records["2"].outcome == OutcomeLabel(OutcomeStatus.SURVIVED, 1.0)
        assert records["1"].age == 90.0
        assert records["1"].sex is Sex.FEMALE
        assert records["2"].age == 54.0
        assert records["2"].sex is Sex.MALE

    def test_vitals_sorted_and_carried_forward(self, small_dir):
        records, report = load_cohort(small_dir)
        vitals = by_id(records)["1"].vitals
        assert [v.offset_minutes for v in vitals] == [0, 60, 120]
        assert vitals[1].heart_rate == 80.0
        assert vitals[2].sbp == 110.0
        assert vitals[2].spo2 == 96.0
        assert vitals[2].temperature == 37.2
        assert report.imputed_vital_values == 4

    def test_leading_empty_vital_row_dropped(self, small_dir):
        vitals = by_id(load_cohort(small_dir)[0])["2"].vitals
        assert [v.offset_minutes for v in vitals] == [30]

    def test_apache_sentinels_and_preferred_version(self, small_dir):
        records = by_id(load_cohort(small_dir)[0])
        first, second = records["1"].apache, records["2"].apache
        assert first.aps_variables == {"heartrate": 130.0}
        assert first.apache_predicted_mortality == 0.3
        assert first.apache_predicted_los == 4.0
        assert second.apache_predicted_mortality is None
        assert second.apache_predicted_los == 1.5

    def test_note_author_roles(self, small_dir):
        records = by_id(load_cohort(small_dir)[0])
        assert records["1"].notes[0].author_role is AuthorRole.PHYSICIAN
        assert records["2"].notes[0].author_role is AuthorRole.NURSE

    def test_missing_file(self, small_dir):
        (small_dir / "note.csv").unlink()
        with pytest.raises(MissingFileError) as exc_info:
            load_cohort(small_dir)
        assert "note.csv" in str(exc_info.value)

    def test_stay_without_notes_is_dropped(self, tmp_path):
        tables = base_tables()
        tables["note.csv"] = [row for row in tables["note.csv"] if row["patientunitstayid"] != "2"]
        records, report = load_cohort(write_tables(tmp_path / "d", tables))
        assert [r.stay_id for r in records] == ["1"]
        assert report.dropped == {"no_notes": 1}
        assert report.dropped_stay_ids == ["2"]

    def test_no_complete_stay(self, tmp_path):
        tables = base_tables()
        tables["lab.csv"] = [{"patientunitstayid": "9", "labresultoffset": "1", "labname": "wbc",
                              "labresult": "7", "labmeasurenamesystem": "K/uL"}]
        with pytest.raises(EmptyCohortError):
            load_cohort(write_tables(tmp_path / "d", tables))

    def test_malformed_rows_skipped_and_counted(self, tmp_path):
        tables = base_tables()
        tables["lab.csv"].append({"patientunitstayid": "1", "labresultoffset": "30", "labname": "wbc",
                                  "labresult": "high", "labmeasurenamesystem": "K/uL"})
        tables["lab.csv"].append({"patientunitstayid": "", "labresultoffset": "30", "labname": "wbc",
                                  "labresult": "8", "labmeasurenamesystem": "K/uL"})
        tables["patient.csv"].append({"patientunitstayid": "3", "age": "40", "gender": "Male",
                                      "unitdischargestatus": "", "unitdischargeoffset": "100"})
        records, report = load_cohort(write_tables(tmp_path / "d", tables))
        assert len(records) == 2
        assert report.malformed_rows["lab.csv"] == 2
        assert report.malformed_rows["patient.csv"] == 1
        assert report.malformed_total == 3
        assert {lab.name for lab in by_id(records)["1"].labs} == {"lactate"}

    def test_long_note_truncated(self, tmp_path):
        tables = base_tables()
        tables["note.csv"][0]["notetext"] = "word " * 1500
        records, report = load_cohort(write_tables(tmp_path / "d", tables))
        text = by_id(records)["1"].notes[0].text
        assert text.endswith("[truncated]")
        assert len(text) <= NOTE_CHAR_LIMIT + len(" [truncated]")
        assert report.truncated_notes == 1

    def test_report_serializes(self, small_dir):
        _, report = load_cohort(small_dir)
        data = report.to_dict()
        assert data["loaded"] == 2
        assert "last observation carried forward" in data["imputation"]
        assert '"loaded": 2' in report.to_json()

    def test_custom_column_names(self, tmp_path):
        tables = base_tables()
        tables["patient.csv"] = [
            {**{k: v for k, v in row.items() if k != "gender"}, "sex": row["gender"]}
            for row in tables["patient.csv"]
        ]
        schema = SchemaConfig.model_validate({"patient": {"sex": "sex"}})
        records, _ = load_cohort(write_tables(tmp_path / "d", tables), schema)
        assert by_id(records)["2"].sex is Sex.MALE


@pytest.mark.parametrize("note_type, role", [
    ("Physician Progress", AuthorRole.PHYSICIAN),
    ("Attending Note", AuthorRole.PHYSICIAN),
    ("Nursing Assessment", AuthorRole.NURSE),
    ("RN shift summary", AuthorRole.NURSE),
    ("Case Management", AuthorRole.OTHER),
    ("", AuthorRole.OTHER),
])
def test_classify_author(note_type, role):
    assert classify_author(note_type, SCHEMA.note) is role


def test_truncate_note_leaves_short_text():
    assert truncate_note("short note") == ("short note", False)
    text, truncated = truncate_note("x" * 10, limit=4)
    assert truncated
    assert text == "xxxx [truncated]"


def test_stay_sort_key_numeric_first():
    ids = ["10", "abc", "9", "100"]
    assert sorted(ids, key=stay_sort_key) == ["9", "10", "100", "abc"]


def test_synthetic_cohort_loads_completely(cohort, loaded):
    _, report = loaded
    assert len(cohort) == 40
    assert report.dropped_total == 0
    assert sum(r.outcome.status is OutcomeStatus.EXPIRED for r in cohort) == 20
    for record in cohort:
        offsets = [v.offset_minutes for v in record.vitals]
        assert offsets == sorted(offsets)


# =============================================================================
# Features
# =============================================================================

class TestFeatures:

    def test_recent_vitals_are_the_latest(self):
        features = extract_features(make_record())
        assert len(features.recent_vitals) == MAX_RECENT_VITALS
        assert [v.offset_minutes for v in features.recent_vitals] == [10 * k for k in range(5, 15)]

    def test_latest_lab_per_name(self):
        labs = extract_features(make_record()).distinct_labs
        assert [(lab.name, lab.value) for lab in labs] == [("lactate", 4.0), ("sodium", 140.0)]

    def test_notes_prefer_physicians_then_recency(self):
        notes = extract_features(make_record()).selected_notes
        assert len(notes) == MAX_SELECTED_NOTES
        assert [n.text for n in notes] == ["md later", "md early", "nurse late"]

    def test_top_medications_by_frequency(self):
        meds = extract_features(make_record()).top_medications
        assert len(meds) == MAX_TOP_MEDICATIONS
        assert meds[0].drug_name == "heparin"
        assert meds[0].dose_text == "5000 units"
        assert [m.drug_name for m in meds[1:]] == [f"drug{k:02d}" for k in range(19)]

    def test_pure_function_of_record(self):
        record = make_record()
        assert extract_features(record) == extract_features(record)

    def test_record_requires_notes(self):
        with pytest.raises(ValueError):
            make_record(notes=())


# =============================================================================
# Sampling
# =============================================================================

class TestSampling:

    def test_balanced_and_deterministic(self, cohort):
        first = sample_balanced(cohort, 5, 4, seed=3)
        second = sample_balanced(list(reversed(cohort)), 5, 4, seed=3)
        assert [r.stay_id for r in first] == [r.stay_id for r in second]
        statuses = [r.outcome.status for r in first]
        assert statuses == [OutcomeStatus.EXPIRED] * 5 + [OutcomeStatus.SURVIVED] * 4

    def test_no_duplicates(self, cohort):
        sample = sample_balanced(cohort, 20, 20, seed=0)
        assert len({r.stay_id for r in sample}) == 40

    def test_short_stratum(self, cohort):
        with pytest.raises(StratumError) as exc_info:
            sample_balanced(cohort, 21, 5, seed=0)
        assert exc_info.value.stratum == "expired"
        assert exc_info.value.requested == 21
        assert exc_info.value.available == 20

    def test_negative_size_rejected(self, cohort):
        with pytest.raises(ValueError):
            sample_balanced(cohort, -1, 5, seed=0)


# =============================================================================
# Synthetic fixtures
# =============================================================================

class TestSynthetic:

    def test_writes_all_source_files(self, tmp_path):
        paths = generate_synthetic(seed=1, n_stays=6, expired_fraction=0.5, out_dir=tmp_path)
        assert sorted(p.name for p in paths) == sorted(SCHEMA.file_names())
        assert all(p.is_file() for p in paths)

    def test_same_seed_same_bytes(self, tmp_path):
        a = generate_synthetic(seed=11, n_stays=8, expired_fraction=0.25, out_dir=tmp_path / "a")
        b = generate_synthetic(seed=11, n_stays=8, expired_fraction=0.25, out_dir=tmp_path / "b")
        for left, right in zip(a, b):
            assert left.read_bytes() == right.read_bytes()

    def test_expired_fraction_respected(self, tmp_path):
        generate_synthetic(seed=2, n_stays=10, expired_fraction=0.3, out_dir=tmp_path)
        records, _ = load_cohort(tmp_path)
        assert sum(r.outcome.status is OutcomeStatus.EXPIRED for r in records) == 3

    @pytest.mark.parametrize("n_stays, fraction", [(0, 0.5), (5, 1.5), (5, -0.1)])
    def test_bad_arguments(self, tmp_path, n_stays, fraction):
        with pytest.raises(ValueError):
            generate_synthetic(seed=0, n_stays=n_stays, expired_fraction=fraction, out_dir=tmp_path)
