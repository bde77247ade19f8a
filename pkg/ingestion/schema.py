"""
Column-name mapping for eICU-shaped CSV exports

Defaults match eICU Collaborative Research Database v2.0 file and column names,
so a real export and the synthetic fixtures load through the same path.
"""

from typing import List

from pydantic import BaseModel, Field


class PatientColumns(BaseModel):
    file: str = "patient.csv"
    stay_id: str = "patientunitstayid"
    age: str = "age"
    sex: str = "gender"
    discharge_status: str = "unitdischargestatus"
    discharge_offset: str = "unitdischargeoffset"
    expired_value: str = "Expired"


class LabColumns(BaseModel):
    file: str = "lab.csv"
    stay_id: str = "patientunitstayid"
    offset: str = "labresultoffset"
    name: str = "labname"
    value: str = "labresult"
    unit: str = "labmeasurenamesystem"


class VitalColumns(BaseModel):
    file: str = "vitalPeriodic.csv"
    stay_id: str = "patientunitstayid"
    offset: str = "observationoffset"
    heart_rate: str = "heartrate"
    sbp: str = "systemicsystolic"
    spo2: str = "sao2"
    temperature: str = "temperature"


class NoteColumns(BaseModel):
    file: str = "note.csv"
    stay_id: str = "patientunitstayid"
    offset: str = "noteoffset"
    note_type: str = "notetype"
    text: str = "notetext"
    physician_markers: List[str] = Field(
        default_factory=lambda: ["physician", "progress", "attending", "resident", "md"]
    )
    nurse_markers: List[str] = Field(default_factory=lambda: ["nurs", "rn "])


class MedicationColumns(BaseModel):
    file: str = "medication.csv"
    stay_id: str = "patientunitstayid"
    offset: str = "drugstartoffset"
    drug_name: str = "drugname"
    dose: str = "dosage"


class ApacheApsColumns(BaseModel):
    file: str = "apacheApsVar.csv"
    stay_id: str = "patientunitstayid"
    # eICU codes a missing APS variable as -1
    missing_sentinel: float = -1.0


class ApacheResultColumns(BaseModel):
    file: str = "apachePatientResult.csv"
    stay_id: str = "patientunitstayid"
    version: str = "apacheversion"
    preferred_version: str = "IVa"
    predicted_mortality: str = "predictedicumortality"
    predicted_los: str = "predictediculos"
    missing_sentinel: float = -1.0


class SchemaConfig(BaseModel):
    """File and column names for all seven source files"""
    patient: PatientColumns = Field(default_factory=PatientColumns)
    lab: LabColumns = Field(default_factory=LabColumns)
    vitals: VitalColumns = Field(default_factory=VitalColumns)
    note: NoteColumns = Field(default_factory=NoteColumns)
    medication: MedicationColumns = Field(default_factory=MedicationColumns)
    apache_aps: ApacheApsColumns = Field(default_factory=ApacheApsColumns)
    apache_result: ApacheResultColumns = Field(default_factory=ApacheResultColumns)

    def file_names(self) -> List[str]:
        return [
            self.patient.file,
            self.lab.file,
            self.vitals.file,
            self.note.file,
            self.medication.file,
            self.apache_aps.file,
            self.apache_result.file,
        ]
