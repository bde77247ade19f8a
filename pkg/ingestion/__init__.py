"""Cohort ingestion: eICU-shaped CSV loading, feature extraction, sampling, fixtures"""

from .records import (
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
)
from .schema import SchemaConfig
from .loader import CohortLoader, EmptyCohortError, LoadError, LoadReport, MissingFileError, load_cohort
from .features import DemographicsSummary, FeatureBundle, extract_features
from .sampling import StratumError, sample_balanced
from .synthetic import SyntheticCohortGenerator, generate_synthetic

__all__ = [
    "ApacheBundle",
    "AuthorRole",
    "ClinicalNote",
    "LabResult",
    "MedicationEntry",
    "OutcomeLabel",
    "OutcomeStatus",
    "PatientRecord",
    "Sex",
    "VitalSample",
    "SchemaConfig",
    "CohortLoader",
    "EmptyCohortError",
    "LoadError",
    "LoadReport",
    "MissingFileError",
    "load_cohort",
    "DemographicsSummary",
    "FeatureBundle",
    "extract_features",
    "StratumError",
    "sample_balanced",
    "SyntheticCohortGenerator",
    "generate_synthetic",
]
