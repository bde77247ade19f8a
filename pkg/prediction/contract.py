"""
Prediction Output Contract
The line-labelled block the prediction agent must emit, and the outcome it parses into
"""

from enum import Enum
from typing import List

from pydantic import BaseModel, Field, field_validator

from ingestion.records import OutcomeStatus

MAX_LOS_DAYS = 365.0
DEFAULT_THRESHOLD = 0.5

FIELD_PROBABILITY = "MORTALITY_PROBABILITY"
FIELD_LOS = "PREDICTED_LOS_DAYS"
FIELD_CONFIDENCE = "CONFIDENCE"
FIELD_FACTORS = "KEY_FACTORS"
PREDICTION_FIELDS = (FIELD_PROBABILITY, FIELD_LOS, FIELD_CONFIDENCE, FIELD_FACTORS)

FACTOR_SEPARATOR = ";"

_CONTRACT = (
    f"{FIELD_PROBABILITY}: <0.00-1.00>\n"
    f"{FIELD_LOS}: <positive number>\n"
    f"{FIELD_CONFIDENCE}: <LOW|MEDIUM|HIGH>\n"
    f"{FIELD_FACTORS}: <factor; factor; ...>"
)


class Confidence(str, Enum):
    LOW = "LOW"
    MEDIUM = "MEDIUM"
    HIGH = "HIGH"


class PredictionOutcome(BaseModel):
    """Structured result of one prediction response"""
    mortality_probability: float = Field(ge=0.0, le=1.0)
    predicted_los_days: float = Field(gt=0.0, le=MAX_LOS_DAYS)
    confidence: Confidence
    key_factors: List[str] = Field(min_length=1)
    raw_text: str = ""

    @field_validator("key_factors")
    @classmethod
    def _clean_factors(cls, factors: List[str]) -> List[str]:
        cleaned = [f.strip() for f in factors]
        for factor in cleaned:
            if not factor or FACTOR_SEPARATOR in factor or "\n" in factor:
                raise ValueError(f"invalid key factor: {factor!r}")
        return cleaned

    def structured(self) -> tuple:
        """Fields compared by round-trip checks (raw_text excluded)"""
        return (
            self.mortality_probability,
            self.predicted_los_days,
            self.confidence,
            tuple(self.key_factors),
        )


def render_prediction_contract() -> str:
    """The exact output block every prediction-template agent must produce"""
    return _CONTRACT


def render_prediction(outcome: PredictionOutcome) -> str:
    """Fill the contract with an outcome's values"""
    return (
        f"{FIELD_PROBABILITY}: {outcome.mortality_probability!r}\n"
        f"{FIELD_LOS}: {outcome.predicted_los_days!r}\n"
        f"{FIELD_CONFIDENCE}: {outcome.confidence.value}\n"
        f"{FIELD_FACTORS}: {'; '.join(outcome.key_factors)}"
    )


def classify(probability: float, threshold: float = DEFAULT_THRESHOLD) -> OutcomeStatus:
    """
    Map a mortality probability to an outcome status

    Args:
        probability: Value in [0, 1]
        threshold: Value in (0, 1); probability >= threshold means expired

    Returns:
        OutcomeStatus
    """
    if not 0.0 <= probability <= 1.0:
        raise ValueError(f"probability must be in [0, 1], got {probability}")
    if not 0.0 < threshold < 1.0:
        raise ValueError(f"threshold must be in (0, 1), got {threshold}")
    return OutcomeStatus.EXPIRED if probability >= threshold else OutcomeStatus.SURVIVED
