"""Prediction output contract, parsing and classification"""

from .contract import (
    DEFAULT_THRESHOLD,
    MAX_LOS_DAYS,
    Confidence,
    PredictionOutcome,
    classify,
    render_prediction,
    render_prediction_contract,
)
from .parser import (
    FormatError,
    MissingFieldError,
    PredictionParseError,
    RangeError,
    parse_prediction,
)
from .validation import (
    ValidationFeedback,
    parse_validation,
    render_validation,
    render_validation_contract,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "MAX_LOS_DAYS",
    "Confidence",
    "PredictionOutcome",
    "classify",
    "render_prediction",
    "render_prediction_contract",
    "FormatError",
    "MissingFieldError",
    "PredictionParseError",
    "RangeError",
    "parse_prediction",
    "ValidationFeedback",
    "parse_validation",
    "render_validation",
    "render_validation_contract",
]
