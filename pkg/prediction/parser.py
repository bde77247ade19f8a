"""
Prediction Parser
Pulls the four labelled lines out of a model response
"""

import math
import re
from typing import Dict

from prediction.contract import (
    FACTOR_SEPARATOR,
    FIELD_CONFIDENCE,
    FIELD_FACTORS,
    FIELD_LOS,
    FIELD_PROBABILITY,
    MAX_LOS_DAYS,
    PREDICTION_FIELDS,
    Confidence,
    PredictionOutcome,
)

_NUMBER = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?")


class PredictionParseError(ValueError):
    """Response does not satisfy the prediction contract"""

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field


class MissingFieldError(PredictionParseError):
    def __init__(self, field: str):
        super().__init__(field, "field not found in response")


class RangeError(PredictionParseError):
    def __init__(self, field: str, value: float, allowed: str):
        super().__init__(field, f"value {value} outside {allowed}")
        self.value = value


class FormatError(PredictionParseError):
    def __init__(self, field: str, raw: str):
        super().__init__(field, f"cannot parse {raw!r}")
        self.raw = raw


def _line_pattern(label: str) -> re.Pattern:
    # Leading list/quote/markdown-bold decoration is tolerated, the label is not
    return re.compile(
        rf"^[ \t>*#-]*{label}[ \t*]*:[ \t*]*(?P<value>[^\n]*?)[ \t*]*$",
        re.MULTILINE,
    )


_PATTERNS = {label: _line_pattern(label) for label in PREDICTION_FIELDS}


def extract_fields(text: str) -> Dict[str, str]:
    """First occurrence of each labelled line; absent labels are omitted"""
    found: Dict[str, str] = {}
    for label, pattern in _PATTERNS.items():
        match = pattern.search(text)
        if match:
            found[label] = match.group("value").strip()
    return found


def _parse_number(field: str, raw: str) -> float:
    if not _NUMBER.fullmatch(raw):
        raise FormatError(field, raw)
    value = float(raw)
    if not math.isfinite(value):
        raise FormatError(field, raw)
    return value


def parse_prediction(text: str) -> PredictionOutcome:
    """
    Parse a prediction response

    Args:
        text: Full model response (surrounding prose allowed)

    Returns:
        PredictionOutcome with raw_text preserved

    Raises:
        MissingFieldError: a labelled line is absent
        RangeError: probability outside [0, 1] or LOS outside (0, 365]
        FormatError: a value cannot be parsed
    """
    fields = extract_fields(text)
    for label in PREDICTION_FIELDS:
        if label not in fields:
            raise MissingFieldError(label)

    probability = _parse_number(FIELD_PROBABILITY, fields[FIELD_PROBABILITY])
    if not 0.0 <= probability <= 1.0:
        raise RangeError(FIELD_PROBABILITY, probability, "[0, 1]")

    los = _parse_number(FIELD_LOS, fields[FIELD_LOS])
    if not 0.0 < los <= MAX_LOS_DAYS:
        raise RangeError(FIELD_LOS, los, f"(0, {MAX_LOS_DAYS:g}]")

    try:
        confidence = Confidence(fields[FIELD_CONFIDENCE].upper())
    except ValueError:
        raise FormatError(FIELD_CONFIDENCE, fields[FIELD_CONFIDENCE])

    factors = [f.strip() for f in fields[FIELD_FACTORS].split(FACTOR_SEPARATOR)]
    factors = [f for f in factors if f]
    if not factors:
        raise FormatError(FIELD_FACTORS, fields[FIELD_FACTORS])

    return PredictionOutcome(
        mortality_probability=probability,
        predicted_los_days=los,
        confidence=confidence,
        key_factors=factors,
        raw_text=text,
    )
