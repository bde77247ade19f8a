"""
Validation Feedback Contract

The validation agent compares the prediction with the actual outcome and
answers in a labelled block. Parsing is lenient: feedback is informational and
never fails a run.
"""

import math
import re
from typing import List, Optional

from pydantic import BaseModel, Field

FIELD_CORRECT = "PREDICTION_CORRECT"
FIELD_LOS_ERROR = "LOS_ERROR_DAYS"
FIELD_VARIABLES = "KEY_VARIABLES"
FIELD_IMPROVEMENTS = "IMPROVEMENTS"
VALIDATION_FIELDS = (FIELD_CORRECT, FIELD_LOS_ERROR, FIELD_VARIABLES, FIELD_IMPROVEMENTS)

_CONTRACT = (
    f"{FIELD_CORRECT}: <YES|NO>\n"
    f"{FIELD_LOS_ERROR}: <absolute error in days>\n"
    f"{FIELD_VARIABLES}: <variable; variable; ...>\n"
    f"{FIELD_IMPROVEMENTS}: <one sentence>"
)

_LINE = {
    label: re.compile(rf"^[ \t>*#-]*{label}[ \t*]*:[ \t*]*(?P<value>[^\n]*?)[ \t*]*$", re.MULTILINE)
    for label in VALIDATION_FIELDS
}


class ValidationFeedback(BaseModel):
    prediction_correct: Optional[bool] = None
    los_error_days: Optional[float] = Field(default=None, ge=0, allow_inf_nan=False)
    key_variables: List[str] = Field(default_factory=list)
    improvements: str = ""


def render_validation_contract() -> str:
    return _CONTRACT


def render_validation(feedback: ValidationFeedback) -> str:
    correct = {True: "YES", False: "NO", None: "UNKNOWN"}[feedback.prediction_correct]
    los_error = "UNKNOWN" if feedback.los_error_days is None else f"{feedback.los_error_days:.2f}"
    return (
        f"{FIELD_CORRECT}: {correct}\n"
        f"{FIELD_LOS_ERROR}: {los_error}\n"
        f"{FIELD_VARIABLES}: {'; '.join(feedback.key_variables)}\n"
        f"{FIELD_IMPROVEMENTS}: {feedback.improvements}"
    )


def parse_validation(text: str) -> Optional[ValidationFeedback]:
    """
    Parse a validation response

    Returns:
        ValidationFeedback, or None when no labelled line is present
    """
    values = {}
    for label, pattern in _LINE.items():
        match = pattern.search(text or "")
        if match:
            values[label] = match.group("value").strip()
    if not values:
        return None

    correct_raw = values.get(FIELD_CORRECT, "").upper()
    correct = True if correct_raw.startswith("Y") else False if correct_raw.startswith("N") else None

    los_error = None
    try:
        value = abs(float(values.get(FIELD_LOS_ERROR, "")))
    except ValueError:
        value = None
    if value is not None and math.isfinite(value):
        los_error = value

    variables = [v.strip() for v in values.get(FIELD_VARIABLES, "").split(";") if v.strip()]
    return ValidationFeedback(
        prediction_correct=correct,
        los_error_days=los_error,
        key_variables=variables,
        improvements=values.get(FIELD_IMPROVEMENTS, ""),
    )
