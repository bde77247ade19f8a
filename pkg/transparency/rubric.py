"""
Transparency Rubric
Dimensions -> criteria -> marker patterns, loaded from a JSON document
"""

import json
import re
from enum import Enum
from pathlib import Path
from typing import Dict, List, Optional, Union

from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

DEFAULT_RUBRIC_PATH = Path(__file__).with_name("default_rubric.json")
WEIGHT_TOLERANCE = 1e-9


class Dimension(str, Enum):
    EXPLAINABILITY = "explainability"
    INTERPRETABILITY = "interpretability"
    TRACEABILITY = "traceability"


class RubricError(ValueError):
    """Rubric document is unreadable or ill-formed"""


class CriterionRubric(BaseModel):
    """One criterion: a weight and the phrases that evidence it"""
    name: str = Field(min_length=1)
    patterns: List[str] = Field(min_length=1)
    weight: float = Field(ge=0)

    @field_validator("patterns")
    @classmethod
    def _compilable(cls, patterns: List[str]) -> List[str]:
        for pattern in patterns:
            if not pattern.strip():
                raise ValueError("empty marker pattern")
            re.compile(pattern)
        return patterns

    def compiled(self) -> List[re.Pattern]:
        """Case-insensitive, whole-word matchers"""
        return [
            re.compile(rf"(?<!\w)(?:{pattern})(?!\w)", re.IGNORECASE)
            for pattern in self.patterns
        ]


class Rubric(BaseModel):
    dimensions: Dict[Dimension, List[CriterionRubric]]

    @model_validator(mode="after")
    def _check_dimensions(self) -> "Rubric":
        missing = [d.value for d in Dimension if d not in self.dimensions]
        if missing:
            raise ValueError(f"rubric missing dimensions: {', '.join(missing)}")
        for dimension, criteria in self.dimensions.items():
            if not criteria:
                raise ValueError(f"{dimension.value}: no criteria")
            names = [c.name for c in criteria]
            if len(set(names)) != len(names):
                raise ValueError(f"{dimension.value}: duplicate criterion names")
            total = sum(c.weight for c in criteria)
            if abs(total - 1.0) > WEIGHT_TOLERANCE:
                raise ValueError(f"{dimension.value}: weights sum to {total}, expected 1")
        return self

    def criteria(self, dimension: Dimension) -> List[CriterionRubric]:
        return self.dimensions[dimension]


def load_rubric(path: Optional[Union[str, Path]] = None) -> Rubric:
    """
    Load a rubric document

    Args:
        path: JSON rubric file (None for the bundled default)

    Raises:
        RubricError: unreadable or invalid document
    """
    path = Path(path) if path else DEFAULT_RUBRIC_PATH
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise RubricError(f"Cannot read rubric {path}: {e}") from e
    try:
        return Rubric.model_validate(data)
    except ValidationError as e:
        raise RubricError(f"Invalid rubric {path}: {e}") from e
