"""Rubric-based transparency scoring"""

from .rubric import CriterionRubric, Dimension, Rubric, RubricError, load_rubric
from .scorer import (
    DimensionScore,
    TransparencyReport,
    TransparencyScorer,
    normalize_text,
    score_dimension,
    score_transparency,
)

__all__ = [
    "CriterionRubric",
    "Dimension",
    "Rubric",
    "RubricError",
    "load_rubric",
    "DimensionScore",
    "TransparencyReport",
    "TransparencyScorer",
    "normalize_text",
    "score_dimension",
    "score_transparency",
]
