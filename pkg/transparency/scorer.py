"""
Transparency Scorer

Pattern-coverage scoring: a criterion scores the share of its marker patterns
found in the response, a dimension scores the weighted mean of its criteria and
the overall score is the plain mean of the three dimensions.
"""

from typing import Dict, List, Optional

from pydantic import BaseModel, Field

from transparency.rubric import CriterionRubric, Dimension, Rubric, load_rubric

SNIPPET_CONTEXT = 40


class DimensionScore(BaseModel):
    dimension: Dimension
    criterion_scores: Dict[str, float]
    score: float = Field(ge=0, le=100)
    evidence: Dict[str, List[str]] = Field(default_factory=dict)


class TransparencyReport(BaseModel):
    explainability: DimensionScore
    interpretability: DimensionScore
    traceability: DimensionScore
    overall: float = Field(ge=0, le=100)
    evidence: Dict[str, List[str]] = Field(default_factory=dict)

    def dimension_scores(self) -> List[DimensionScore]:
        return [self.explainability, self.interpretability, self.traceability]


def normalize_text(text: str) -> str:
    """Collapse all whitespace runs, including line breaks, to single spaces"""
    return " ".join((text or "").split())


def _snippet(text: str, start: int, end: int) -> str:
    low = max(0, start - SNIPPET_CONTEXT)
    high = min(len(text), end + SNIPPET_CONTEXT)
    return text[low:high].strip()


def score_dimension(text: str, rubrics: List[CriterionRubric],
                    dimension: Dimension) -> DimensionScore:
    """
    Score one dimension

    Args:
        text: Response text
        rubrics: Criteria of this dimension
        dimension: Which dimension is being scored

    Returns:
        DimensionScore with one evidence snippet per matched pattern
    """
    normalized = normalize_text(text)
    criterion_scores: Dict[str, float] = {}
    evidence: Dict[str, List[str]] = {}

    for criterion in rubrics:
        snippets = []
        for matcher in criterion.compiled():
            match = matcher.search(normalized)
            if match:
                snippets.append(_snippet(normalized, match.start(), match.end()))
        criterion_scores[criterion.name] = min(100.0, 100.0 * len(snippets) / len(criterion.patterns))
        if snippets:
            evidence[criterion.name] = snippets

    total_weight = sum(c.weight for c in rubrics)
    score = (
        sum(c.weight * criterion_scores[c.name] for c in rubrics) / total_weight
        if total_weight > 0 else 0.0
    )
    return DimensionScore(
        dimension=dimension,
        criterion_scores=criterion_scores,
        score=min(100.0, max(0.0, score)),
        evidence=evidence,
    )


class TransparencyScorer:
    """
    Scores agent responses against a rubric

    Features:
    - Case- and whitespace-insensitive marker matching
    - Per-criterion evidence snippets
    - Swappable rubric document
    """

    def __init__(self, rubric: Optional[Rubric] = None):
        self.rubric = rubric or load_rubric()

    def score(self, prediction_text: str, explanation_text: str = "") -> TransparencyReport:
        text = f"{prediction_text or ''}\n{explanation_text or ''}"
        dims = {
            dimension: score_dimension(text, self.rubric.criteria(dimension), dimension)
            for dimension in Dimension
        }
        evidence = {
            f"{dimension.value}.{name}": snippets
            for dimension, result in dims.items()
            for name, snippets in result.evidence.items()
        }
        overall = sum(d.score for d in dims.values()) / len(dims)
        return TransparencyReport(
            explainability=dims[Dimension.EXPLAINABILITY],
            interpretability=dims[Dimension.INTERPRETABILITY],
            traceability=dims[Dimension.TRACEABILITY],
            overall=overall,
            evidence=evidence,
        )


def score_transparency(prediction_text: str, explanation_text: str,
                       rubric: Optional[Rubric] = None) -> TransparencyReport:
    """Score prediction and explanation text together (default rubric if None)"""
    return TransparencyScorer(rubric).score(prediction_text, explanation_text)
