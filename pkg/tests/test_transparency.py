"""
Transparency rubric loading and pattern-coverage scoring
"""

import json

import pytest
from hypothesis import given, settings, strategies as st

from transparency import (
    Dimension,
    RubricError,
    TransparencyScorer,
    load_rubric,
    normalize_text,
    score_transparency,
)


@pytest.fixture(scope="module")
def rubric():
    return load_rubric()


@pytest.fixture(scope="module")
def scorer(rubric):
    return TransparencyScorer(rubric)


def every_pattern(rubric) -> str:
    return ". ".join(
        pattern
        for dimension in Dimension
        for criterion in rubric.criteria(dimension)
        for pattern in criterion.patterns
    )


def rubric_document(weight: float = 0.5) -> dict:
    return {
        "dimensions": {
            dimension.value: [
                {"name": "alpha", "weight": weight, "patterns": [f"{dimension.value}-marker"]},
                {"name": "beta", "weight": 0.5, "patterns": ["shared", "other"]},
            ]
            for dimension in Dimension
        }
    }


# =============================================================================
# Scoring
# =============================================================================

class TestScoring:

    def test_empty_text_scores_zero(self, scorer):
        report = scorer.score("", "")
        assert report.overall == 0.0
        assert all(d.score == 0.0 for d in report.dimension_scores())
        assert report.evidence == {}

    def test_all_patterns_score_full(self, scorer, rubric):
        report = scorer.score(every_pattern(rubric))
        assert report.overall == pytest.approx(100.0)
        assert all(d.score == pytest.approx(100.0) for d in report.dimension_scores())

    def test_overall_is_mean_of_dimensions(self, scorer):
        report = scorer.score(
            "The key factor is lactate because perfusion is failing.",
            "Vital signs and laboratory data, most recent values first.",
        )
        dims = report.dimension_scores()
        assert report.overall == pytest.approx(sum(d.score for d in dims) / 3)
        assert 0 < report.overall < 100

    def test_partial_criterion(self, scorer):
        report = scorer.score("The most important signal is lactate.")
        assert report.explainability.criterion_scores["feature_importance"] == pytest.approx(50.0)
        assert report.explainability.score == pytest.approx(12.5)

    def test_case_and_whitespace_insensitive(self, scorer):
        report = scorer.score("CONTRIBUTING\n   Factor")
        assert report.explainability.criterion_scores["feature_importance"] == pytest.approx(25.0)

    def test_whole_word_only(self, scorer):
        report = scorer.score("The solution was lactated ringer.")
        assert report.explainability.criterion_scores["feature_importance"] == 0.0

    def test_evidence_snippets(self, scorer):
        report = scorer.score("Serum lactate rose overnight.")
        snippets = report.evidence["explainability.feature_importance"]
        assert snippets == ["Serum lactate rose overnight."]

    def test_explanation_counts(self, scorer):
        alone = scorer.score("MORTALITY_PROBABILITY: 0.4")
        with_explanation = scorer.score("MORTALITY_PROBABILITY: 0.4", "Therefore the care team should watch lactate.")
        assert with_explanation.overall > alone.overall

    def test_convenience_function(self, rubric):
        text = "Because of lactate"
        assert score_transparency(text, "", rubric) == TransparencyScorer(rubric).score(text, "")


@settings(max_examples=500, deadline=None)
@given(
    base=st.text(max_size=200),
    extra=st.lists(
        st.sampled_from(["lactate", "because", "first", "then", "vital signs", "critical", "alternative"])
        | st.text(max_size=30),
        max_size=6,
    ),
)
def test_appending_text_never_lowers_score(base, extra):
    scorer = TransparencyScorer()
    before = scorer.score(base)
    after = scorer.score(base + " " + " ".join(extra))
    assert after.overall >= before.overall
    for old, new in zip(before.dimension_scores(), after.dimension_scores()):
        assert new.score >= old.score


def test_normalize_text():
    assert normalize_text("  a\n\tb   c ") == "a b c"
    assert normalize_text(None) == ""


# =============================================================================
# Rubric documents
# =============================================================================

class TestRubric:

    def test_default_has_every_dimension(self, rubric):
        for dimension in Dimension:
            criteria = rubric.criteria(dimension)
            assert criteria
            assert sum(c.weight for c in criteria) == pytest.approx(1.0)

    def test_custom_rubric(self, tmp_path):
        path = tmp_path / "rubric.json"
        path.write_text(json.dumps(rubric_document()))
        scorer = TransparencyScorer(load_rubric(path))
        report = scorer.score("explainability-marker shared")
        assert report.explainability.score == pytest.approx(75.0)
        assert report.traceability.score == pytest.approx(25.0)

    def test_weights_must_sum_to_one(self, tmp_path):
        path = tmp_path / "rubric.json"
        path.write_text(json.dumps(rubric_document(weight=0.7)))
        with pytest.raises(RubricError):
            load_rubric(path)

    def test_missing_dimension(self, tmp_path):
        document = rubric_document()
        del document["dimensions"]["traceability"]
        path = tmp_path / "rubric.json"
        path.write_text(json.dumps(document))
        with pytest.raises(RubricError):
            load_rubric(path)

    def test_unreadable(self, tmp_path):
        with pytest.raises(RubricError):
            load_rubric(tmp_path / "absent.json")
        bad = tmp_path / "bad.json"
        bad.write_text("{")
        with pytest.raises(RubricError):
            load_rubric(bad)
