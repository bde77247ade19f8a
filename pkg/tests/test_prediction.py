"""
Prediction contract parsing and validation feedback
"""

import pytest
from hypothesis import given, settings, strategies as st

from agents import AgentName, get_agent_spec
from agents.rendering import render_system_text
from ingestion.records import OutcomeStatus
from prediction import (
    Confidence,
    FormatError,
    MissingFieldError,
    PredictionOutcome,
    RangeError,
    ValidationFeedback,
    classify,
    parse_prediction,
    parse_validation,
    render_prediction,
    render_validation,
)
from provider import MockBackend, ProviderRequest

VALID = (
    "MORTALITY_PROBABILITY: 0.42\n"
    "PREDICTED_LOS_DAYS: 3.5\n"
    "CONFIDENCE: MEDIUM\n"
    "KEY_FACTORS: lactate; age; GCS"
)


def with_line(label: str, value: str) -> str:
    lines = [line if not line.startswith(label) else f"{label}: {value}" for line in VALID.splitlines()]
    return "\n".join(lines)


def test_parses_block_inside_prose():
    outcome = parse_prediction(f"Reasoning first.\n\n{VALID}\n\nSome closing words.")
    assert outcome.mortality_probability == 0.42
    assert outcome.predicted_los_days == 3.5
    assert outcome.confidence is Confidence.MEDIUM
    assert outcome.key_factors == ["lactate", "age", "GCS"]
    assert outcome.raw_text.startswith("Reasoning first.")


def test_tolerates_markdown_decoration():
    text = (
        "- **MORTALITY_PROBABILITY:** 0.9\n"
        "> PREDICTED_LOS_DAYS : 12\n"
        "* CONFIDENCE: high\n"
        "## KEY_FACTORS: shock"
    )
    outcome = parse_prediction(text)
    assert outcome.structured() == (0.9, 12.0, Confidence.HIGH, ("shock",))


def test_first_occurrence_wins():
    outcome = parse_prediction(f"{VALID}\nMORTALITY_PROBABILITY: 0.99")
    assert outcome.mortality_probability == 0.42


@pytest.mark.parametrize("label", [
    "MORTALITY_PROBABILITY", "PREDICTED_LOS_DAYS", "CONFIDENCE", "KEY_FACTORS",
])
def test_missing_field(label):
    text = "\n".join(line for line in VALID.splitlines() if not line.startswith(label))
    with pytest.raises(MissingFieldError) as exc_info:
        parse_prediction(text)
    assert exc_info.value.field == label


@pytest.mark.parametrize("label, value", [
    ("MORTALITY_PROBABILITY", "1.2"),
    ("MORTALITY_PROBABILITY", "-0.1"),
    ("PREDICTED_LOS_DAYS", "0"),
    ("PREDICTED_LOS_DAYS", "400"),
])
def test_out_of_range(label, value):
    with pytest.raises(RangeError):
        parse_prediction(with_line(label, value))


@pytest.mark.parametrize("label, value", [
    ("MORTALITY_PROBABILITY", "high"),
    ("MORTALITY_PROBABILITY", "42%"),
    ("PREDICTED_LOS_DAYS", "nan"),
    ("CONFIDENCE", "MAYBE"),
    ("KEY_FACTORS", " ; ; "),
])
def test_unparseable(label, value):
    with pytest.raises(FormatError):
        parse_prediction(with_line(label, value))


@settings(max_examples=200)
@given(
    probability=st.floats(min_value=0.0, max_value=1.0),
    los=st.floats(min_value=0.0, max_value=365.0, exclude_min=True),
    confidence=st.sampled_from(list(Confidence)),
    factors=st.lists(st.sampled_from(["age", "lactate", "GCS", "urine output", "SpO2"]),
                     min_size=1, max_size=4),
)
def test_render_then_parse_is_identity(probability, los, confidence, factors):
    outcome = PredictionOutcome(
        mortality_probability=probability,
        predicted_los_days=los,
        confidence=confidence,
        key_factors=factors,
    )
    assert parse_prediction(render_prediction(outcome)).structured() == outcome.structured()


def test_seeded_mock_responses_all_parse():
    backend = MockBackend(seed=3)
    system_text = render_system_text(get_agent_spec(AgentName.PREDICTION))
    for k in range(1000):
        mortality = (k % 97) / 100
        request = ProviderRequest(
            model_id="mock",
            system_text=system_text,
            user_text=f"APACHE predicted mortality: {mortality:.4f}\nAPACHE predicted LOS (days): {1 + k % 9}.00",
            seed=k,
        )
        parse_prediction(backend.respond(request))


def test_classify_threshold():
    assert classify(0.5) is OutcomeStatus.EXPIRED
    assert classify(0.4999) is OutcomeStatus.SURVIVED
    assert classify(0.3, threshold=0.25) is OutcomeStatus.EXPIRED
    with pytest.raises(ValueError):
        classify(0.5, threshold=1.0)
    with pytest.raises(ValueError):
        classify(1.5)


class TestValidationFeedback:

    def test_render_then_parse(self):
        feedback = ValidationFeedback(
            prediction_correct=False,
            los_error_days=2.25,
            key_variables=["lactate", "MAP"],
            improvements="Weigh vasopressor escalation.",
        )
        assert parse_validation(render_validation(feedback)) == feedback

    def test_lenient(self):
        feedback = parse_validation("PREDICTION_CORRECT: yes, broadly\nLOS_ERROR_DAYS: about two")
        assert feedback.prediction_correct is True
        assert feedback.los_error_days is None
        assert feedback.key_variables == []

    def test_no_block(self):
        assert parse_validation("I could not assess this case.") is None

    @pytest.mark.parametrize("raw", ["nan", "NaN", "inf", "-inf", "Infinity"])
    def test_non_finite_los_error_is_unknown(self, raw):
        feedback = parse_validation(
            f"PREDICTION_CORRECT: YES\nLOS_ERROR_DAYS: {raw}\nKEY_VARIABLES: lactate\nIMPROVEMENTS: none"
        )
        assert feedback.prediction_correct is True
        assert feedback.los_error_days is None
        assert feedback.key_variables == ["lactate"]
        assert ValidationFeedback.model_validate_json(feedback.model_dump_json()) == feedback

    def test_model_rejects_non_finite_los_error(self):
        with pytest.raises(ValueError):
            ValidationFeedback(los_error_days=float("inf"))
