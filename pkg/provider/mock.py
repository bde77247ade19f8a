"""
Deterministic Mock Backend

Fills each agent's output contract offline. Every response is a pure function
of (seed, request): the generator is seeded from a SHA-256 digest of the seed,
model id, system text and user text.

Prediction values follow the APACHE predicted mortality and LOS found in the
prompt plus seeded noise. The all-in-one agent gets wider noise than the
multi-agent prediction node; both widths are tuning constants for offline
harness tests, not estimates of real model behaviour.
"""

import hashlib
import re
from collections import defaultdict
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from agents.roles import AGENT_LINE_PREFIX, HEADINGS_LINE_PREFIX, HEADING_SEPARATOR, AgentName
from ingestion.records import OutcomeStatus
from prediction.contract import (
    Confidence,
    PredictionOutcome,
    classify,
    render_prediction,
    render_prediction_contract,
)
from prediction.parser import PredictionParseError, parse_prediction
from prediction.validation import ValidationFeedback, render_validation, render_validation_contract
from provider.base import (
    FatalProviderError,
    ModelBackend,
    ProviderRequest,
    ProviderResponse,
    TransientProviderError,
)

APACHE_MORTALITY_RE = re.compile(r"APACHE predicted mortality:\s*([0-9]*\.?[0-9]+)")
APACHE_LOS_RE = re.compile(r"APACHE predicted LOS \(days\):\s*([0-9]*\.?[0-9]+)")
ACTUAL_STATUS_RE = re.compile(r"^Outcome:\s*(expired|survived)", re.IGNORECASE | re.MULTILINE)
ACTUAL_LOS_RE = re.compile(r"ICU length of stay \(days\):\s*([0-9]*\.?[0-9]+)")
AGENT_RE = re.compile(rf"^{re.escape(AGENT_LINE_PREFIX)}\s*(\S+)", re.MULTILINE)
HEADINGS_RE = re.compile(rf"^{re.escape(HEADINGS_LINE_PREFIX)}\s*(.+)$", re.MULTILINE)

# (mortality sd, log-LOS sd)
MAS_NOISE = (0.08, 0.25)
SAS_NOISE = (0.14, 0.45)

_FACTORS = [
    "age", "lactate", "creatinine", "intubation status", "systolic blood pressure",
    "heart rate", "GCS", "urine output", "WBC", "SpO2", "bicarbonate", "vasopressor use",
]

_FINDINGS = [
    "Values trend toward instability over the most recent observations.",
    "No single measurement is alarming in isolation, but the pattern is concerning.",
    "Findings are broadly within expected ranges for an ICU admission.",
    "Renal markers are elevated relative to baseline.",
    "Hemodynamics required close monitoring during the window reviewed.",
    "Oxygenation is maintained with supplemental support.",
    "Inflammatory markers suggest an ongoing systemic response.",
    "Documentation describes a gradually evolving clinical course.",
]

# Sentences carrying transparency markers, grouped by the response heading they belong to
_EXPLANATION_BANK: Dict[str, List[str]] = {
    "FEATURE IMPORTANCE": [
        "Elevated lactate is a contributing factor to the estimate.",
        "Age is the most important demographic feature for this patient.",
        "Renal function is a key factor in the assessment.",
        "Hypotension is the primary driver of short-term risk.",
        "The critical findings concentrate in the cardiovascular system.",
        "Respiratory failure is the dominant concern and marks the highest risk.",
        "Risk is elevated because perfusion markers worsened; therefore close follow-up is advised.",
        "The rising creatinine indicates kidney injury due to hypoperfusion.",
        "For the clinician and the care team, the summary is given in plain language.",
        "The family should be told the outlook is guarded.",
    ],
    "REASONING": [
        "The assessment proceeded step by step: first the labs, then the vitals, finally the notes.",
        "The estimate is consistent with the APACHE reference and aligns with the expected course.",
        "The reasoning is simple and straightforward for most systems.",
        "Several interacting organ dysfunctions make the picture complex.",
        "An alternative scenario is recovery if the patient responds to therapy; otherwise risk rises.",
    ],
    "DATA PROVENANCE": [
        "Each data source is named: vital signs, laboratory results and clinical notes.",
        "Values are derived from the most recent measurements, aggregated per lab as the latest sample.",
        "Few-shot example cases and a fixed template guided the output; model version is recorded.",
        "The decision uses a probability threshold on the integrated assessment and is validated afterwards.",
    ],
}

_IMPROVEMENTS = [
    "Include trend features for lactate and creatinine.",
    "Weight recent vital signs more heavily than admission values.",
    "Incorporate medication escalation as an explicit risk signal.",
    "Calibrate length-of-stay estimates against unit-level averages.",
]


def request_digest(seed: int, request: ProviderRequest) -> int:
    payload = "\x1f".join([
        str(seed), str(request.seed), request.model_id, request.system_text, request.user_text,
    ])
    return int(hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16], 16)


def agent_of(request: ProviderRequest) -> Optional[str]:
    match = AGENT_RE.search(request.system_text)
    return match.group(1) if match else None


def headings_of(request: ProviderRequest) -> List[str]:
    match = HEADINGS_RE.search(request.system_text)
    if not match:
        return []
    return [h.strip() for h in match.group(1).split(HEADING_SEPARATOR) if h.strip()]


def _last_float(pattern: re.Pattern, text: str) -> Optional[float]:
    matches = pattern.findall(text)
    return float(matches[-1]) if matches else None


class MockBackend(ModelBackend):
    """
    Seeded offline backend

    Features:
    - Prediction template for prediction-template agents
    - Validation template for the validation agent
    - Heading-structured free text for analysis agents
    - Transparency markers for explanation text
    - Stateless after construction
    """

    name = "mock"

    def __init__(
        self,
        seed: int = 0,
        mas_noise: Tuple[float, float] = MAS_NOISE,
        sas_noise: Tuple[float, float] = SAS_NOISE,
        explanation_rate: float = 0.8
    ):
        self.seed = seed
        self.mas_noise = mas_noise
        self.sas_noise = sas_noise
        self.explanation_rate = explanation_rate

    async def complete(self, request: ProviderRequest) -> ProviderResponse:
        return ProviderResponse.from_text(request, self.respond(request))

    def respond(self, request: ProviderRequest) -> str:
        """Synchronous core of complete()"""
        rng = np.random.default_rng(request_digest(self.seed, request))
        agent = agent_of(request)
        headings = headings_of(request)

        if render_validation_contract() in request.system_text:
            return self._validation(rng, request)
        if render_prediction_contract() in request.system_text:
            noise = self.sas_noise if agent == AgentName.SAS_ALL_IN_ONE.value else self.mas_noise
            text = self._prediction(rng, request, noise)
            if headings:
                text = f"{text}\n\n{self._explanation(rng, headings)}"
            return text
        if agent == AgentName.TRANSPARENCY.value:
            return self._explanation(rng, headings or list(_EXPLANATION_BANK))
        return self._free_text(rng, headings or ["ASSESSMENT"])

    def _prediction(self, rng: np.random.Generator, request: ProviderRequest,
                    noise: Tuple[float, float]) -> str:
        mortality_sd, los_sd = noise
        apache_mortality = _last_float(APACHE_MORTALITY_RE, request.user_text)
        apache_los = _last_float(APACHE_LOS_RE, request.user_text)

        if apache_mortality is None:
            probability = float(rng.uniform(0.05, 0.95))
        else:
            probability = apache_mortality + float(rng.normal(0.0, mortality_sd))
        probability = round(float(np.clip(probability, 0.01, 0.99)), 2)

        base_los = apache_los if apache_los and apache_los > 0 else 4.0
        los = round(float(np.clip(base_los * np.exp(rng.normal(0.0, los_sd)), 0.5, 365.0)), 1)

        distance = abs(probability - 0.5)
        confidence = Confidence.HIGH if distance > 0.3 else Confidence.MEDIUM if distance > 0.15 else Confidence.LOW
        picks = rng.choice(len(_FACTORS), size=3, replace=False)
        factors = [_FACTORS[i] for i in sorted(picks)]

        outcome = PredictionOutcome(
            mortality_probability=probability,
            predicted_los_days=los,
            confidence=confidence,
            key_factors=factors,
        )
        lead = f"Risk is driven mainly by {factors[0]} and {factors[1]}."
        return f"{lead}\n\n{render_prediction(outcome)}"

    def _explanation(self, rng: np.random.Generator, headings: Sequence[str]) -> str:
        # Spread the bank's groups over whatever headings were requested, in order
        groups = list(_EXPLANATION_BANK.values())
        everything = [sentence for group in groups for sentence in group]
        blocks = []
        for index, heading in enumerate(headings):
            if heading in _EXPLANATION_BANK:
                source = _EXPLANATION_BANK[heading]
            elif len(headings) == 1:
                source = everything
            else:
                source = groups[index % len(groups)]
            kept = [s for s in source if rng.random() < self.explanation_rate]
            if not kept:
                kept = [source[int(rng.integers(len(source)))]]
            blocks.append(f"{heading}:\n" + " ".join(kept))
        return "\n\n".join(blocks)

    def _free_text(self, rng: np.random.Generator, headings: Sequence[str]) -> str:
        blocks = []
        for heading in headings:
            picks = rng.choice(len(_FINDINGS), size=2, replace=False)
            blocks.append(f"{heading}:\n" + " ".join(_FINDINGS[i] for i in picks))
        return "\n\n".join(blocks)

    def _validation(self, rng: np.random.Generator, request: ProviderRequest) -> str:
        status_match = ACTUAL_STATUS_RE.search(request.user_text)
        actual_los = _last_float(ACTUAL_LOS_RE, request.user_text)
        try:
            predicted = parse_prediction(request.user_text)
        except PredictionParseError:
            predicted = None

        if predicted is None or status_match is None:
            feedback = ValidationFeedback(improvements="Provide a complete prediction block.")
            return f"The prediction could not be assessed.\n\n{render_validation(feedback)}"

        actual_status = OutcomeStatus(status_match.group(1).lower())
        correct = classify(predicted.mortality_probability) is actual_status
        feedback = ValidationFeedback(
            prediction_correct=correct,
            los_error_days=None if actual_los is None else abs(predicted.predicted_los_days - actual_los),
            key_variables=predicted.key_factors,
            improvements=_IMPROVEMENTS[int(rng.integers(len(_IMPROVEMENTS)))],
        )
        verdict = "matches" if correct else "does not match"
        return f"The predicted outcome {verdict} the recorded outcome.\n\n{render_validation(feedback)}"


@dataclass(frozen=True)
class FaultRule:
    """
    Which requests fail and how

    agent / match_text narrow the rule (None matches anything). Each distinct
    request fails transiently `transient_failures` times before passing
    through, or always fails fatally when `fatal` is set.
    """
    agent: Optional[str] = None
    match_text: Optional[str] = None
    transient_failures: int = 0
    fatal: bool = False

    def matches(self, request: ProviderRequest) -> bool:
        if self.agent is not None and agent_of(request) != self.agent:
            return False
        if self.match_text is not None and self.match_text not in request.user_text:
            return False
        return True


class ScriptedFaultBackend(ModelBackend):
    """Wraps a backend and injects failures from a fault schedule"""

    name = "scripted"

    def __init__(self, inner: ModelBackend, rules: Sequence[FaultRule]):
        self.inner = inner
        self.rules = list(rules)
        self._failures: Dict[Tuple[int, int], int] = defaultdict(int)
        self.calls = 0

    async def complete(self, request: ProviderRequest) -> ProviderResponse:
        self.calls += 1
        for index, rule in enumerate(self.rules):
            if not rule.matches(request):
                continue
            if rule.fatal:
                raise FatalProviderError(f"scripted fatal fault for {agent_of(request)}")
            key = (index, request_digest(0, request))
            if self._failures[key] < rule.transient_failures:
                self._failures[key] += 1
                raise TransientProviderError(
                    f"scripted transient fault {self._failures[key]}/{rule.transient_failures}"
                )
            break
        return await self.inner.complete(request)

    async def close(self) -> None:
        await self.inner.close()
