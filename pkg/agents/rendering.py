"""
Prompt Rendering
Turns an AgentSpec plus patient features and upstream outputs into (system_text, user_text)
"""

from typing import Callable, Dict, List, Mapping, NamedTuple, Optional, Sequence

from loguru import logger

from agents.budget import DEFAULT_TOKEN_BUDGET, SUFFIX_ALLOWANCE, truncate_to_budget
from agents.few_shot import FewShotExemplar
from agents.formatting import (
    NONE_REPORTED,
    format_apache,
    format_cardiovascular,
    format_labs,
    format_medications,
    format_notes,
    format_outcome,
    format_respiratory,
    format_timeline,
    format_vitals,
    join_lines,
)
from agents.roles import AGENT_LINE_PREFIX, HEADING_SEPARATOR, HEADINGS_LINE_PREFIX, OutputContract
from agents.specs import AgentSpec, PromptSection, SectionSource, SectionTemplate
from ingestion.features import FeatureBundle
from ingestion.records import OutcomeLabel
from prediction.contract import render_prediction_contract
from prediction.validation import render_validation_contract
from provider.base import estimate_tokens

# Sections shrink in this order when a prompt is over budget; vitals and APACHE never do
TRUNCATION_ORDER = (
    SectionSource.NOTES,
    SectionSource.MEDICATIONS,
    SectionSource.LABS,
    SectionSource.UPSTREAM,
    SectionSource.EXEMPLARS,
)


class MissingDependencyError(KeyError):
    """An agent's prompt needs an upstream output that is not available"""

    def __init__(self, agent: str, missing: str):
        super().__init__(missing)
        self.agent = agent
        self.missing = missing

    def __str__(self) -> str:
        return f"{self.agent} needs upstream output '{self.missing}', which is not available"


class PromptBudgetError(ValueError):
    """Prompt cannot fit the budget even after truncation"""


class RenderedPrompt(NamedTuple):
    system_text: str
    user_text: str


def render_system_text(spec: AgentSpec) -> str:
    """Agent tag, mission and output instructions"""
    lines = [f"{AGENT_LINE_PREFIX} {spec.name}", f"MISSION: {spec.mission}"]
    if spec.output_contract is OutputContract.PREDICTION_TEMPLATE:
        lines += [
            "Write this block first, exactly one field per line:",
            render_prediction_contract(),
        ]
    elif spec.output_contract is OutputContract.VALIDATION_TEMPLATE:
        lines += [
            "Answer with this block, exactly one field per line:",
            render_validation_contract(),
        ]
    if spec.response_headings:
        lines += [
            f"{HEADINGS_LINE_PREFIX} {f' {HEADING_SEPARATOR} '.join(spec.response_headings)}",
            "Answer under each response heading in order, writing the heading followed by a colon.",
        ]
    return "\n".join(lines)


def format_reminder(spec: AgentSpec, error: str) -> str:
    """Appended to the user text when a response fails to parse"""
    contract = (
        render_validation_contract()
        if spec.output_contract is OutputContract.VALIDATION_TEMPLATE
        else render_prediction_contract()
    )
    return (
        f"FORMAT REMINDER:\nYour previous answer could not be parsed ({error}). "
        f"Answer again and include exactly this block, one field per line:\n{contract}"
    )


def _upstream_body(spec: AgentSpec, section: SectionTemplate, upstream: Mapping[str, str]) -> str:
    for agent in section.agents:
        if agent not in upstream:
            raise MissingDependencyError(spec.name, agent)
    if len(section.agents) == 1:
        return join_lines([upstream[section.agents[0]]])
    return join_lines(
        [f"[{agent.upper()}]\n{upstream[agent].strip() or NONE_REPORTED}" for agent in section.agents],
        separator="\n\n",
    )


def _section_body(
    spec: AgentSpec,
    section: SectionTemplate,
    features: FeatureBundle,
    upstream: Mapping[str, str],
    exemplars: Optional[Sequence[FewShotExemplar]],
    actual_outcome: Optional[OutcomeLabel]
) -> str:
    source = section.source
    sources: Dict[SectionSource, Callable[[], str]] = {
        SectionSource.PATIENT: lambda: features.demographics.describe(),
        SectionSource.LABS: lambda: join_lines(format_labs(features.distinct_labs)),
        SectionSource.APACHE: lambda: join_lines(format_apache(features.apache)),
        SectionSource.VITALS: lambda: join_lines(format_vitals(features.recent_vitals)),
        SectionSource.RESPIRATORY: lambda: join_lines(format_respiratory(features.recent_vitals)),
        SectionSource.CARDIOVASCULAR: lambda: join_lines(format_cardiovascular(features.recent_vitals)),
        SectionSource.NOTES: lambda: join_lines(format_notes(features.selected_notes), separator="\n\n"),
        SectionSource.MEDICATIONS: lambda: join_lines(format_medications(features.top_medications)),
        SectionSource.TIMELINE: lambda: join_lines(format_timeline(features)),
        SectionSource.EXEMPLARS: lambda: join_lines([e.render() for e in exemplars or ()], separator="\n\n"),
        SectionSource.ACTUAL_OUTCOME: lambda: (
            join_lines(format_outcome(actual_outcome)) if actual_outcome else NONE_REPORTED
        ),
        SectionSource.UPSTREAM: lambda: _upstream_body(spec, section, upstream),
    }
    return sources[source]()


def _join(sections: List[PromptSection]) -> str:
    return "\n\n".join(s.render() for s in sections)


def _fit_budget(spec: AgentSpec, system_text: str, sections: List[PromptSection],
                token_budget: int) -> List[PromptSection]:
    def overflow() -> int:
        return estimate_tokens(system_text) + estimate_tokens(_join(sections)) - token_budget

    for source in TRUNCATION_ORDER:
        for index, template in enumerate(spec.template):
            if template.source is not source:
                continue
            # Shrinking by the overflow may leave a one-token rounding gap
            for _ in range(3):
                excess = overflow()
                if excess <= 0:
                    return sections
                body = sections[index].body
                target = estimate_tokens(body) - excess - SUFFIX_ALLOWANCE - 1
                shrunk = truncate_to_budget(body, max(1, target))
                if shrunk == body:
                    break
                sections[index] = PromptSection(heading=sections[index].heading, body=shrunk)
                logger.debug(f"✂️ {spec.name}: truncated {sections[index].heading} to fit budget")

    if overflow() > 0:
        raise PromptBudgetError(
            f"{spec.name}: prompt exceeds {token_budget} tokens after truncation"
        )
    return sections


def render_prompt(
    spec: AgentSpec,
    features: FeatureBundle,
    upstream: Mapping[str, str],
    exemplars: Optional[Sequence[FewShotExemplar]] = None,
    actual_outcome: Optional[OutcomeLabel] = None,
    token_budget: int = DEFAULT_TOKEN_BUDGET
) -> RenderedPrompt:
    """
    Render one agent's prompt

    Args:
        spec: Agent specification
        features: Patient feature bundle
        upstream: Completed outputs of the agent's upstream nodes
        exemplars: Few-shot exemplars for EXAMPLE CASES sections
        actual_outcome: Only passed to agents with an ACTUAL OUTCOME section
        token_budget: Limit on estimated system + user tokens

    Returns:
        RenderedPrompt(system_text, user_text)

    Raises:
        MissingDependencyError: an upstream section's agent is absent
        PromptBudgetError: budget cannot be met without touching vitals or APACHE
    """
    system_text = render_system_text(spec)
    sections = [
        PromptSection(
            heading=template.heading,
            body=_section_body(spec, template, features, upstream, exemplars, actual_outcome),
        )
        for template in spec.template
    ]
    sections = _fit_budget(spec, system_text, sections, token_budget)
    return RenderedPrompt(system_text=system_text, user_text=_join(sections))
