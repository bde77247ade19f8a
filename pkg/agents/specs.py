"""
Agent Specifications
Immutable description of one agent: mission, prompt skeleton, output contract, model
"""

from enum import Enum
from typing import FrozenSet, List, Optional

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from agents.roles import AgentName, OutputContract


class SectionSource(str, Enum):
    """Where a prompt section's body comes from"""
    PATIENT = "patient"
    LABS = "labs"
    APACHE = "apache"
    VITALS = "vitals"
    RESPIRATORY = "respiratory"
    CARDIOVASCULAR = "cardiovascular"
    NOTES = "notes"
    MEDICATIONS = "medications"
    TIMELINE = "timeline"
    UPSTREAM = "upstream"
    EXEMPLARS = "exemplars"
    ACTUAL_OUTCOME = "actual_outcome"


class PromptSection(BaseModel):
    """A rendered section: heading line followed by body"""
    model_config = ConfigDict(frozen=True)

    heading: str = Field(min_length=1)
    body: str

    def render(self) -> str:
        return f"{self.heading}:\n{self.body}"


class SectionTemplate(BaseModel):
    """A section slot in an agent's prompt skeleton"""
    model_config = ConfigDict(frozen=True)

    heading: str = Field(min_length=1)
    source: SectionSource
    agents: List[str] = Field(default_factory=list)

    @field_validator("heading")
    @classmethod
    def _uppercase(cls, heading: str) -> str:
        heading = heading.strip()
        if not heading or heading != heading.upper():
            raise ValueError(f"section heading must be uppercase, got {heading!r}")
        return heading

    @model_validator(mode="after")
    def _upstream_needs_agents(self) -> "SectionTemplate":
        if self.source is SectionSource.UPSTREAM and not self.agents:
            raise ValueError(f"section {self.heading}: upstream source needs at least one agent")
        if self.source is not SectionSource.UPSTREAM and self.agents:
            raise ValueError(f"section {self.heading}: only upstream sections name agents")
        return self


class AgentSpec(BaseModel):
    """
    One agent's definition

    Features:
    - Mission sentence and ordered section skeleton
    - Output contract (free text, prediction or validation template)
    - Response headings for structured free-text answers
    - Per-agent model id
    """
    model_config = ConfigDict(frozen=True)

    name: str = Field(min_length=1)
    mission: str = Field(min_length=1)
    template: List[SectionTemplate] = Field(min_length=1)
    output_contract: OutputContract = OutputContract.FREE_TEXT
    response_headings: List[str] = Field(default_factory=list)
    model_id: str = "gpt-4o"

    @model_validator(mode="after")
    def _check_contract(self) -> "AgentSpec":
        if self.name in (AgentName.PREDICTION.value, AgentName.SAS_ALL_IN_ONE.value) \
                and self.output_contract is not OutputContract.PREDICTION_TEMPLATE:
            raise ValueError(f"{self.name} must use the prediction template")
        headings = [s.heading for s in self.template]
        if len(set(headings)) != len(headings):
            raise ValueError(f"{self.name}: duplicate section headings")
        return self

    @property
    def upstream_agents(self) -> FrozenSet[str]:
        return frozenset(a for s in self.template for a in s.agents)

    @property
    def uses_actual_outcome(self) -> bool:
        return any(s.source is SectionSource.ACTUAL_OUTCOME for s in self.template)

    def with_model(self, model_id: Optional[str]) -> "AgentSpec":
        return self if not model_id else self.model_copy(update={"model_id": model_id})
