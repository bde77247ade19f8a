"""ICU agent definitions: roles, prompts, few-shot exemplars and rendering"""

from agents.roles import AgentName, OutputContract, get_role_info
from agents.specs import AgentSpec, PromptSection, SectionSource, SectionTemplate
from agents.prompts import get_agent_spec, get_all_specs
from agents.budget import DEFAULT_TOKEN_BUDGET, truncate_to_budget
from agents.few_shot import FewShotExemplar, build_few_shot
from agents.rendering import (
    MissingDependencyError,
    PromptBudgetError,
    RenderedPrompt,
    format_reminder,
    render_prompt,
)

__all__ = [
    # Roles
    "AgentName",
    "OutputContract",
    "get_role_info",

    # Specs and prompts
    "AgentSpec",
    "PromptSection",
    "SectionSource",
    "SectionTemplate",
    "get_agent_spec",
    "get_all_specs",

    # Budget
    "DEFAULT_TOKEN_BUDGET",
    "truncate_to_budget",

    # Few-shot
    "FewShotExemplar",
    "build_few_shot",

    # Rendering
    "MissingDependencyError",
    "PromptBudgetError",
    "RenderedPrompt",
    "format_reminder",
    "render_prompt",
]
