"""
Agent Roles for the ICU Agent Pipeline
Defines the agent types, their responsibilities and output contracts
"""

from enum import Enum

# Markers written into system text so backends can tell agents apart
AGENT_LINE_PREFIX = "AGENT:"
HEADINGS_LINE_PREFIX = "RESPONSE HEADINGS:"
HEADING_SEPARATOR = "|"


class AgentName(str, Enum):
    """
    Available agents

    The first seven form the multi-agent graph:
    - LAB_ANALYSIS / VITALS_ANALYSIS / CONTEXT_ANALYSIS: independent analyses
    - INTEGRATION: fuses the three analyses
    - PREDICTION: mortality and LOS in the strict template
    - TRANSPARENCY: human-readable, traceable explanation
    - VALIDATION: critique against the actual outcome
    SAS_ALL_IN_ONE is the single-agent baseline.
    """
    LAB_ANALYSIS = "lab_analysis"
    VITALS_ANALYSIS = "vitals_analysis"
    CONTEXT_ANALYSIS = "context_analysis"
    INTEGRATION = "integration"
    PREDICTION = "prediction"
    TRANSPARENCY = "transparency"
    VALIDATION = "validation"
    SAS_ALL_IN_ONE = "sas_all_in_one"


class OutputContract(str, Enum):
    FREE_TEXT = "free_text"
    PREDICTION_TEMPLATE = "prediction_template"
    VALIDATION_TEMPLATE = "validation_template"


# Role display names and descriptions
ROLE_INFO = {
    AgentName.LAB_ANALYSIS: {
        "name": "Lab Analysis",
        "description": "Flags abnormal laboratory results",
        "emoji": "🧪"
    },
    AgentName.VITALS_ANALYSIS: {
        "name": "Vitals Analysis",
        "description": "Assesses physiological stability from vital signs",
        "emoji": "💓"
    },
    AgentName.CONTEXT_ANALYSIS: {
        "name": "Context Analysis",
        "description": "Reads clinical notes and medications",
        "emoji": "📋"
    },
    AgentName.INTEGRATION: {
        "name": "Integration",
        "description": "Fuses multimodal findings into one assessment",
        "emoji": "🔗"
    },
    AgentName.PREDICTION: {
        "name": "Prediction",
        "description": "Predicts ICU mortality and length of stay",
        "emoji": "🎯"
    },
    AgentName.TRANSPARENCY: {
        "name": "Transparency",
        "description": "Explains the prediction in traceable terms",
        "emoji": "🔍"
    },
    AgentName.VALIDATION: {
        "name": "Validation",
        "description": "Compares the prediction with the actual outcome",
        "emoji": "✅"
    },
    AgentName.SAS_ALL_IN_ONE: {
        "name": "Single Agent",
        "description": "Does every step in one completion",
        "emoji": "🤖"
    },
}


def get_role_info(name: str) -> dict:
    """Get information about an agent (custom agents get a generic entry)"""
    try:
        return ROLE_INFO[AgentName(name)]
    except ValueError:
        return {
            "name": name,
            "description": "Custom agent",
            "emoji": "🤖"
        }
