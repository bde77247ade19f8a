"""
Missions and Prompt Skeletons for the ICU Agents
Each agent has a mission, an ordered section skeleton and the headings it answers under
"""

from typing import Callable, Dict, List, Optional

from agents.roles import AgentName, OutputContract
from agents.specs import AgentSpec, SectionSource, SectionTemplate

DEFAULT_MODEL_ID = "gpt-4o"

LAB = AgentName.LAB_ANALYSIS.value
VITALS = AgentName.VITALS_ANALYSIS.value
CONTEXT = AgentName.CONTEXT_ANALYSIS.value
INTEGRATION = AgentName.INTEGRATION.value
PREDICTION = AgentName.PREDICTION.value
TRANSPARENCY = AgentName.TRANSPARENCY.value


def _section(heading: str, source: SectionSource, *agents: str) -> SectionTemplate:
    return SectionTemplate(heading=heading, source=source, agents=list(agents))


AGENT_MISSIONS: Dict[AgentName, str] = {
    AgentName.LAB_ANALYSIS: (
        "Identify abnormal laboratory results and relate them to the APACHE physiology of this ICU stay."
    ),
    AgentName.VITALS_ANALYSIS: (
        "Assess physiological stability from the most recent vital signs, with attention to "
        "respiratory and cardiovascular function."
    ),
    AgentName.CONTEXT_ANALYSIS: (
        "Extract diagnoses, risk factors and the clinical trajectory from the notes and medication history."
    ),
    AgentName.INTEGRATION: (
        "Fuse the lab, vitals and context analyses into a unified system-by-system assessment "
        "with ranked ICU risk priorities."
    ),
    AgentName.PREDICTION: (
        "Predict ICU mortality probability and ICU length of stay from the integrated assessment, "
        "using the example cases as reference points."
    ),
    AgentName.TRANSPARENCY: (
        "Explain the prediction for clinicians in traceable terms, naming the features that drove it "
        "and the data each one came from."
    ),
    AgentName.VALIDATION: (
        "Compare the prediction with the actual ICU outcome and critique its accuracy, "
        "the key variables behind it and how it could improve."
    ),
    AgentName.SAS_ALL_IN_ONE: (
        "Analyze all available patient data in a single pass, then predict ICU mortality probability "
        "and length of stay and explain the prediction."
    ),
}

AGENT_TEMPLATES: Dict[AgentName, List[SectionTemplate]] = {
    AgentName.LAB_ANALYSIS: [
        _section("PATIENT", SectionSource.PATIENT),
        _section("KEY ABNORMALITIES", SectionSource.LABS),
        _section("APACHE RELEVANT FINDINGS", SectionSource.APACHE),
    ],
    AgentName.VITALS_ANALYSIS: [
        _section("PATIENT", SectionSource.PATIENT),
        _section("PHYSIOLOGICAL STABILITY", SectionSource.VITALS),
        _section("RESPIRATORY FUNCTION", SectionSource.RESPIRATORY),
        _section("CARDIOVASCULAR PERFORMANCE", SectionSource.CARDIOVASCULAR),
    ],
    AgentName.CONTEXT_ANALYSIS: [
        _section("PATIENT", SectionSource.PATIENT),
        _section("DIAGNOSES", SectionSource.NOTES),
        _section("RISK FACTORS", SectionSource.MEDICATIONS),
        _section("TRAJECTORY", SectionSource.TIMELINE),
    ],
    AgentName.INTEGRATION: [
        _section("SYSTEM-BY-SYSTEM ASSESSMENT", SectionSource.UPSTREAM, LAB, VITALS, CONTEXT),
        _section("ICU RISK PRIORITIES", SectionSource.APACHE),
    ],
    AgentName.PREDICTION: [
        _section("EXAMPLE CASES", SectionSource.EXEMPLARS),
        _section("INTEGRATED ASSESSMENT", SectionSource.UPSTREAM, INTEGRATION),
        _section("APACHE RELEVANT FINDINGS", SectionSource.APACHE),
    ],
    AgentName.TRANSPARENCY: [
        _section("PREDICTION", SectionSource.UPSTREAM, PREDICTION),
        _section("INTEGRATED ASSESSMENT", SectionSource.UPSTREAM, INTEGRATION),
    ],
    AgentName.VALIDATION: [
        _section("PREDICTION", SectionSource.UPSTREAM, PREDICTION),
        _section("EXPLANATION", SectionSource.UPSTREAM, TRANSPARENCY),
        _section("ACTUAL OUTCOME", SectionSource.ACTUAL_OUTCOME),
    ],
    AgentName.SAS_ALL_IN_ONE: [
        _section("PATIENT", SectionSource.PATIENT),
        _section("EXAMPLE CASES", SectionSource.EXEMPLARS),
        _section("KEY ABNORMALITIES", SectionSource.LABS),
        _section("PHYSIOLOGICAL STABILITY", SectionSource.VITALS),
        _section("DIAGNOSES", SectionSource.NOTES),
        _section("RISK FACTORS", SectionSource.MEDICATIONS),
        _section("TRAJECTORY", SectionSource.TIMELINE),
        _section("APACHE RELEVANT FINDINGS", SectionSource.APACHE),
    ],
}

AGENT_CONTRACTS: Dict[AgentName, OutputContract] = {
    AgentName.PREDICTION: OutputContract.PREDICTION_TEMPLATE,
    AgentName.SAS_ALL_IN_ONE: OutputContract.PREDICTION_TEMPLATE,
    AgentName.VALIDATION: OutputContract.VALIDATION_TEMPLATE,
}

RESPONSE_HEADINGS: Dict[AgentName, List[str]] = {
    AgentName.LAB_ANALYSIS: ["KEY ABNORMALITIES", "APACHE RELEVANT FINDINGS"],
    AgentName.VITALS_ANALYSIS: ["PHYSIOLOGICAL STABILITY", "RESPIRATORY FUNCTION", "CARDIOVASCULAR PERFORMANCE"],
    AgentName.CONTEXT_ANALYSIS: ["DIAGNOSES", "RISK FACTORS", "TRAJECTORY"],
    AgentName.INTEGRATION: ["SYSTEM-BY-SYSTEM ASSESSMENT", "ICU RISK PRIORITIES"],
    AgentName.TRANSPARENCY: ["FEATURE IMPORTANCE", "REASONING", "DATA PROVENANCE"],
    AgentName.SAS_ALL_IN_ONE: ["EXPLANATION"],
}


def get_agent_spec(name: AgentName, model_id: Optional[str] = None) -> AgentSpec:
    """Built-in spec for one agent"""
    return AgentSpec(
        name=name.value,
        mission=AGENT_MISSIONS[name],
        template=AGENT_TEMPLATES[name],
        output_contract=AGENT_CONTRACTS.get(name, OutputContract.FREE_TEXT),
        response_headings=RESPONSE_HEADINGS.get(name, []),
        model_id=model_id or DEFAULT_MODEL_ID,
    )


def get_all_specs(model_for: Optional[Callable[[str], str]] = None) -> Dict[str, AgentSpec]:
    """Built-in specs for every agent, keyed by name"""
    return {
        name.value: get_agent_spec(name, model_for(name.value) if model_for else None)
        for name in AgentName
    }
