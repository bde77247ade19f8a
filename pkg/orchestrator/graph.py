"""
Pipeline Graphs
Task nodes, DAG validation and the built-in multi-agent / single-agent graphs
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from graphlib import CycleError as _GraphlibCycleError
from graphlib import TopologicalSorter
from pathlib import Path
from typing import Callable, Dict, FrozenSet, List, Optional, Sequence, Tuple, Union

from loguru import logger
from pydantic import BaseModel, Field, ValidationError

from agents.prompts import get_agent_spec
from agents.roles import AgentName, OutputContract
from agents.specs import AgentSpec, SectionTemplate


class GraphLabel(str, Enum):
    MAS = "MAS"
    SAS = "SAS"
    CUSTOM = "custom"


class GraphValidationError(ValueError):
    """Graph is not a valid, executable DAG"""


class CycleError(GraphValidationError):
    def __init__(self, cycle: Sequence[str]):
        self.cycle = list(cycle)
        super().__init__(f"cycle detected: {' -> '.join(self.cycle)}")


class UnknownDependencyError(GraphValidationError):
    def __init__(self, node_id: str, dependency: str):
        self.node_id = node_id
        self.dependency = dependency
        super().__init__(f"node {node_id} depends on unknown node {dependency}")


class DuplicateNodeError(GraphValidationError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"node {node_id} is defined more than once")


class SelfDependencyError(GraphValidationError):
    def __init__(self, node_id: str):
        self.node_id = node_id
        super().__init__(f"node {node_id} depends on itself")


class TerminalNodeError(GraphValidationError):
    """MAS/SAS graphs must end in exactly one node"""


class LabelLeakError(GraphValidationError):
    """A node that sees the actual outcome feeds a prediction"""


@dataclass(frozen=True)
class TaskNode:
    id: str
    depends_on: FrozenSet[str] = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "depends_on", frozenset(self.depends_on))


@dataclass(frozen=True)
class PipelineGraph:
    """
    Agent DAG plus the specs of its agents

    Nodes keep their declaration order; specs are keyed by node id and may be
    empty for bare graphs used in scheduling tests.
    """
    nodes: Tuple[TaskNode, ...]
    label: GraphLabel = GraphLabel.CUSTOM
    specs: Dict[str, AgentSpec] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "nodes", tuple(self.nodes))

    @property
    def node_ids(self) -> List[str]:
        return [node.id for node in self.nodes]

    @property
    def edge_count(self) -> int:
        return sum(len(node.depends_on) for node in self.nodes)

    def node(self, node_id: str) -> TaskNode:
        for node in self.nodes:
            if node.id == node_id:
                return node
        raise KeyError(node_id)

    def dependents(self, node_id: str) -> List[str]:
        return [node.id for node in self.nodes if node_id in node.depends_on]

    def terminal_nodes(self) -> List[str]:
        return [node.id for node in self.nodes if not self.dependents(node.id)]

    def ancestors(self, node_id: str) -> FrozenSet[str]:
        """Every node reachable by following dependencies from node_id"""
        deps = {node.id: node.depends_on for node in self.nodes}
        seen = set()
        stack = list(deps.get(node_id, ()))
        while stack:
            current = stack.pop()
            if current in seen:
                continue
            seen.add(current)
            stack.extend(deps.get(current, ()))
        return frozenset(seen)


def _check_specs(graph: PipelineGraph) -> None:
    prediction_nodes = {
        node_id for node_id, spec in graph.specs.items()
        if spec.output_contract is OutputContract.PREDICTION_TEMPLATE
    }
    for node in graph.nodes:
        spec = graph.specs.get(node.id)
        if spec is None:
            continue
        ancestors = graph.ancestors(node.id)
        for agent in sorted(spec.upstream_agents):
            if agent not in ancestors:
                raise GraphValidationError(
                    f"node {node.id} reads the output of {agent}, which is not upstream of it"
                )
        if spec.uses_actual_outcome:
            if node.id in prediction_nodes:
                raise LabelLeakError(f"prediction node {node.id} must not see the actual outcome")
            fed = sorted(p for p in prediction_nodes if node.id in graph.ancestors(p))
            if fed:
                raise LabelLeakError(
                    f"node {node.id} sees the actual outcome and feeds prediction node {fed[0]}"
                )


def validate_dag(graph: PipelineGraph) -> List[List[str]]:
    """
    Validate a graph and return its layered topological order

    Layer k holds the nodes whose dependencies all lie in layers < k; ids within
    a layer are sorted.

    Args:
        graph: Graph to validate

    Returns:
        Ordered layers of node ids

    Raises:
        GraphValidationError: empty graph or spec wiring problems
        DuplicateNodeError / SelfDependencyError / UnknownDependencyError
        CycleError: carries one cycle
        TerminalNodeError: MAS/SAS graph without exactly one terminal node
        LabelLeakError: actual outcome reachable by a prediction node
    """
    if not graph.nodes:
        raise GraphValidationError("graph has no nodes")

    seen = set()
    for node in graph.nodes:
        if node.id in seen:
            raise DuplicateNodeError(node.id)
        seen.add(node.id)

    for node in graph.nodes:
        if node.id in node.depends_on:
            raise SelfDependencyError(node.id)
        for dependency in sorted(node.depends_on):
            if dependency not in seen:
                raise UnknownDependencyError(node.id, dependency)

    sorter = TopologicalSorter({node.id: node.depends_on for node in graph.nodes})
    try:
        sorter.prepare()
    except _GraphlibCycleError as e:
        raise CycleError(e.args[1]) from e

    layers = []
    while sorter.is_active():
        ready = sorted(sorter.get_ready())
        layers.append(ready)
        sorter.done(*ready)

    if graph.label in (GraphLabel.MAS, GraphLabel.SAS):
        terminals = graph.terminal_nodes()
        if len(terminals) != 1:
            raise TerminalNodeError(
                f"{graph.label.value} graph must have exactly one terminal node, found {terminals}"
            )

    _check_specs(graph)
    return layers


# Dependencies of the multi-agent graph
MAS_DEPENDENCIES: Dict[AgentName, Tuple[AgentName, ...]] = {
    AgentName.LAB_ANALYSIS: (),
    AgentName.VITALS_ANALYSIS: (),
    AgentName.CONTEXT_ANALYSIS: (),
    AgentName.INTEGRATION: (AgentName.LAB_ANALYSIS, AgentName.VITALS_ANALYSIS, AgentName.CONTEXT_ANALYSIS),
    AgentName.PREDICTION: (AgentName.INTEGRATION,),
    AgentName.TRANSPARENCY: (AgentName.PREDICTION,),
    AgentName.VALIDATION: (AgentName.TRANSPARENCY,),
}


def _build(label: GraphLabel, dependencies: Dict[AgentName, Tuple[AgentName, ...]],
           model_for: Optional[Callable[[str], str]]) -> PipelineGraph:
    nodes = []
    specs = {}
    for name, deps in dependencies.items():
        nodes.append(TaskNode(id=name.value, depends_on=frozenset(d.value for d in deps)))
        specs[name.value] = get_agent_spec(name, model_for(name.value) if model_for else None)
    return PipelineGraph(nodes=tuple(nodes), label=label, specs=specs)


def build_mas_graph(model_for: Optional[Callable[[str], str]] = None) -> PipelineGraph:
    """The seven-agent graph: three analyses -> integration -> prediction -> transparency -> validation"""
    return _build(GraphLabel.MAS, MAS_DEPENDENCIES, model_for)


def build_sas_graph(model_for: Optional[Callable[[str], str]] = None) -> PipelineGraph:
    """The single all-in-one agent"""
    return _build(GraphLabel.SAS, {AgentName.SAS_ALL_IN_ONE: ()}, model_for)


# =============================================================================
# Declarative graph documents
# =============================================================================

class AgentDocumentEntry(BaseModel):
    """One agent in a graph document"""
    name: str = Field(min_length=1)
    mission: str = Field(min_length=1)
    template: List[SectionTemplate] = Field(min_length=1)
    output_contract: OutputContract = OutputContract.FREE_TEXT
    response_headings: List[str] = Field(default_factory=list)
    model_id: Optional[str] = None
    depends_on: List[str] = Field(default_factory=list)


class GraphDocument(BaseModel):
    label: GraphLabel = GraphLabel.CUSTOM
    agents: List[AgentDocumentEntry] = Field(min_length=1)


def graph_from_document(document: GraphDocument,
                        model_for: Optional[Callable[[str], str]] = None) -> PipelineGraph:
    """
    Build a graph and its agent specs from a document

    A model id in the document wins over model_for; model_for wins over the default.

    Raises:
        GraphValidationError: an entry does not form a valid agent spec
    """
    nodes = []
    specs = {}
    for entry in document.agents:
        try:
            spec = AgentSpec(
                name=entry.name,
                mission=entry.mission,
                template=entry.template,
                output_contract=entry.output_contract,
                response_headings=entry.response_headings,
            )
        except ValidationError as e:
            raise GraphValidationError(f"agent {entry.name}: {e}") from e
        model_id = entry.model_id or (model_for(entry.name) if model_for else None)
        specs[entry.name] = spec.with_model(model_id)
        nodes.append(TaskNode(id=entry.name, depends_on=frozenset(entry.depends_on)))
    return PipelineGraph(nodes=tuple(nodes), label=document.label, specs=specs)


def document_from_graph(graph: PipelineGraph) -> GraphDocument:
    """Inverse of graph_from_document for graphs whose nodes all have specs"""
    agents = []
    for node in graph.nodes:
        spec = graph.specs[node.id]
        agents.append(AgentDocumentEntry(
            name=spec.name,
            mission=spec.mission,
            template=spec.template,
            output_contract=spec.output_contract,
            response_headings=spec.response_headings,
            model_id=spec.model_id,
            depends_on=sorted(node.depends_on),
        ))
    return GraphDocument(label=graph.label, agents=agents)


def load_graph_document(path: Union[str, Path]) -> GraphDocument:
    """
    Read a graph document from JSON

    Raises:
        GraphValidationError: unreadable file or invalid document
    """
    try:
        data = json.loads(Path(path).read_text())
        document = GraphDocument.model_validate(data)
    except (OSError, json.JSONDecodeError, ValidationError) as e:
        raise GraphValidationError(f"Cannot load graph document {path}: {e}") from e
    logger.info(f"🧩 Loaded graph document {path} ({len(document.agents)} agents)")
    return document


def save_graph_document(graph: PipelineGraph, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(document_from_graph(graph).model_dump_json(indent=2))
    return path


def graph_for(label: str, graph_file: Optional[str] = None,
              model_for: Optional[Callable[[str], str]] = None) -> PipelineGraph:
    """Built-in graph by label, or the graph described by graph_file"""
    if graph_file:
        return graph_from_document(load_graph_document(graph_file), model_for)
    if label.lower() == "mas":
        return build_mas_graph(model_for)
    if label.lower() == "sas":
        return build_sas_graph(model_for)
    raise GraphValidationError(f"unknown graph label {label!r}")

