"""Agent graph validation, execution and run persistence"""

from orchestrator.graph import (
    AgentDocumentEntry,
    CycleError,
    DuplicateNodeError,
    GraphDocument,
    GraphLabel,
    GraphValidationError,
    LabelLeakError,
    PipelineGraph,
    SelfDependencyError,
    TaskNode,
    TerminalNodeError,
    UnknownDependencyError,
    build_mas_graph,
    build_sas_graph,
    graph_for,
    graph_from_document,
    load_graph_document,
    save_graph_document,
    validate_dag,
)
from orchestrator.memory import MemoryEntry, SharedMemory, WriteOnceViolation
from orchestrator.scheduler import DagScheduler, NodeExecutionError, NodeTiming
from orchestrator.run_record import (
    ActualOutcome,
    BatchSummary,
    RunRecord,
    RunStatus,
    RunStore,
    TaskEntry,
    new_run_id,
)
from orchestrator.executor import BatchResult, PipelineExecutor, execute, run_batch

__all__ = [
    # Graph
    "AgentDocumentEntry",
    "CycleError",
    "DuplicateNodeError",
    "GraphDocument",
    "GraphLabel",
    "GraphValidationError",
    "LabelLeakError",
    "PipelineGraph",
    "SelfDependencyError",
    "TaskNode",
    "TerminalNodeError",
    "UnknownDependencyError",
    "build_mas_graph",
    "build_sas_graph",
    "graph_for",
    "graph_from_document",
    "load_graph_document",
    "save_graph_document",
    "validate_dag",

    # Memory and scheduling
    "MemoryEntry",
    "SharedMemory",
    "WriteOnceViolation",
    "DagScheduler",
    "NodeExecutionError",
    "NodeTiming",

    # Records
    "ActualOutcome",
    "BatchSummary",
    "RunRecord",
    "RunStatus",
    "RunStore",
    "TaskEntry",
    "new_run_id",

    # Execution
    "BatchResult",
    "PipelineExecutor",
    "execute",
    "run_batch",
]
