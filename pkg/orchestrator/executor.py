"""
Pipeline Executor
Runs an agent graph for one patient and for whole cohorts
"""

import asyncio
import time
from dataclasses import dataclass, field, replace
from datetime import datetime
from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

from loguru import logger

from agents.few_shot import FewShotExemplar
from agents.rendering import RenderedPrompt, format_reminder, render_prompt
from agents.roles import OutputContract, get_role_info
from agents.specs import AgentSpec
from config.logging_config import log_function_call, pipeline_logger
from ingestion.features import FeatureBundle, extract_features
from ingestion.records import PatientRecord
from orchestrator.graph import GraphValidationError, PipelineGraph, validate_dag
from orchestrator.memory import MemoryEntry, SharedMemory, WriteOnceViolation
from orchestrator.run_record import (
    ActualOutcome,
    BatchSummary,
    RunRecord,
    RunStatus,
    RunStore,
    TaskEntry,
    new_run_id,
    utc_now,
)
from orchestrator.scheduler import DagScheduler, NodeExecutionError
from prediction.contract import PredictionOutcome
from prediction.parser import PredictionParseError, parse_prediction
from prediction.validation import ValidationFeedback, parse_validation
from provider.base import ModelBackend, ProviderRequest, estimate_tokens
from provider.retry import RetryPolicy, SleepFunc, with_retries
from transparency.scorer import TransparencyScorer


class BatchResult(NamedTuple):
    records: List[RunRecord]
    summary: BatchSummary


@dataclass
class _RunContext:
    """Mutable state of one patient's run; never shared between patients"""
    patient: PatientRecord
    features: FeatureBundle
    seed: int
    memory: SharedMemory = field(default_factory=SharedMemory)
    entries: Dict[str, TaskEntry] = field(default_factory=dict)
    prediction: Optional[PredictionOutcome] = None


class PipelineExecutor:
    """
    Executes a validated agent graph

    Features:
    - Layered fan-out/fan-in over the graph's DAG
    - Retries with backoff on every model call
    - One format-reminder re-ask when a prediction does not parse
    - Actual outcome shown only to agents whose template asks for it
    - Partial records for failed runs
    - Bounded cohort parallelism with peak in-flight tracking
    """

    def __init__(
        self,
        graph: PipelineGraph,
        backend: ModelBackend,
        policy: Optional[RetryPolicy] = None,
        exemplars: Optional[Sequence[FewShotExemplar]] = None,
        token_budget: int = 10_000,
        scorer: Optional[TransparencyScorer] = None,
        temperature: float = 0.0,
        max_output_tokens: int = 1024,
        store: Optional[RunStore] = None,
        sleep: Optional[SleepFunc] = None
    ):
        """
        Args:
            graph: Graph to run; validated here
            backend: Model backend shared by every node
            policy: Retry policy (defaults to RetryPolicy())
            exemplars: Few-shot exemplars for EXAMPLE CASES sections
            token_budget: Per-prompt token limit
            scorer: Transparency scorer (default rubric if None)
            temperature: Sampling temperature for every request
            max_output_tokens: Output limit for every request
            store: Where records are persisted (None keeps them in memory)
            sleep: Backoff sleep override for tests

        Raises:
            GraphValidationError: invalid graph or a node without an agent spec
        """
        self.layers = validate_dag(graph)
        missing = [node_id for node_id in graph.node_ids if node_id not in graph.specs]
        if missing:
            raise GraphValidationError(f"no agent spec for nodes {missing}")

        self.graph = graph
        self.backend = backend
        self.policy = policy or RetryPolicy()
        self.exemplars = list(exemplars or [])
        self.token_budget = token_budget
        self.scorer = scorer or TransparencyScorer()
        self.temperature = temperature
        self.max_output_tokens = max_output_tokens
        self.store = store
        self.sleep = sleep

        self.order = [node_id for layer in self.layers for node_id in layer]
        self.ancestors = {node_id: graph.ancestors(node_id) for node_id in self.order}
        self.prediction_node = self._find_prediction_node()
        self.explanation_nodes = self._find_explanation_nodes()

        self.in_flight = 0
        self.peak_in_flight = 0

    @property
    def label(self) -> str:
        return self.graph.label.value

    def _find_prediction_node(self) -> Optional[str]:
        # Last prediction-template node in topological order
        candidates = [
            node_id for node_id in self.order
            if self.graph.specs[node_id].output_contract is OutputContract.PREDICTION_TEMPLATE
        ]
        return candidates[-1] if candidates else None

    def _find_explanation_nodes(self) -> List[str]:
        """Free-text nodes downstream of the prediction node"""
        if self.prediction_node is None:
            return []
        return [
            node_id for node_id in self.order
            if self.prediction_node in self.ancestors[node_id]
            and self.graph.specs[node_id].output_contract is OutputContract.FREE_TEXT
        ]

    def _request(self, spec: AgentSpec, system_text: str, user_text: str, seed: int) -> ProviderRequest:
        return ProviderRequest(
            model_id=spec.model_id,
            system_text=system_text,
            user_text=user_text,
            max_output_tokens=self.max_output_tokens,
            temperature=self.temperature,
            seed=seed,
        )

    def _render(self, spec: AgentSpec, node_id: str, ctx: _RunContext, token_budget: int) -> RenderedPrompt:
        return render_prompt(
            spec,
            ctx.features,
            ctx.memory.texts(self.ancestors[node_id]),
            exemplars=self.exemplars,
            actual_outcome=ctx.patient.outcome if spec.uses_actual_outcome else None,
            token_budget=token_budget,
        )

    async def _run_node(self, node_id: str, ctx: _RunContext, scheduler: DagScheduler) -> str:
        spec = self.graph.specs[node_id]
        stay_id = ctx.patient.stay_id
        role = get_role_info(node_id)
        pipeline_logger.log_node_started(stay_id, node_id, f"{role['emoji']} {role['name']}")
        started = scheduler.timings[node_id].started_offset
        clock_start = time.perf_counter()

        prompt = self._render(spec, node_id, ctx, self.token_budget)
        request = self._request(spec, prompt.system_text, prompt.user_text, ctx.seed)
        response = await with_retries(self.backend, request, self.policy, self.sleep)
        attempts = response.attempts_used
        text = response.text
        reask_user_text = None

        if spec.output_contract is OutputContract.PREDICTION_TEMPLATE:
            try:
                outcome = parse_prediction(text)
            except PredictionParseError as e:
                pipeline_logger.log_format_reask(stay_id, node_id, str(e))
                # The reminder's tokens come out of the same budget
                reminder = f"\n\n{format_reminder(spec, str(e))}"
                refit = self._render(spec, node_id, ctx, self.token_budget - estimate_tokens(reminder))
                reask_user_text = f"{refit.user_text}{reminder}"
                retry = await with_retries(
                    self.backend, replace(request, user_text=reask_user_text), self.policy, self.sleep
                )
                attempts += retry.attempts_used
                text = retry.text
                outcome = parse_prediction(text)
            if node_id == self.prediction_node:
                ctx.prediction = outcome

        finished = started + (time.perf_counter() - clock_start)
        ctx.memory.write(MemoryEntry(
            agent=node_id,
            text=text,
            attempts=attempts,
            started_offset=started,
            finished_offset=finished,
        ))
        ctx.entries[node_id] = TaskEntry(
            agent=node_id,
            model_id=spec.model_id,
            system_text=prompt.system_text,
            user_text=prompt.user_text,
            response_text=text,
            attempts=attempts,
            started_offset=started,
            finished_offset=finished,
            wall_seconds=finished - started,
            reask_user_text=reask_user_text,
        )
        pipeline_logger.log_node_finished(stay_id, node_id, attempts, finished - started)
        return text

    @staticmethod
    def _validation_feedback(stay_id: str, text: str) -> Optional[ValidationFeedback]:
        """Feedback is informational; an unusable block is dropped, never fatal"""
        try:
            return parse_validation(text)
        except ValueError as e:
            logger.warning(f"Stay {stay_id}: validation feedback ignored ({e})")
            return None

    def _record(self, ctx: _RunContext, run_id: str, started_at: datetime, status: RunStatus,
                error: Optional[str] = None, failed_node: Optional[str] = None) -> RunRecord:
        entries = [ctx.entries[node_id] for node_id in self.order if node_id in ctx.entries]

        validation = None
        if status is RunStatus.SUCCESS:
            for entry in entries:
                if self.graph.specs[entry.agent].output_contract is OutputContract.VALIDATION_TEMPLATE:
                    validation = self._validation_feedback(ctx.patient.stay_id, entry.response_text)

        return RunRecord(
            run_id=run_id,
            stay_id=ctx.patient.stay_id,
            graph_label=self.label,
            status=status,
            error=error,
            failed_node=failed_node,
            seed=ctx.seed,
            model_ids={node_id: self.graph.specs[node_id].model_id for node_id in self.order},
            started_at=started_at,
            finished_at=utc_now(),
            entries=entries,
            prediction_node=self.prediction_node,
            explanation_nodes=self.explanation_nodes,
            prediction=ctx.prediction if status is RunStatus.SUCCESS else None,
            validation=validation,
            actual_outcome=ActualOutcome.from_label(ctx.patient.outcome),
            apache_predicted_mortality=ctx.patient.apache.apache_predicted_mortality,
        ).rescored(self.scorer)

    def _persist(self, record: RunRecord) -> None:
        if self.store is None:
            return
        path = self.store.save_record(record)
        pipeline_logger.log_run_persisted(record.stay_id, record.status.value, str(path))

    async def execute(self, patient: PatientRecord, seed: int, run_id: Optional[str] = None) -> RunRecord:
        """
        Run the graph for one patient

        Args:
            patient: Patient record
            seed: Seed passed with every model request
            run_id: Run identifier (the store's, or a fresh one)

        Returns:
            RunRecord, persisted when a store is configured; failed runs carry
            the entries completed before the failure

        Raises:
            WriteOnceViolation: internal invariant broken
        """
        run_id = run_id or (self.store.run_id if self.store else new_run_id(seed))
        started_at = utc_now()
        ctx = _RunContext(patient=patient, features=extract_features(patient), seed=seed)
        scheduler: DagScheduler[str] = DagScheduler(self.layers)

        try:
            await scheduler.run(lambda node_id: self._run_node(node_id, ctx, scheduler))
            record = self._record(ctx, run_id, started_at, RunStatus.SUCCESS)
        except NodeExecutionError as e:
            if isinstance(e.cause, WriteOnceViolation):
                raise e.cause
            pipeline_logger.log_run_failed(patient.stay_id, e.node_id, str(e.cause))
            record = self._record(
                ctx, run_id, started_at, RunStatus.FAILED,
                error=f"{type(e.cause).__name__}: {e.cause}", failed_node=e.node_id,
            )

        self._persist(record)
        return record

    async def _execute_bounded(self, patient: PatientRecord, seed: int, run_id: str,
                               semaphore: asyncio.Semaphore) -> RunRecord:
        async with semaphore:
            self.in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
            try:
                return await self.execute(patient, seed, run_id)
            except WriteOnceViolation:
                raise
            except Exception as e:
                # Failures outside node execution (e.g. feature extraction) stay isolated
                logger.exception(f"Run for stay {patient.stay_id} aborted: {e}")
                pipeline_logger.log_run_failed(patient.stay_id, "-", str(e))
                record = RunRecord(
                    run_id=run_id,
                    stay_id=patient.stay_id,
                    graph_label=self.label,
                    status=RunStatus.FAILED,
                    error=f"{type(e).__name__}: {e}",
                    seed=seed,
                    started_at=utc_now(),
                    finished_at=utc_now(),
                    actual_outcome=ActualOutcome.from_label(patient.outcome),
                    apache_predicted_mortality=patient.apache.apache_predicted_mortality,
                )
                self._persist(record)
                return record
            finally:
                self.in_flight -= 1

    @log_function_call
    async def run_batch(self, cohort: Sequence[PatientRecord], max_parallel: int, seed: int) -> BatchResult:
        """
        Run every patient of a cohort

        Args:
            cohort: Patients to run
            max_parallel: Patients in flight at once (>= 1)
            seed: Seed for every request of this batch

        Returns:
            BatchResult with records in cohort order and the batch summary
        """
        if max_parallel < 1:
            raise ValueError(f"max_parallel must be >= 1, got {max_parallel}")

        run_id = self.store.run_id if self.store else new_run_id(seed)
        started_at = utc_now()
        clock_start = time.perf_counter()
        self.in_flight = 0
        self.peak_in_flight = 0
        semaphore = asyncio.Semaphore(max_parallel)

        records = await asyncio.gather(*(
            self._execute_bounded(patient, seed, run_id, semaphore) for patient in cohort
        ))

        failed = [r.stay_id for r in records if not r.succeeded]
        summary = BatchSummary(
            run_id=run_id,
            graph_label=self.label,
            seed=seed,
            attempted=len(records),
            succeeded=len(records) - len(failed),
            failed=len(failed),
            failed_stay_ids=failed,
            max_parallel=max_parallel,
            peak_in_flight=self.peak_in_flight,
            wall_seconds=time.perf_counter() - clock_start,
            started_at=started_at,
            finished_at=utc_now(),
        )
        if self.store is not None:
            self.store.save_summary(summary)
        pipeline_logger.log_batch_summary(
            self.label, seed, summary.succeeded, summary.failed, summary.wall_seconds
        )
        return BatchResult(records=list(records), summary=summary)


async def execute(
    graph: PipelineGraph,
    patient: PatientRecord,
    backend: ModelBackend,
    policy: RetryPolicy,
    seed: int,
    exemplars: Optional[Sequence[FewShotExemplar]] = None,
    store: Optional[RunStore] = None
) -> RunRecord:
    """Run one patient through a graph"""
    executor = PipelineExecutor(graph, backend, policy, exemplars=exemplars, store=store)
    return await executor.execute(patient, seed)


async def run_batch(
    cohort: Sequence[PatientRecord],
    graph: PipelineGraph,
    backend: ModelBackend,
    policy: RetryPolicy,
    max_parallel: int,
    seed: int,
    exemplars: Optional[Sequence[FewShotExemplar]] = None,
    store: Optional[RunStore] = None
) -> Tuple[List[RunRecord], BatchSummary]:
    """Run a cohort through a graph with at most max_parallel patients in flight"""
    executor = PipelineExecutor(graph, backend, policy, exemplars=exemplars, store=store)
    return await executor.run_batch(cohort, max_parallel, seed)
