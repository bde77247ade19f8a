"""
DAG Scheduler
Runs a layered DAG: nodes of a layer fan out concurrently and the next layer
starts once every node of the current one has finished
"""

import asyncio
import time
from dataclasses import dataclass
from typing import Any, Awaitable, Callable, Dict, Generic, List, Optional, Sequence, TypeVar

from loguru import logger

T = TypeVar("T")

NodeFunc = Callable[[str], Awaitable[T]]


class NodeExecutionError(RuntimeError):
    """A node failed; carries the node id and the original error"""

    def __init__(self, node_id: str, cause: BaseException):
        self.node_id = node_id
        self.cause = cause
        super().__init__(f"node {node_id} failed: {type(cause).__name__}: {cause}")


@dataclass
class NodeTiming:
    """
    When a node ran

    Offsets are seconds since the scheduler started; sequence numbers order
    every start and finish event of the run.
    """
    node_id: str
    started_offset: float
    started_seq: int
    finished_offset: Optional[float] = None
    finished_seq: Optional[int] = None
    error: Optional[str] = None

    @property
    def finished(self) -> bool:
        return self.finished_seq is not None


class DagScheduler(Generic[T]):
    """
    Layer-by-layer executor for a validated DAG

    Features:
    - Concurrent nodes within a layer (asyncio.gather)
    - Fan-in barrier between layers
    - Start/finish offsets and event sequence per node
    - Stops after the first layer containing a failure
    """

    def __init__(self, layers: Sequence[Sequence[str]],
                 clock: Callable[[], float] = time.perf_counter):
        self.layers = [list(layer) for layer in layers]
        self._clock = clock
        self._origin: Optional[float] = None
        self._seq = 0
        self.timings: Dict[str, NodeTiming] = {}
        self.results: Dict[str, T] = {}

    def _offset(self) -> float:
        return self._clock() - self._origin

    def _next_seq(self) -> int:
        self._seq += 1
        return self._seq

    async def _run_node(self, node_id: str, func: NodeFunc) -> T:
        timing = NodeTiming(node_id=node_id, started_offset=self._offset(), started_seq=self._next_seq())
        self.timings[node_id] = timing
        try:
            result = await func(node_id)
        except Exception as e:
            timing.error = f"{type(e).__name__}: {e}"
            raise
        finally:
            timing.finished_offset = self._offset()
            timing.finished_seq = self._next_seq()
        self.results[node_id] = result
        return result

    async def run(self, func: NodeFunc) -> Dict[str, T]:
        """
        Execute every layer in order

        Args:
            func: Coroutine function called with each node id

        Returns:
            Node id -> result for every node

        Raises:
            NodeExecutionError: first failing node (in layer order) once its
                layer has settled; results of finished nodes stay in .results
        """
        self._origin = self._clock()
        for k, layer in enumerate(self.layers):
            logger.debug(f"Running layer {k}: {layer}")
            outcomes = await asyncio.gather(
                *(self._run_node(node_id, func) for node_id in layer),
                return_exceptions=True,
            )
            for node_id, outcome in zip(layer, outcomes):
                if isinstance(outcome, BaseException):
                    if not isinstance(outcome, Exception):
                        raise outcome
                    raise NodeExecutionError(node_id, outcome) from outcome
        return dict(self.results)

    def get_status(self) -> Dict[str, Any]:
        """Per-node timing summary"""
        return {
            node_id: {
                "started_offset": t.started_offset,
                "finished_offset": t.finished_offset,
                "error": t.error,
            }
            for node_id, t in self.timings.items()
        }
