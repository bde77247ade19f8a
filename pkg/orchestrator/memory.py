"""
Shared Memory
Write-once blackboard for one patient's run
"""

from dataclasses import dataclass
from types import MappingProxyType
from typing import Dict, Iterable, Iterator, Mapping, Optional


class WriteOnceViolation(RuntimeError):
    """A key of the shared memory was written twice"""


@dataclass(frozen=True)
class MemoryEntry:
    agent: str
    text: str
    attempts: int
    started_offset: float
    finished_offset: float

    @property
    def wall_seconds(self) -> float:
        return self.finished_offset - self.started_offset


class SharedMemory:
    """
    Agent outputs of one run, keyed by agent name

    Features:
    - Each key is written exactly once
    - Readers only see completed entries
    - Snapshots are read-only views
    """

    def __init__(self):
        self._entries: Dict[str, MemoryEntry] = {}

    def write(self, entry: MemoryEntry) -> None:
        """
        Publish an agent's output

        Raises:
            WriteOnceViolation: the agent already has an entry
        """
        if entry.agent in self._entries:
            raise WriteOnceViolation(f"shared memory key {entry.agent!r} already written")
        self._entries[entry.agent] = entry

    def read(self, agent: str) -> Optional[MemoryEntry]:
        return self._entries.get(agent)

    def texts(self, agents: Iterable[str]) -> Dict[str, str]:
        """Output texts of the given agents that have completed"""
        return {a: self._entries[a].text for a in agents if a in self._entries}

    def snapshot(self) -> Mapping[str, MemoryEntry]:
        return MappingProxyType(dict(self._entries))

    def __contains__(self, agent: object) -> bool:
        return agent in self._entries

    def __len__(self) -> int:
        return len(self._entries)

    def __iter__(self) -> Iterator[str]:
        return iter(list(self._entries))
