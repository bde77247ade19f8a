"""
Provider Interface
Request/response values, error classes and the backend contract
"""

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, replace
from typing import Optional


def estimate_tokens(text: str) -> int:
    """Backend-independent token estimate: ceil(characters / 4)"""
    return math.ceil(len(text or "") / 4)


class InvalidRequestError(ValueError):
    """Request violates its preconditions"""


class ProviderError(RuntimeError):
    """A completion call failed"""

    def __init__(self, message: str, attempts_used: int = 1):
        super().__init__(message)
        self.attempts_used = attempts_used


class TransientProviderError(ProviderError):
    """Timeouts, connection drops, rate limits and server errors; safe to retry"""


class FatalProviderError(ProviderError):
    """Authentication, configuration or malformed payload; retrying cannot help"""


@dataclass(frozen=True)
class ProviderRequest:
    model_id: str
    system_text: str
    user_text: str
    max_output_tokens: int = 1024
    temperature: float = 0.0
    seed: Optional[int] = None

    def __post_init__(self):
        if not self.user_text or not self.user_text.strip():
            raise InvalidRequestError("user_text must be non-empty")
        if self.max_output_tokens < 1:
            raise InvalidRequestError(f"max_output_tokens must be >= 1, got {self.max_output_tokens}")
        if self.temperature < 0:
            raise InvalidRequestError(f"temperature must be >= 0, got {self.temperature}")
        if not self.model_id:
            raise InvalidRequestError("model_id must be non-empty")


@dataclass(frozen=True)
class ProviderResponse:
    text: str
    input_token_estimate: int
    output_token_estimate: int
    attempts_used: int = 1

    @classmethod
    def from_text(cls, request: ProviderRequest, text: str) -> "ProviderResponse":
        return cls(
            text=text,
            input_token_estimate=estimate_tokens(request.system_text) + estimate_tokens(request.user_text),
            output_token_estimate=estimate_tokens(text),
        )

    def with_attempts(self, attempts: int) -> "ProviderResponse":
        return replace(self, attempts_used=attempts)


class ModelBackend(ABC):
    """
    A text-generation backend

    Implementations must tolerate concurrent complete() calls.
    """

    name: str = "backend"

    @abstractmethod
    async def complete(self, request: ProviderRequest) -> ProviderResponse:
        """Generate text for one request or raise a ProviderError subclass"""

    async def close(self) -> None:
        """Release resources (no-op by default)"""
