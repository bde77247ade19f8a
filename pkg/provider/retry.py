"""
Retry policy for provider calls
Exponential backoff over retryable error classes
"""

import asyncio
from dataclasses import dataclass
from typing import Awaitable, Callable, Optional, Tuple, Type

from config.config import RetrySettings
from config.logging_config import pipeline_logger
from provider.base import (
    ModelBackend,
    ProviderError,
    ProviderRequest,
    ProviderResponse,
    TransientProviderError,
)

SleepFunc = Callable[[float], Awaitable[None]]


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    base_backoff: float = 1.0
    backoff_multiplier: float = 2.0
    retryable_classes: Tuple[Type[ProviderError], ...] = (TransientProviderError,)

    def __post_init__(self):
        if self.max_attempts < 1:
            raise ValueError(f"max_attempts must be >= 1, got {self.max_attempts}")
        if self.base_backoff < 0:
            raise ValueError(f"base_backoff must be >= 0, got {self.base_backoff}")
        if self.backoff_multiplier < 1:
            raise ValueError(f"backoff_multiplier must be >= 1, got {self.backoff_multiplier}")

    @classmethod
    def from_settings(cls, settings: RetrySettings) -> "RetryPolicy":
        return cls(
            max_attempts=settings.max_attempts,
            base_backoff=settings.base_backoff_seconds,
            backoff_multiplier=settings.backoff_multiplier,
        )

    def backoff_for(self, attempt: int) -> float:
        """Wait after failed attempt number `attempt` (1-based)"""
        return self.base_backoff * self.backoff_multiplier ** (attempt - 1)

    def is_retryable(self, error: BaseException) -> bool:
        return isinstance(error, self.retryable_classes)


async def with_retries(
    backend: ModelBackend,
    request: ProviderRequest,
    policy: RetryPolicy,
    sleep: Optional[SleepFunc] = None
) -> ProviderResponse:
    """
    Call a backend, retrying retryable failures with exponential backoff

    Args:
        backend: Model backend
        request: Completion request
        policy: Retry policy
        sleep: Awaitable sleep (asyncio.sleep by default; tests pass a fake)

    Returns:
        ProviderResponse with attempts_used set

    Raises:
        ProviderError: fatal error (immediately) or the last retryable error
            after max_attempts; attempts_used is set on the error
    """
    sleep = sleep or asyncio.sleep
    attempt = 0
    while True:
        attempt += 1
        try:
            response = await backend.complete(request)
            return response.with_attempts(attempt)
        except ProviderError as e:
            e.attempts_used = attempt
            if not policy.is_retryable(e) or attempt >= policy.max_attempts:
                raise
            wait = policy.backoff_for(attempt)
            pipeline_logger.log_retry(request.model_id, attempt, policy.max_attempts, wait, str(e))
            await sleep(wait)
