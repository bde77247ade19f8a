"""Model backends: interface, retries, HTTP wire client, seeded mock"""

from .base import (
    FatalProviderError,
    InvalidRequestError,
    ModelBackend,
    ProviderError,
    ProviderRequest,
    ProviderResponse,
    TransientProviderError,
    estimate_tokens,
)
from .retry import RetryPolicy, with_retries
from .http_client import ChatCompletionsClient
from .mock import FaultRule, MockBackend, ScriptedFaultBackend

__all__ = [
    "FatalProviderError",
    "InvalidRequestError",
    "ModelBackend",
    "ProviderError",
    "ProviderRequest",
    "ProviderResponse",
    "TransientProviderError",
    "estimate_tokens",
    "RetryPolicy",
    "with_retries",
    "ChatCompletionsClient",
    "FaultRule",
    "MockBackend",
    "ScriptedFaultBackend",
]
