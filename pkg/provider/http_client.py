"""
Chat-Completions Wire Client
Talks to any OpenAI-compatible /chat/completions endpoint over aiohttp

The API key is held as a SecretStr and only unwrapped into the request header.
"""

import asyncio
from typing import Any, Dict, Optional

import aiohttp
from loguru import logger
from pydantic import SecretStr

from config.config import ProviderSettings
from provider.base import (
    FatalProviderError,
    ModelBackend,
    ProviderRequest,
    ProviderResponse,
    TransientProviderError,
)

TRANSIENT_STATUSES = frozenset({408, 409, 429})


def is_transient_status(status: int) -> bool:
    return status in TRANSIENT_STATUSES or status >= 500


class ChatCompletionsClient(ModelBackend):
    """
    Async chat-completions client

    Features:
    - One HTTP request per complete() call
    - Cap on simultaneous in-flight requests
    - Status classification into transient and fatal errors
    - Lazy session creation, async context manager support
    """

    name = "http"

    def __init__(
        self,
        base_url: str,
        api_key: SecretStr,
        max_in_flight: int = 8,
        timeout_seconds: float = 60.0,
        session: Optional[aiohttp.ClientSession] = None
    ):
        if max_in_flight < 1:
            raise ValueError(f"max_in_flight must be >= 1, got {max_in_flight}")
        self.endpoint = f"{base_url.rstrip('/')}/chat/completions"
        self._api_key = api_key
        self.max_in_flight = max_in_flight
        self.timeout = aiohttp.ClientTimeout(total=timeout_seconds)
        self._semaphore = asyncio.Semaphore(max_in_flight)
        self._session = session
        self._owns_session = session is None
        self.in_flight = 0
        self.peak_in_flight = 0

        logger.info(f"Chat-completions client → {self.endpoint} (max in flight {max_in_flight})")

    @classmethod
    def from_settings(cls, settings: ProviderSettings) -> "ChatCompletionsClient":
        """Build from provider settings; raises ConfigError when the key variable is unset"""
        return cls(
            base_url=settings.base_url,
            api_key=settings.resolve_api_key(),
            max_in_flight=settings.max_in_flight,
            timeout_seconds=settings.timeout_seconds,
        )

    async def _get_session(self) -> aiohttp.ClientSession:
        if self._session is None or self._session.closed:
            self._session = aiohttp.ClientSession(timeout=self.timeout)
            self._owns_session = True
        return self._session

    async def close(self) -> None:
        if self._session is not None and self._owns_session and not self._session.closed:
            await self._session.close()
            logger.info("Chat-completions session closed")

    async def __aenter__(self) -> "ChatCompletionsClient":
        await self._get_session()
        return self

    async def __aexit__(self, *exc_info) -> None:
        await self.close()

    @staticmethod
    def build_payload(request: ProviderRequest) -> Dict[str, Any]:
        messages = []
        if request.system_text:
            messages.append({"role": "system", "content": request.system_text})
        messages.append({"role": "user", "content": request.user_text})
        payload: Dict[str, Any] = {
            "model": request.model_id,
            "messages": messages,
            "max_tokens": request.max_output_tokens,
            "temperature": request.temperature,
        }
        if request.seed is not None:
            payload["seed"] = request.seed
        return payload

    @staticmethod
    def extract_text(data: Any) -> str:
        """First choice's message content, or FatalProviderError"""
        try:
            content = data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError):
            raise FatalProviderError("Malformed completion payload: no choices[0].message.content")
        if not isinstance(content, str):
            raise FatalProviderError("Malformed completion payload: content is not text")
        return content

    async def complete(self, request: ProviderRequest) -> ProviderResponse:
        session = await self._get_session()
        headers = {
            "Content-Type": "application/json",
            "Authorization": f"Bearer {self._api_key.get_secret_value()}",
        }
        async with self._semaphore:
            self.in_flight += 1
            self.peak_in_flight = max(self.peak_in_flight, self.in_flight)
            try:
                async with session.post(
                    self.endpoint,
                    json=self.build_payload(request),
                    headers=headers,
                    timeout=self.timeout,
                ) as response:
                    if response.status != 200:
                        body = (await response.text())[:300]
                        message = f"HTTP {response.status} from {request.model_id}: {body}"
                        if is_transient_status(response.status):
                            raise TransientProviderError(message)
                        raise FatalProviderError(message)
                    try:
                        data = await response.json(content_type=None)
                    except (ValueError, aiohttp.ContentTypeError) as e:
                        raise FatalProviderError(f"Malformed completion payload: {e}") from e
            except asyncio.TimeoutError as e:
                raise TransientProviderError(f"Request to {request.model_id} timed out") from e
            except aiohttp.ClientError as e:
                raise TransientProviderError(f"Connection error: {e}") from e
            finally:
                self.in_flight -= 1

        return ProviderResponse.from_text(request, self.extract_text(data))
