"""
Configuration Management for the ICU Agent Pipeline
Uses Pydantic for validation and environment variable loading

Precedence for experiment settings: model defaults < JSON config file < CLI flags.
Secrets are never stored in config files; the provider block names the
environment variable that holds the API key.
"""

import json
import os
from pathlib import Path
from typing import Any, Dict, Literal, Optional

from dotenv import load_dotenv
from pydantic import BaseModel, Field, SecretStr, ValidationError, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from ingestion.schema import SchemaConfig

# Load .env file
load_dotenv()


class ConfigError(ValueError):
    """Invalid or incomplete configuration"""


class SystemSettings(BaseSettings):
    """Process-level settings read from the environment"""
    model_config = SettingsConfigDict(env_prefix='', populate_by_name=True)

    log_level: str = Field(default="INFO", alias="LOG_LEVEL")
    log_dir: Optional[str] = Field(default=None, alias="LOG_DIR")
    output_dir: str = Field(default="./runs", alias="OUTPUT_DIR")


class ProviderSettings(BaseModel):
    """
    Model backend configuration

    Supports:
    - mock: deterministic seeded backend, no network
    - http: chat-completions endpoint (OpenAI-compatible)
    """
    backend: Literal["mock", "http"] = "mock"
    base_url: str = "https://api.openai.com/v1"
    model_id: str = "gpt-4o"
    agent_models: Dict[str, str] = Field(default_factory=dict)
    api_key_env: str = "OPENAI_API_KEY"
    max_in_flight: int = Field(default=8, ge=1)
    timeout_seconds: float = Field(default=60.0, gt=0)
    temperature: float = Field(default=0.0, ge=0)
    max_output_tokens: int = Field(default=1024, ge=1)

    def model_for(self, agent_name: str) -> str:
        """Model id for one agent (per-agent override, else the default)"""
        return self.agent_models.get(agent_name, self.model_id)

    def resolve_api_key(self) -> SecretStr:
        """
        Read the API key from the configured environment variable

        Raises:
            ConfigError: variable unset or empty
        """
        value = os.getenv(self.api_key_env, "").strip()
        if not value:
            raise ConfigError(
                f"Missing API key: environment variable {self.api_key_env} is not set"
            )
        return SecretStr(value)


class RetrySettings(BaseModel):
    """Retry policy for provider calls"""
    max_attempts: int = Field(default=3, ge=1)
    base_backoff_seconds: float = Field(default=1.0, ge=0)
    backoff_multiplier: float = Field(default=2.0, ge=1)


class ExperimentConfig(BaseModel):
    """Everything one reproducible experiment needs"""

    data_dir: str = "./data"
    schema_map: SchemaConfig = Field(default_factory=SchemaConfig)

    # Cohort
    n_expired: int = Field(default=76, ge=0)
    n_survived: int = Field(default=74, ge=0)
    seed: int = 0

    # Pipeline
    graph: Literal["mas", "sas"] = "mas"
    graph_file: Optional[str] = None
    runs: int = Field(default=8, ge=1)
    max_parallel: int = Field(default=4, ge=1)
    token_budget: int = Field(default=10_000, ge=1_000)

    provider: ProviderSettings = Field(default_factory=ProviderSettings)
    retry: RetrySettings = Field(default_factory=RetrySettings)

    # Evaluation
    threshold: float = Field(default=0.5, gt=0, lt=1)
    apache_blend_weight: float = Field(default=0.0, ge=0, le=1)
    rubric_path: Optional[str] = None

    output_dir: str = Field(default_factory=lambda: SystemSettings().output_dir)

    @field_validator("graph", mode="before")
    @classmethod
    def _lower_graph(cls, value: Any) -> Any:
        return value.lower() if isinstance(value, str) else value


def _deep_merge(base: Dict[str, Any], updates: Dict[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in updates.items():
        if value is None:
            continue
        if isinstance(value, dict):
            current = merged.get(key)
            merged[key] = _deep_merge(current if isinstance(current, dict) else {}, value)
        else:
            merged[key] = value
    return merged


def load_experiment_config(
    path: Optional[str] = None,
    overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from an optional JSON file plus flag overrides

    Args:
        path: JSON config file (None for defaults only)
        overrides: Values from CLI flags; None entries are ignored,
            nested dicts merge into the matching block

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigError: unreadable file or invalid values
    """
    data: Dict[str, Any] = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise ConfigError(f"Cannot read config file {path}: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"Config file {path} must contain a JSON object")

    data = _deep_merge(data, overrides or {})

    try:
        return ExperimentConfig.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid experiment config: {e}") from e


# Global settings instance
settings = SystemSettings()


def get_settings() -> SystemSettings:
    """Get the global settings instance"""
    return settings

