"""
Logging Configuration for the ICU Agent Pipeline
Uses loguru for console and file sinks

Pipeline events (node progress, retries, re-asks, batch summaries) are bound
with `pipeline=True` and additionally land in their own runs_*.log file.
"""

import asyncio
import sys
import time
from functools import wraps
from pathlib import Path
from typing import Optional, Union

from loguru import logger

CONSOLE_FORMAT = (
    "<green>{time:YYYY-MM-DD HH:mm:ss}</green> | "
    "<level>{level: <8}</level> | "
    "<cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> | "
    "<level>{message}</level>"
)
FILE_FORMAT = "{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} | {message}"
EVENT_FORMAT = "{time:YYYY-MM-DD HH:mm:ss.SSS} | {message}"


def _is_pipeline_event(record) -> bool:
    return record["extra"].get("pipeline", False)


def setup_logging(log_level: str = "INFO", log_dir: Optional[Union[str, Path]] = None) -> None:
    """
    Configure logging for the entire system

    Safe to call more than once; previous sinks are removed first.

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR, CRITICAL)
        log_dir: Directory for file logs (None for console only)
    """
    logger.remove()
    logger.add(sys.stderr, level=log_level, format=CONSOLE_FORMAT,
               colorize=True, backtrace=True, diagnose=False)

    if log_dir is None:
        return

    log_dir = Path(log_dir)
    log_dir.mkdir(parents=True, exist_ok=True)

    # (file pattern, level, format, retention, filter); all rotate at midnight
    file_sinks = [
        ("pipeline_{time:YYYY-MM-DD}.log", log_level, FILE_FORMAT, "30 days", None),
        ("errors_{time:YYYY-MM-DD}.log", "ERROR", FILE_FORMAT, "30 days", None),
        ("runs_{time:YYYY-MM-DD}.log", "DEBUG", EVENT_FORMAT, "90 days", _is_pipeline_event),
    ]
    for pattern, level, fmt, retention, event_filter in file_sinks:
        logger.add(
            log_dir / pattern,
            level=level,
            format=fmt,
            rotation="00:00",
            retention=retention,
            compression="zip",
            filter=event_filter,
            diagnose=False,
        )

    logger.info(f"Logging to {log_dir} at {log_level}")


class PipelineLogger:
    """Specialized logger for pipeline events"""

    def __init__(self):
        self.logger = logger.bind(pipeline=True)

    def log_load_report(self, loaded: int, dropped: int, malformed: int, imputed: int):
        """Log the outcome of cohort loading"""
        self.logger.info(
            f"📂 COHORT | loaded {loaded} | dropped {dropped} incomplete | "
            f"{malformed} malformed rows skipped | {imputed} vital values carried forward"
        )

    def log_node_started(self, stay_id: str, agent: str, role: str = ""):
        """Log a node starting"""
        suffix = f" | {role}" if role else ""
        self.logger.debug(f"▶ NODE | stay {stay_id} | {agent}{suffix}")

    def log_node_finished(self, stay_id: str, agent: str, attempts: int, seconds: float):
        """Log a node finishing"""
        self.logger.debug(
            f"✓ NODE | stay {stay_id} | {agent} | attempts {attempts} | {seconds:.3f}s"
        )

    def log_retry(self, model_id: str, attempt: int, max_attempts: int, wait: float, error: str):
        """Log a retry being scheduled"""
        self.logger.warning(
            f"🔁 RETRY | {model_id} | attempt {attempt}/{max_attempts} failed: {error} | "
            f"waiting {wait:.2f}s"
        )

    def log_format_reask(self, stay_id: str, agent: str, error: str):
        """Log a format-reminder re-ask after a parse failure"""
        self.logger.warning(f"📝 RE-ASK | stay {stay_id} | {agent} | {error}")

    def log_run_failed(self, stay_id: str, agent: str, error: str):
        """Log a failed patient run"""
        self.logger.error(f"❌ RUN FAILED | stay {stay_id} | node {agent} | {error}")

    def log_run_persisted(self, stay_id: str, status: str, path: str):
        """Log a persisted run record"""
        self.logger.debug(f"💾 RECORD | stay {stay_id} | {status} | {path}")

    def log_batch_summary(self, label: str, seed: int, succeeded: int, failed: int, seconds: float):
        """Log the end of a batch"""
        self.logger.info(
            f"📊 BATCH {label} | seed {seed} | {succeeded} ok | {failed} failed | {seconds:.1f}s"
        )


# Global pipeline logger instance
pipeline_logger = PipelineLogger()


def log_function_call(func):
    """Decorator logging entry, exit with elapsed time, and errors of sync or async callables"""

    @wraps(func)
    async def async_wrapper(*args, **kwargs):
        logger.debug(f"→ {func.__qualname__}")
        started = time.perf_counter()
        try:
            result = await func(*args, **kwargs)
        except Exception as e:
            logger.error(f"✗ {func.__qualname__} raised {type(e).__name__}: {e}")
            raise
        logger.debug(f"← {func.__qualname__} ({time.perf_counter() - started:.3f}s)")
        return result

    @wraps(func)
    def sync_wrapper(*args, **kwargs):
        logger.debug(f"→ {func.__qualname__}")
        started = time.perf_counter()
        try:
            result = func(*args, **kwargs)
        except Exception as e:
            logger.error(f"✗ {func.__qualname__} raised {type(e).__name__}: {e}")
            raise
        logger.debug(f"← {func.__qualname__} ({time.perf_counter() - started:.3f}s)")
        return result

    return async_wrapper if asyncio.iscoroutinefunction(func) else sync_wrapper
