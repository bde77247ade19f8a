"""
Shared fixtures: a small synthetic cohort, built-in graphs and a no-op sleep
"""

from pathlib import Path
from typing import List

import pytest

from agents.few_shot import build_few_shot
from ingestion import generate_synthetic, load_cohort
from ingestion.records import OutcomeStatus, PatientRecord
from orchestrator import build_mas_graph, build_sas_graph
from provider import RetryPolicy

SYNTH_SEED = 7
SYNTH_STAYS = 40


class FakeSleep:
    """Records requested backoff waits instead of sleeping"""

    def __init__(self):
        self.waits: List[float] = []

    async def __call__(self, seconds: float) -> None:
        self.waits.append(seconds)


@pytest.fixture(scope="session")
def synthetic_dir(tmp_path_factory) -> Path:
    directory = tmp_path_factory.mktemp("cohort")
    generate_synthetic(seed=SYNTH_SEED, n_stays=SYNTH_STAYS, expired_fraction=0.5, out_dir=directory)
    return directory


@pytest.fixture(scope="session")
def loaded(synthetic_dir):
    return load_cohort(synthetic_dir)


@pytest.fixture(scope="session")
def cohort(loaded) -> List[PatientRecord]:
    records, _ = loaded
    return records


@pytest.fixture(scope="session")
def exemplars(cohort):
    return build_few_shot(cohort)


@pytest.fixture
def patient(cohort) -> PatientRecord:
    return next(r for r in cohort if r.outcome.status is OutcomeStatus.EXPIRED)


@pytest.fixture
def mas_graph():
    return build_mas_graph()


@pytest.fixture
def sas_graph():
    return build_sas_graph()


@pytest.fixture
def fake_sleep() -> FakeSleep:
    return FakeSleep()


@pytest.fixture
def fast_policy() -> RetryPolicy:
    return RetryPolicy(max_attempts=3, base_backoff=0.5, backoff_multiplier=2.0)
