"""
Balanced cohort sampling
"""

from typing import List

import numpy as np

from ingestion.records import OutcomeStatus, PatientRecord, stay_sort_key


class StratumError(ValueError):
    """A stratum cannot supply what was requested"""

    def __init__(self, stratum: str, requested: int, available: int):
        super().__init__(
            f"Stratum '{stratum}' short by {requested - available}: "
            f"requested {requested}, available {available}"
        )
        self.stratum = stratum
        self.requested = requested
        self.available = available


def _draw(pool: List[PatientRecord], n: int, stratum: str,
          rng: np.random.Generator) -> List[PatientRecord]:
    if n > len(pool):
        raise StratumError(stratum, n, len(pool))
    if n == 0:
        return []
    picks = rng.choice(len(pool), size=n, replace=False)
    return [pool[i] for i in picks]


def sample_balanced(
    records: List[PatientRecord],
    n_expired: int,
    n_survived: int,
    seed: int
) -> List[PatientRecord]:
    """
    Draw a fixed number of stays per outcome, uniformly without replacement

    Args:
        records: Candidate pool
        n_expired: Stays to draw from the expired stratum
        n_survived: Stays to draw from the survived stratum
        seed: RNG seed (same seed, same pool -> same sample)

    Returns:
        Sampled records, expired first then survived, each in stay-id order

    Raises:
        StratumError: a stratum has fewer records than requested
    """
    if n_expired < 0 or n_survived < 0:
        raise ValueError("sample sizes must be >= 0")

    # Pool order must not depend on caller order
    ordered = sorted(records, key=lambda r: stay_sort_key(r.stay_id))
    expired = [r for r in ordered if r.outcome.status is OutcomeStatus.EXPIRED]
    survived = [r for r in ordered if r.outcome.status is OutcomeStatus.SURVIVED]

    # Both strata are checked before any draw
    if n_expired > len(expired):
        raise StratumError(OutcomeStatus.EXPIRED.value, n_expired, len(expired))
    if n_survived > len(survived):
        raise StratumError(OutcomeStatus.SURVIVED.value, n_survived, len(survived))

    rng = np.random.default_rng(seed)
    chosen = (
        sorted(_draw(expired, n_expired, OutcomeStatus.EXPIRED.value, rng),
               key=lambda r: stay_sort_key(r.stay_id))
        + sorted(_draw(survived, n_survived, OutcomeStatus.SURVIVED.value, rng),
                 key=lambda r: stay_sort_key(r.stay_id))
    )
    return chosen
