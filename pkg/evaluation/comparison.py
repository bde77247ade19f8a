"""
MAS vs SAS Comparison
Mean (SD) per model plus a paired t-test for every metric
"""

from typing import Dict, List, Optional, Sequence

from pydantic import BaseModel, Field

from evaluation.metrics import METRIC_FIELDS, RunMetrics
from evaluation.statistics import (
    ConfidenceInterval,
    DegenerateVarianceError,
    MetricAggregate,
    aggregate_runs,
    paired_t_test,
)


class PairingError(ValueError):
    """Run lists cannot be paired"""


class MetricComparison(BaseModel):
    """One metric row; test fields are None when the paired differences are degenerate"""
    metric: str
    label: str
    higher_is_better: bool
    mas: MetricAggregate
    sas: MetricAggregate
    mean_difference: float
    t_statistic: Optional[float] = None
    df: int
    p_value: Optional[float] = None
    ci: Optional[ConfidenceInterval] = None
    degenerate: bool = False

    @property
    def best(self) -> Optional[str]:
        """MAS or SAS by mean, None on a tie"""
        if self.mas.mean == self.sas.mean:
            return None
        mas_wins = self.mas.mean > self.sas.mean
        if not self.higher_is_better:
            mas_wins = not mas_wins
        return "MAS" if mas_wins else "SAS"


class PerRunRow(BaseModel):
    """Headline metrics of one MAS/SAS run pair"""
    seed: int
    mas_accuracy_percent: float
    sas_accuracy_percent: float
    mas_los_mae_days: float
    sas_los_mae_days: float
    mas_transparency: float
    sas_transparency: float


class ComparisonReport(BaseModel):
    n_runs: int = Field(ge=2)
    rows: List[MetricComparison]
    per_run: List[PerRunRow] = Field(default_factory=list)
    excluded: Dict[str, int] = Field(default_factory=dict)

    def row(self, metric: str) -> MetricComparison:
        for row in self.rows:
            if row.metric == metric:
                return row
        raise KeyError(metric)


def compare_models(mas_runs: Sequence[RunMetrics], sas_runs: Sequence[RunMetrics],
                   seeds: Optional[Sequence[int]] = None) -> ComparisonReport:
    """
    Compare paired MAS and SAS runs

    Run k of each list must come from the same cohort sample and seed.

    Args:
        mas_runs: Per-run metrics of the multi-agent graph
        sas_runs: Per-run metrics of the single-agent graph
        seeds: Seed of each run pair, keys the per-run rows (run index when omitted)

    Returns:
        ComparisonReport with one row per metric and one per-run row per pair

    Raises:
        PairingError: unequal run or seed counts, or fewer than two runs
    """
    if len(mas_runs) != len(sas_runs):
        raise PairingError(f"cannot pair {len(mas_runs)} MAS runs with {len(sas_runs)} SAS runs")
    if len(mas_runs) < 2:
        raise PairingError(f"paired comparison needs at least 2 runs per model, got {len(mas_runs)}")
    seeds = list(range(len(mas_runs))) if seeds is None else list(seeds)
    if len(seeds) != len(mas_runs):
        raise PairingError(f"{len(seeds)} seeds given for {len(mas_runs)} run pairs")

    mas_agg = aggregate_runs(mas_runs)
    sas_agg = aggregate_runs(sas_runs)
    rows = []
    for name, label, higher_is_better in METRIC_FIELDS:
        a = [getattr(run, name) for run in mas_runs]
        b = [getattr(run, name) for run in sas_runs]
        row = dict(
            metric=name,
            label=label,
            higher_is_better=higher_is_better,
            mas=mas_agg[name],
            sas=sas_agg[name],
            df=len(a) - 1,
        )
        try:
            test = paired_t_test(a, b)
        except DegenerateVarianceError as e:
            rows.append(MetricComparison(**row, mean_difference=e.mean_difference, degenerate=True))
            continue
        rows.append(MetricComparison(
            **row,
            mean_difference=test.mean_difference,
            t_statistic=test.t_statistic,
            p_value=test.p_value,
            ci=test.ci,
        ))

    return ComparisonReport(
        n_runs=len(mas_runs),
        rows=rows,
        per_run=[
            PerRunRow(
                seed=seed,
                mas_accuracy_percent=mas.accuracy_percent,
                sas_accuracy_percent=sas.accuracy_percent,
                mas_los_mae_days=mas.los_mae_days,
                sas_los_mae_days=sas.los_mae_days,
                mas_transparency=mas.mean_transparency,
                sas_transparency=sas.mean_transparency,
            )
            for seed, mas, sas in zip(seeds, mas_runs, sas_runs)
        ],
        excluded={
            "MAS": sum(run.n_excluded for run in mas_runs),
            "SAS": sum(run.n_excluded for run in sas_runs),
        },
    )
