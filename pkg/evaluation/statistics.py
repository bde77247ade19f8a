"""
Run Aggregation and Paired t-Tests

Two-sided p-values come from the regularized incomplete beta function:
p = I_{df/(df+t^2)}(df/2, 1/2).
"""

import math
from typing import Dict, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, model_validator
from scipy import special, stats

from evaluation.metrics import METRIC_FIELDS, EmptyResultsError, RunMetrics

CONFIDENCE_LEVEL = 0.95
# sd(d) at or below this fraction of max(1, |mean(d)|) is rounding noise
VARIANCE_RTOL = 1e-12


class DegenerateVarianceError(ValueError):
    """Paired differences have zero variance, up to floating-point noise"""

    def __init__(self, mean_difference: float):
        self.mean_difference = mean_difference
        super().__init__("identical paired samples: differences have zero variance")


class ConfidenceInterval(BaseModel):
    low: float
    high: float
    level: float = CONFIDENCE_LEVEL

    @model_validator(mode="after")
    def _ordered(self) -> "ConfidenceInterval":
        if self.low > self.high:
            raise ValueError(f"interval low {self.low} > high {self.high}")
        return self

    def contains(self, value: float) -> bool:
        return self.low <= value <= self.high


class PairedTTestResult(BaseModel):
    t_statistic: float
    df: int = Field(ge=1)
    p_value: float = Field(ge=0, le=1)
    mean_difference: float
    ci: ConfidenceInterval


class MetricAggregate(BaseModel):
    """Mean and sample SD of one metric over runs (SD absent for a single run)"""
    mean: float
    sd: Optional[float] = None
    n_runs: int = Field(ge=1)

    def formatted(self, digits: int = 1) -> str:
        return format_mean_sd(self.mean, self.sd, digits)


def format_mean_sd(mean: float, sd: Optional[float], digits: int = 1) -> str:
    """'58.6 (1.1)' style; mean only when sd is None"""
    if sd is None:
        return f"{mean:.{digits}f}"
    return f"{mean:.{digits}f} ({sd:.{digits}f})"


def aggregate_values(values: Sequence[float]) -> MetricAggregate:
    data = np.asarray(values, dtype=float)
    if data.size == 0:
        raise EmptyResultsError("cannot aggregate an empty list of runs")
    sd = float(np.std(data, ddof=1)) if data.size >= 2 else None
    return MetricAggregate(mean=float(data.mean()), sd=sd, n_runs=int(data.size))


def aggregate_runs(per_run: Sequence[RunMetrics]) -> Dict[str, MetricAggregate]:
    """
    Mean and sample SD (n-1 denominator) of every metric

    Raises:
        EmptyResultsError: no runs
    """
    if not per_run:
        raise EmptyResultsError("cannot aggregate an empty list of runs")
    return {
        name: aggregate_values([getattr(run, name) for run in per_run])
        for name, _, _ in METRIC_FIELDS
    }


def two_sided_p_value(t_statistic: float, df: int) -> float:
    x = df / (df + t_statistic * t_statistic)
    return float(min(1.0, max(0.0, special.betainc(df / 2.0, 0.5, x))))


def paired_t_test(a: Sequence[float], b: Sequence[float],
                  level: float = CONFIDENCE_LEVEL) -> PairedTTestResult:
    """
    Paired t-test on d = a - b

    Args:
        a: First sample
        b: Second sample, paired with a by index
        level: Confidence level of the interval for mean(d)

    Returns:
        PairedTTestResult(t, df, two-sided p, mean difference, CI)

    Raises:
        ValueError: lengths differ or fewer than two pairs
        DegenerateVarianceError: sd(d) is zero relative to mean(d)
    """
    x = np.asarray(a, dtype=float)
    y = np.asarray(b, dtype=float)
    if x.shape != y.shape:
        raise ValueError(f"paired samples must have equal lengths, got {x.size} and {y.size}")
    if x.size < 2:
        raise ValueError(f"paired t-test needs at least 2 pairs, got {x.size}")

    d = x - y
    n = d.size
    df = n - 1
    mean_d = float(d.mean())
    sd_d = float(np.std(d, ddof=1))
    if not math.isfinite(sd_d) or sd_d <= VARIANCE_RTOL * max(1.0, abs(mean_d)):
        raise DegenerateVarianceError(mean_d)

    se = sd_d / math.sqrt(n)
    t_stat = mean_d / se
    t_crit = float(stats.t.ppf(0.5 + level / 2.0, df))
    return PairedTTestResult(
        t_statistic=t_stat,
        df=df,
        p_value=two_sided_p_value(t_stat, df),
        mean_difference=mean_d,
        ci=ConfidenceInterval(low=mean_d - t_crit * se, high=mean_d + t_crit * se, level=level),
    )
