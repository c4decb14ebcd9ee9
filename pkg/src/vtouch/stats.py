"""Descriptive statistics, the outer-fence outlier filter, Welch's t-test,
and one-way ANOVA used to compare modalities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .core import VTouchError


class TooFewValues(VTouchError):
    """The fence filter needs at least four values for quartiles."""


class EmptySet(VTouchError):
    """Descriptive statistics of nothing."""


class InsufficientData(VTouchError):
    """A test's groups are too small or degenerate."""


@dataclass(frozen=True)
class FenceReport:
    """Outer-fence split: values outside Q3 + 3*IQR or Q1 - 3*IQR are
    removed. Single-pass: fences come from the full input."""

    kept: tuple[float, ...]
    removed: tuple[float, ...]
    q1: float
    q3: float
    iqr: float
    lower_fence: float
    upper_fence: float


def outer_fence_filter(values: Sequence[float]) -> FenceReport:
    if len(values) < 4:
        raise TooFewValues(f"need >= 4 values, got {len(values)}")
    arr = np.asarray(values, dtype=float)
    # Linear interpolation at p*(n-1): numpy's default quantile rule.
    q1, q3 = (float(q) for q in np.quantile(arr, [0.25, 0.75]))
    iqr = q3 - q1
    lower = q1 - 3.0 * iqr
    upper = q3 + 3.0 * iqr
    kept = tuple(float(v) for v in values if lower <= v <= upper)
    removed = tuple(float(v) for v in values if v < lower or v > upper)
    return FenceReport(kept, removed, q1, q3, iqr, lower, upper)


@dataclass(frozen=True)
class Summary:
    mean: float
    median: float
    sd: float
    count: int
    sd_is_defined: bool


def summarize(values: Sequence[float]) -> Summary:
    """Mean, midpoint median, and sample (n-1) standard deviation; a single
    value reports sd 0 with the defined flag cleared."""
    if not values:
        raise EmptySet("cannot summarize an empty sample set")
    arr = np.asarray(values, dtype=float)
    n = arr.size
    defined = n > 1
    sd = float(arr.std(ddof=1)) if defined else 0.0
    return Summary(
        mean=float(arr.mean()),
        median=float(np.median(arr)),
        sd=sd,
        count=int(n),
        sd_is_defined=defined,
    )


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: float
    p_two_sided: float


def welch_t(group_a: Sequence[float], group_b: Sequence[float]) -> TTestResult:
    """Welch's two-sample t-test with Welch-Satterthwaite degrees of
    freedom; two-sided p from the t-distribution."""
    a = np.asarray(group_a, dtype=float)
    b = np.asarray(group_b, dtype=float)
    if a.size < 2 or b.size < 2:
        raise InsufficientData("both groups need >= 2 values")
    va = float(a.var(ddof=1))
    vb = float(b.var(ddof=1))
    diff = float(a.mean() - b.mean())
    se2 = va / a.size + vb / b.size
    if se2 == 0.0:
        if diff == 0.0:
            # Identical constant groups: no evidence of any difference.
            return TTestResult(t=0.0, df=float(a.size + b.size - 2), p_two_sided=1.0)
        raise InsufficientData("zero variance in both groups with unequal means")
    t = diff / math.sqrt(se2)
    df = se2 ** 2 / ((va / a.size) ** 2 / (a.size - 1) + (vb / b.size) ** 2 / (b.size - 1))
    p = 2.0 * float(sps.t.sf(abs(t), df))
    return TTestResult(t=t, df=df, p_two_sided=p)


@dataclass(frozen=True)
class AnovaResult:
    F: float
    df_between: int
    df_within: int
    p: float


def anova_oneway(groups: Sequence[Sequence[float]]) -> AnovaResult:
    """Classic one-way between/within decomposition."""
    if len(groups) < 2 or any(len(g) < 2 for g in groups):
        raise InsufficientData("need >= 2 groups with >= 2 values each")
    arrays = [np.asarray(g, dtype=float) for g in groups]
    all_values = np.concatenate(arrays)
    grand = float(all_values.mean())
    ss_between = sum(a.size * (float(a.mean()) - grand) ** 2 for a in arrays)
    ss_within = sum(float(((a - a.mean()) ** 2).sum()) for a in arrays)
    df_between = len(arrays) - 1
    df_within = all_values.size - len(arrays)
    if ss_between == 0.0:
        return AnovaResult(F=0.0, df_between=df_between, df_within=df_within, p=1.0)
    if ss_within == 0.0:
        return AnovaResult(F=math.inf, df_between=df_between, df_within=df_within, p=0.0)
    f = (ss_between / df_between) / (ss_within / df_within)
    p = float(sps.f.sf(f, df_between, df_within))
    return AnovaResult(F=f, df_between=df_between, df_within=df_within, p=p)


def bonferroni(p: float, n_comparisons: int) -> float:
    """Bonferroni-corrected p-value, capped at 1."""
    if n_comparisons < 1:
        raise ValueError(f"n_comparisons must be >= 1, got {n_comparisons}")
    return min(1.0, p * n_comparisons)
