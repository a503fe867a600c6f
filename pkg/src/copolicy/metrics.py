"""Performance metrics aggregated over Monte Carlo replications.

Six metrics per scenario/estimator/policy: bias (rate scale, plus an
effect-size version for null settings and a percent-relative version for
non-null), variance (both the mean of squared SEs and the empirical
dispersion of estimates), RMSE, Type I rate (null only), Type S rate
(significant with the wrong sign, non-null only), and 95% CI coverage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import EmptyInput, InvalidConfig, MixedTruths

# Relative-bias bands (percent, non-null settings): <5 none, 5-10 small,
# 10-20 moderate, >20 large. Effect-size bands (null settings): <0.2 none,
# 0.2-0.4 moderate, >=0.4 large. Boundaries belong to the higher category.
REL_BIAS_BAND_EDGES_PCT = (5.0, 10.0, 20.0)
STD_BIAS_BAND_EDGES = (0.2, 0.4)


@dataclass(frozen=True)
class ReplicationRecord:
    estimate: float
    se: float
    ci_low: float
    ci_high: float
    p_value: float
    truth: float

    def __post_init__(self):
        if self.ci_low > self.ci_high:
            raise InvalidConfig(f"ci_low {self.ci_low} > ci_high {self.ci_high}")


@dataclass(frozen=True)
class MetricSummary:
    n_reps: int
    truth: float
    bias: float
    std_bias: Optional[float]      # null settings only (bias / outcome SD)
    rel_bias_pct: Optional[float]  # non-null settings only
    var_model: float               # mean of squared SEs
    var_empirical: float           # variance of point estimates (ddof=1)
    rmse: float
    type1_rate: Optional[float]    # null settings only
    typeS_rate: Optional[float]    # non-null settings only
    coverage: float


def summarize(
    records: Sequence[ReplicationRecord],
    truth_is_null: bool,
    sd_scale: Optional[float] = None,
    alpha: float = 0.05,
) -> MetricSummary:
    """Aggregate replication records for one scenario/estimator/policy.

    All records must share the same truth. For null settings sd_scale (the
    null panel's outcome SD) converts bias to the effect-size scale. The
    relative-bias sign convention: positive means overestimated in the
    truth's direction.
    """
    n = len(records)
    if n < 2:
        raise EmptyInput(f"need at least 2 records, got {n}")
    truths = {r.truth for r in records}
    if len(truths) > 1:
        raise MixedTruths(f"records carry {len(truths)} distinct truth values")
    truth = records[0].truth
    if truth_is_null and truth != 0.0:
        raise InvalidConfig(f"truth_is_null but truth={truth}")
    if truth_is_null and (sd_scale is None or sd_scale <= 0):
        raise InvalidConfig("null settings need a positive sd_scale")

    est = np.array([r.estimate for r in records])
    se = np.array([r.se for r in records])
    lo = np.array([r.ci_low for r in records])
    hi = np.array([r.ci_high for r in records])
    p = np.array([r.p_value for r in records])

    # Canonical ordering makes the floating-point reductions exactly
    # permutation-invariant, not just up to rounding.
    order = np.lexsort((p, hi, lo, se, est))
    est, se, lo, hi, p = est[order], se[order], lo[order], hi[order], p[order]

    bias = float(est.mean() - truth)
    rmse = float(np.sqrt(np.mean((est - truth) ** 2)))
    coverage = float(np.count_nonzero((lo <= truth) & (truth <= hi))) / n

    std_bias = rel_bias = type1 = type_s = None
    if truth_is_null:
        std_bias = bias / sd_scale
        type1 = float(np.count_nonzero(p < alpha)) / n
    else:
        rel_bias = 100.0 * bias / truth
        if truth < 0:
            wrong_sign = lo > 0
        else:
            wrong_sign = hi < 0
        type_s = float(np.count_nonzero(wrong_sign)) / n

    return MetricSummary(
        n_reps=n,
        truth=truth,
        bias=bias,
        std_bias=std_bias,
        rel_bias_pct=rel_bias,
        var_model=float(np.mean(se**2)),
        var_empirical=float(np.var(est, ddof=1)),
        rmse=rmse,
        type1_rate=type1,
        typeS_rate=type_s,
        coverage=coverage,
    )


def classify_bias(value: float, regime: str) -> str:
    """Band label for a bias value; |value| compared against the regime's edges.

    regime 'non_null' takes percent relative bias, 'null' takes effect-size
    bias. Boundary values fall in the higher category.
    """
    v = abs(value)
    if regime == "non_null":
        if v < REL_BIAS_BAND_EDGES_PCT[0]:
            return "none"
        if v < REL_BIAS_BAND_EDGES_PCT[1]:
            return "small"
        if v < REL_BIAS_BAND_EDGES_PCT[2]:
            return "moderate"
        return "large"
    if regime == "null":
        if v < STD_BIAS_BAND_EDGES[0]:
            return "none"
        if v < STD_BIAS_BAND_EDGES[1]:
            return "moderate"
        return "large"
    raise InvalidConfig(f"regime must be 'null' or 'non_null', got {regime!r}")
