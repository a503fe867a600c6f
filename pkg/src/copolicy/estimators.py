"""Weighted least-squares estimators with cluster-robust inference.

Two model classes, each in a correct and a misspecified variant:

* AR: regress y_star on change-coded policy exposures, the covariate, the
  lagged outcome, and year dummies. The first panel year is dropped (no
  lag exists). The lag term absorbs unit-level persistence, so there are
  no unit dummies.
* DID: classic two-way fixed effects; level-coded policy exposures, the
  covariate, unit dummies and year dummies.

The misspecified variant omits the co-occurring (secondary) policy column.
Population analytic weights are the default for both classes; standard
errors cluster at the unit level with G-1 degrees of freedom.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from scipy import linalg as sla
from scipy import special, stats
from scipy.linalg import lapack

from .errors import InvalidConfig, RankDeficient, TooFewClusters, TooFewYears
from .effects import TreatedPanel
from .policy import ExposureMatrix

MODEL_CLASSES = ("AR", "DID")
SPECIFICATIONS = ("correct", "misspecified")
WEIGHTINGS = ("population", "unweighted")
SE_TYPES = ("cluster_robust", "iid")

# Reciprocal condition number below this is treated as rank deficiency:
# an explicit failure beats a silently unstable solve.
RCOND_THRESHOLD = 1e-10


@dataclass(frozen=True)
class ModelSpec:
    model_class: str = "AR"
    specification: str = "correct"
    weighting: str = "population"
    se_type: str = "cluster_robust"
    alpha: float = 0.05

    def __post_init__(self):
        if self.model_class not in MODEL_CLASSES:
            raise InvalidConfig(f"model_class must be one of {MODEL_CLASSES}")
        if self.specification not in SPECIFICATIONS:
            raise InvalidConfig(f"specification must be one of {SPECIFICATIONS}")
        if self.weighting not in WEIGHTINGS:
            raise InvalidConfig(f"weighting must be one of {WEIGHTINGS}")
        if self.se_type not in SE_TYPES:
            raise InvalidConfig(f"se_type must be one of {SE_TYPES}")
        if not 0.0 < self.alpha < 1.0:
            raise InvalidConfig("alpha must be in (0, 1)")

    @property
    def includes_secondary(self) -> bool:
        return self.specification == "correct"


@dataclass
class DesignMatrix:
    """Stacked regression problem with role-labelled columns."""

    y: np.ndarray
    X: np.ndarray
    columns: list[str]            # role labels, e.g. policy1, lag, year:2004, unit:U07
    weights: np.ndarray
    cluster_ids: np.ndarray       # integer unit index per row

    def col(self, role: str) -> int:
        return self.columns.index(role)


@dataclass(frozen=True)
class CoefInference:
    estimate: float
    se: float
    ci_low: float
    ci_high: float
    p_value: float


@dataclass(frozen=True)
class FitResult:
    spec: ModelSpec
    primary: CoefInference
    secondary: Optional[CoefInference]   # None under the misspecified variant
    covariate_coef: float
    lag_coef: Optional[float]            # AR only
    year_effects: np.ndarray
    unit_effects: Optional[np.ndarray]   # DID only
    intercept: float
    cov: np.ndarray                      # full coefficient covariance
    residuals: np.ndarray
    n_obs: int
    n_clusters: int
    df: int


def _design_template(panel, spec: ModelSpec) -> dict:
    """Constant parts of the design for one (panel, model variant) pair.

    Covariate, intercept, and dummy columns do not change across
    replications; only the policy columns, the lag column, and the
    response do. The template is cached on the panel instance.
    """
    cache = getattr(panel, "_design_cache", None)
    if cache is None:
        cache = {}
        panel._design_cache = cache
    key = (spec.model_class, spec.specification, spec.weighting)
    if key in cache:
        return cache[key]

    n, t = panel.n_units, panel.n_years
    t_kept = t - 1 if spec.model_class == "AR" else t
    keep = slice(t - t_kept, t)
    years_kept = panel.years[keep]
    nt = n * t_kept

    names = ["policy1"]
    if spec.includes_secondary:
        names.append("policy2")
    names.append("covariate")
    if spec.model_class == "AR":
        names.append("lag")
    names.append("intercept")
    names += [f"year:{int(years_kept[j])}" for j in range(1, t_kept)]
    if spec.model_class == "DID":
        names += [f"unit:{u}" for u in panel.unit_ids[1:]]

    X = np.zeros((nt, len(names)))
    col = {name: j for j, name in enumerate(names)}
    X[:, col["covariate"]] = panel.covariate[:, keep].ravel()
    X[:, col["intercept"]] = 1.0
    year_pos = np.tile(np.arange(t_kept), n)
    for j in range(1, t_kept):
        X[year_pos == j, col[f"year:{int(years_kept[j])}"]] = 1.0
    if spec.model_class == "DID":
        unit_pos = np.repeat(np.arange(n), t_kept)
        for i in range(1, n):
            X[unit_pos == i, col[f"unit:{panel.unit_ids[i]}"]] = 1.0

    if spec.weighting == "population":
        weights = panel.population[:, keep].ravel()
    else:
        weights = np.ones(nt)
    template = {
        "X": X, "names": names, "col": col, "keep": keep, "t_kept": t_kept,
        "weights": weights, "cluster_ids": np.repeat(np.arange(n), t_kept),
    }
    cache[key] = template
    return template


def build_design(tpanel: TreatedPanel, exposures: ExposureMatrix, spec: ModelSpec) -> DesignMatrix:
    """Assemble the design matrix for one model variant.

    AR keeps years 2..T (first year lost to the lag) with change-coded
    policy terms; DID keeps all years with level coding plus unit dummies.
    The first included year and the first unit are the dropped reference
    categories; the intercept absorbs them.
    """
    panel = tpanel.panel
    t = panel.n_years
    if spec.model_class == "AR" and t < 2:
        raise TooFewYears("AR design needs at least 2 years")

    tpl = _design_template(panel, spec)
    keep = tpl["keep"]
    X = tpl["X"].copy()
    col = tpl["col"]

    if spec.model_class == "AR":
        X[:, col["policy1"]] = exposures.da1[:, keep].ravel()
        if spec.includes_secondary:
            X[:, col["policy2"]] = exposures.da2[:, keep].ravel()
        X[:, col["lag"]] = tpanel.y_star[:, 0:t - 1].ravel()
    else:
        X[:, col["policy1"]] = exposures.a1[:, keep].ravel()
        if spec.includes_secondary:
            X[:, col["policy2"]] = exposures.a2[:, keep].ravel()

    y = tpanel.y_star[:, keep].ravel()
    return DesignMatrix(y=y, X=X, columns=list(tpl["names"]), weights=tpl["weights"],
                        cluster_ids=tpl["cluster_ids"])


def fit_wls(design: DesignMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Solve min sum w_i (y_i - x_i'b)^2 via QR on the weighted design.

    Returns (coefficients, bread) where bread = (X'WX)^-1, the factor both
    covariance estimators need. Weights are normalized to mean 1 first;
    coefficients and all downstream inference are invariant to weight scale.
    """
    w = np.asarray(design.weights, dtype=np.float64)
    if np.any(w <= 0):
        raise InvalidConfig("weights must be positive")
    w = w / w.mean()
    sw = np.sqrt(w)
    Xw = design.X * sw[:, np.newaxis]
    yw = design.y * sw

    Q, R = np.linalg.qr(Xw)
    # LAPACK reciprocal condition estimate of the triangular factor; the
    # condition of R equals that of the weighted design.
    rcond, info = lapack.dtrcon(R, norm="1", uplo="U", diag="N")
    if info != 0 or not np.isfinite(rcond) or rcond < RCOND_THRESHOLD:
        raise RankDeficient(f"design rcond {rcond:.2e} below {RCOND_THRESHOLD:.0e}")
    beta = sla.solve_triangular(R, Q.T @ yw)
    rinv = sla.solve_triangular(R, np.eye(R.shape[0]))
    bread = rinv @ rinv.T
    return beta, bread


def cluster_robust_cov(
    design: DesignMatrix,
    residuals: np.ndarray,
    bread: np.ndarray,
) -> np.ndarray:
    """Sandwich covariance with cluster-level score sums.

    Small-sample factor G/(G-1) * (N-1)/(N-K). With one observation per
    cluster this reduces to the HC1-scaled heteroskedasticity-robust
    covariance. Weights enter the scores as w_i * x_i * e_i, matching the
    normalized weights used by fit_wls, so the result is weight-scale
    invariant.
    """
    clusters = np.asarray(design.cluster_ids)
    labels = np.unique(clusters)
    g = len(labels)
    if g < 2:
        raise TooFewClusters("cluster-robust covariance needs >= 2 clusters")

    n, k = design.X.shape
    w = design.weights / design.weights.mean()
    scores = design.X * (w * residuals)[:, np.newaxis]
    if np.all(clusters[1:] >= clusters[:-1]):
        starts = np.flatnonzero(np.r_[True, clusters[1:] != clusters[:-1]])
        group_sums = np.add.reduceat(scores, starts, axis=0)
    else:
        group_sums = np.zeros((g, k))
        np.add.at(group_sums, np.searchsorted(labels, clusters), scores)
    meat = group_sums.T @ group_sums
    factor = (g / (g - 1.0)) * ((n - 1.0) / (n - k))
    cov = factor * (bread @ meat @ bread)
    return (cov + cov.T) / 2.0


def iid_cov(design: DesignMatrix, residuals: np.ndarray, bread: np.ndarray) -> np.ndarray:
    """Classical model-based covariance sigma^2 (X'WX)^-1."""
    n, k = design.X.shape
    w = design.weights / design.weights.mean()
    sigma2 = float(np.sum(w * residuals**2) / (n - k))
    return sigma2 * bread


@lru_cache(maxsize=64)
def _t_critical(alpha: float, df: int) -> float:
    return float(stats.t.ppf(1.0 - alpha / 2.0, df))


def _t_two_sided_p(tstat: float, df: int) -> float:
    # stdtr is the t CDF; cheaper than stats.t.sf's argument machinery.
    return float(2.0 * special.stdtr(df, -abs(tstat)))


def fit_policy_model(tpanel: TreatedPanel, exposures: ExposureMatrix, spec: ModelSpec) -> FitResult:
    """Fit one model variant and return coefficient-level inference.

    Confidence intervals and p-values use t critical values with
    df = n_clusters - 1 (cluster-robust) or n_obs - n_params (iid).
    """
    design = build_design(tpanel, exposures, spec)
    beta, bread = fit_wls(design)
    residuals = design.y - design.X @ beta

    if spec.se_type == "cluster_robust":
        cov = cluster_robust_cov(design, residuals, bread)
        n_clusters = len(np.unique(design.cluster_ids))
        df = n_clusters - 1
    else:
        cov = iid_cov(design, residuals, bread)
        n_clusters = len(np.unique(design.cluster_ids))
        df = design.X.shape[0] - design.X.shape[1]

    tcrit = _t_critical(spec.alpha, df)

    def infer(role: str) -> CoefInference:
        j = design.col(role)
        est = float(beta[j])
        se = float(np.sqrt(cov[j, j]))
        tstat = est / se if se > 0 else np.inf * np.sign(est) if est != 0 else 0.0
        p = _t_two_sided_p(tstat, df) if np.isfinite(tstat) else 0.0
        return CoefInference(est, se, est - tcrit * se, est + tcrit * se, p)

    year_idx = [j for j, c in enumerate(design.columns) if c.startswith("year:")]
    unit_idx = [j for j, c in enumerate(design.columns) if c.startswith("unit:")]

    return FitResult(
        spec=spec,
        primary=infer("policy1"),
        secondary=infer("policy2") if spec.includes_secondary else None,
        covariate_coef=float(beta[design.col("covariate")]),
        lag_coef=float(beta[design.col("lag")]) if spec.model_class == "AR" else None,
        year_effects=beta[year_idx].copy(),
        unit_effects=beta[unit_idx].copy() if unit_idx else None,
        intercept=float(beta[design.col("intercept")]),
        cov=cov,
        residuals=residuals,
        n_obs=design.X.shape[0],
        n_clusters=n_clusters,
        df=df,
    )
