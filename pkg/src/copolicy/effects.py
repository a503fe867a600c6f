"""Apply simulated policy effects to the null panel.

Observed outcomes are y_star = outcome + te1*a1 + te2*a2 per unit-year,
where the te's are the percentage effects converted to the rate scale.
Effects are additive across policies and left untruncated (a large negative
effect on a low-rate unit can push y_star below zero; truncating would
distort the known truth the metrics compare against).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidConfig, MissingExposure
from .panel import Panel, PanelSummary
from .policy import ExposureMatrix

SCALE_MODES = ("unit_mean", "grand_mean")


@dataclass(frozen=True)
class EffectSpec:
    """Policy effects as proportions (e.g. -0.10 for a 10% reduction).

    scale_mode picks the base the percentage applies to: each treated
    unit's own panel-mean outcome (unit_mean) or the panel grand mean.
    """

    pct_primary: float
    pct_secondary: float
    scale_mode: str = "unit_mean"

    def __post_init__(self):
        for name, v in (("pct_primary", self.pct_primary), ("pct_secondary", self.pct_secondary)):
            if not -1.0 <= v <= 1.0:
                raise InvalidConfig(f"{name} must be in [-1, 1], got {v}")
        if self.scale_mode not in SCALE_MODES:
            raise InvalidConfig(f"scale_mode must be one of {SCALE_MODES}")

    @property
    def is_null(self) -> bool:
        return self.pct_primary == 0.0 and self.pct_secondary == 0.0


@dataclass(frozen=True)
class TreatedPanel:
    """Null panel plus observed outcomes and the per-unit rate-scale truths."""

    panel: Panel
    y_star: np.ndarray   # (n_units, n_years)
    te1: np.ndarray      # (n_units,), zero for comparison units
    te2: np.ndarray


def true_effect_on_rate(spec: EffectSpec, scale: float) -> tuple[float, float]:
    """Convert percentage effects to the rate scale for a given base level."""
    return spec.pct_primary * scale, spec.pct_secondary * scale


def apply_effects(
    panel: Panel,
    exposures: ExposureMatrix,
    spec: EffectSpec,
    summary: PanelSummary,
) -> TreatedPanel:
    """Produce observed outcomes y_star = outcome + te1*a1 + te2*a2."""
    if exposures.unit_ids != panel.unit_ids or len(exposures.years) != panel.n_years:
        raise MissingExposure("exposure matrix does not align with the panel")

    if spec.scale_mode == "unit_mean":
        scale = summary.unit_means
    else:
        scale = np.full(panel.n_units, summary.grand_mean)

    te1 = np.where(exposures.treated, spec.pct_primary * scale, 0.0)
    te2 = np.where(exposures.treated, spec.pct_secondary * scale, 0.0)
    y_star = panel.outcome + te1[:, np.newaxis] * exposures.a1 + te2[:, np.newaxis] * exposures.a2
    for arr in (y_star, te1, te2):
        arr.setflags(write=False)
    return TreatedPanel(panel=panel, y_star=y_star, te1=te1, te2=te2)
