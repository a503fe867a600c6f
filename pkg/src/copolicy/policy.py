"""Treated-unit sampling, enactment-date draws, and exposure coding.

Two policies are simulated per treated unit: a primary and a co-occurring
secondary, separated by a gap drawn from one of four conditions. Exposure
is coded per calendar year as the fraction of the year the policy was in
effect (instantaneous) or the year-average of a 3-year linear ramp
(phase-in). Change coding (a_t - a_{t-1}) feeds the autoregressive models;
levels feed the two-way fixed-effects models.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from .errors import InfeasibleWindow, InvalidConfig, KTooLarge

# Margins for the enactment window: at least 2 full pre-period years before
# the earlier policy and at least 1 full year after the later one.
PRE_MARGIN_YEARS = 2.0
POST_MARGIN_YEARS = 1.0


@dataclass(frozen=True)
class GapCondition:
    """Interval (in years) for the gap between the two enactment dates.

    gap_low == gap_high is allowed as a degenerate point mass (used for the
    simultaneity limit where both policies share one date); the four named
    conditions are strict intervals.
    """

    label: str
    gap_low: float
    gap_high: float

    def __post_init__(self):
        if self.gap_low < 0 or self.gap_low > self.gap_high:
            raise InvalidConfig(f"need 0 <= gap_low <= gap_high, got [{self.gap_low}, {self.gap_high})")

    @classmethod
    def from_label(cls, label: str) -> "GapCondition":
        try:
            return CONDITIONS[label.upper()]
        except KeyError:
            raise InvalidConfig(f"unknown gap condition {label!r}; expected one of {sorted(CONDITIONS)}") from None

    @classmethod
    def custom(cls, gap_low: float, gap_high: float) -> "GapCondition":
        return cls(f"g{gap_low:g}-{gap_high:g}", gap_low, gap_high)


CONDITIONS: Mapping[str, GapCondition] = {
    "C1": GapCondition("C1", 0.0, 1.0),
    "C2": GapCondition("C2", 3.0, 4.0),
    "C3": GapCondition("C3", 6.0, 7.0),
    "C4": GapCondition("C4", 9.0, 10.0),
}


class PhaseIn(enum.Enum):
    INSTANTANEOUS = "instantaneous"
    LINEAR_3YR = "linear_3yr"


PHASE_IN_RAMP_YEARS = 3.0


@dataclass(frozen=True)
class EnactmentPair:
    """Continuous enactment times for the primary and secondary policy."""

    t_primary: float
    t_secondary: float

    @property
    def gap(self) -> float:
        return abs(self.t_secondary - self.t_primary)

    @property
    def primary_first(self) -> bool:
        return self.t_primary <= self.t_secondary


def assign_treated(unit_ids: Sequence[str], k: int, rng: np.random.Generator) -> list[str]:
    """Sample k distinct treated units uniformly without replacement.

    Returned sorted so downstream iteration order is deterministic.
    """
    if k < 1:
        raise InvalidConfig("k must be >= 1")
    if k > len(unit_ids):
        raise KTooLarge(f"k={k} exceeds {len(unit_ids)} units")
    chosen = rng.choice(len(unit_ids), size=k, replace=False)
    return sorted(unit_ids[i] for i in chosen)


def enactment_window(cond: GapCondition, first_year: int, last_year: int) -> tuple[float, float]:
    """Feasible interval for the earlier enactment time, or raise."""
    lo = first_year + PRE_MARGIN_YEARS
    hi = last_year - cond.gap_high - POST_MARGIN_YEARS
    if hi < lo:
        raise InfeasibleWindow(
            f"panel {first_year}-{last_year} too short for gaps up to {cond.gap_high} years "
            f"with {PRE_MARGIN_YEARS:g}y pre / {POST_MARGIN_YEARS:g}y post margins"
        )
    return lo, hi


def sample_enactments(
    cond: GapCondition,
    ordering: str,
    window: tuple[int, int],
    rng: np.random.Generator,
) -> EnactmentPair:
    """Draw one enactment pair.

    The gap is Uniform[gap_low, gap_high), the earlier date uniform over the
    feasible window; under random ordering the primary policy comes first
    with probability 1/2, under primary_first always.
    """
    if ordering not in ("random", "primary_first"):
        raise InvalidConfig(f"unknown ordering {ordering!r}")
    lo, hi = enactment_window(cond, *window)
    gap = rng.uniform(cond.gap_low, cond.gap_high)
    earlier = rng.uniform(lo, hi)
    primary_first = True if ordering == "primary_first" else bool(rng.random() < 0.5)
    if primary_first:
        return EnactmentPair(t_primary=earlier, t_secondary=earlier + gap)
    return EnactmentPair(t_primary=earlier + gap, t_secondary=earlier)


def code_exposure(enact_time: float, phase_in: PhaseIn, years: np.ndarray) -> np.ndarray:
    """Per-year exposure in [0, 1] for a policy enacted at a continuous time.

    Instantaneous: fraction of the calendar year at or after enact_time.
    Linear 3-year phase-in: time-average over the year of the ramp
    clip((tau - enact_time)/3, 0, 1).
    """
    y = np.asarray(years, dtype=np.float64)
    if phase_in is PhaseIn.INSTANTANEOUS:
        return np.clip(y + 1.0 - enact_time, 0.0, 1.0)

    # Integral of the ramp over [y, y+1): linear part on [a, b] plus the
    # saturated tail beyond enact_time + 3.
    e = enact_time
    a = np.maximum(y, e)
    b = np.minimum(y + 1.0, e + PHASE_IN_RAMP_YEARS)
    linear = np.where(b > a, ((b - e) ** 2 - (a - e) ** 2) / (2.0 * PHASE_IN_RAMP_YEARS), 0.0)
    saturated = np.clip(y + 1.0 - (e + PHASE_IN_RAMP_YEARS), 0.0, 1.0)
    return np.clip(linear + saturated, 0.0, 1.0)


def change_code(series: np.ndarray) -> np.ndarray:
    """First differences with the pre-panel value defined as 0."""
    return np.diff(np.asarray(series, dtype=np.float64), prepend=0.0)


@dataclass(frozen=True)
class ExposureMatrix:
    """Exposure levels and deltas for both policies, all units x all years.

    Comparison units are all-zero rows. Unit order matches the panel.
    """

    unit_ids: tuple[str, ...]
    years: np.ndarray
    treated: np.ndarray  # bool, (n_units,)
    a1: np.ndarray       # (n_units, n_years)
    a2: np.ndarray
    da1: np.ndarray
    da2: np.ndarray

    def treated_ids(self) -> list[str]:
        return [u for u, t in zip(self.unit_ids, self.treated) if t]


def build_exposures(
    unit_ids: Sequence[str],
    years: np.ndarray,
    enactments: Mapping[str, EnactmentPair],
    phase_in: PhaseIn,
) -> ExposureMatrix:
    """Code both policies for every treated unit; comparison units stay zero."""
    unit_ids = tuple(unit_ids)
    n, t = len(unit_ids), len(years)
    a1 = np.zeros((n, t))
    a2 = np.zeros((n, t))
    treated = np.zeros(n, dtype=bool)
    index = {u: i for i, u in enumerate(unit_ids)}
    for unit, pair in enactments.items():
        i = index[unit]
        treated[i] = True
        a1[i] = code_exposure(pair.t_primary, phase_in, years)
        a2[i] = code_exposure(pair.t_secondary, phase_in, years)
    da1 = np.diff(a1, axis=1, prepend=0.0)
    da2 = np.diff(a2, axis=1, prepend=0.0)
    for arr in (a1, a2, da1, da2, treated):
        arr.setflags(write=False)
    return ExposureMatrix(unit_ids, np.asarray(years), treated, a1, a2, da1, da2)
