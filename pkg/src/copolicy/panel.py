"""Balanced unit-by-year panels: CSV ingestion, synthesis, and summaries.

A Panel is the null-condition outcome table every simulation starts from:
one row per (unit, year) with an outcome rate, one covariate, and a
population used as an analytic weight. Balance (every unit observed in
every year) is enforced at construction; downstream modules rely on it.
"""

from __future__ import annotations

import csv
import hashlib
import io
from dataclasses import dataclass, field
from typing import Iterator, Mapping, Optional, Sequence

import numpy as np

from .errors import InvalidConfig, InvalidValue, ParseError, UnbalancedPanel

DEFAULT_SCHEMA = {
    "unit": "unit",
    "year": "year",
    "outcome_rate": "outcome_rate",
    "covariate": "covariate",
    "population": "population",
}


@dataclass(frozen=True)
class UnitYearRow:
    unit_id: str
    year: int
    outcome_rate: float
    covariate: float
    population: float


class Panel:
    """Immutable balanced panel stored as (n_units, n_years) arrays.

    Rows are ordered by (unit_id, year). Arrays are locked after
    construction so panels can be shared across worker processes.
    """

    def __init__(
        self,
        unit_ids: Sequence[str],
        years: Sequence[int],
        outcome: np.ndarray,
        covariate: np.ndarray,
        population: np.ndarray,
    ):
        self.unit_ids = tuple(str(u) for u in unit_ids)
        self.years = np.asarray(years, dtype=np.int64)
        self.outcome = np.asarray(outcome, dtype=np.float64)
        self.covariate = np.asarray(covariate, dtype=np.float64)
        self.population = np.asarray(population, dtype=np.float64)

        n_units, n_years = len(self.unit_ids), len(self.years)
        for name, arr in (("outcome", self.outcome), ("covariate", self.covariate), ("population", self.population)):
            if arr.shape != (n_units, n_years):
                raise InvalidValue(f"{name} array has shape {arr.shape}, expected {(n_units, n_years)}")
        if len(set(self.unit_ids)) != n_units:
            raise InvalidValue("duplicate unit ids")
        if np.any(np.diff(self.years) != 1):
            raise InvalidValue("years must be contiguous")
        if np.any(self.outcome < 0):
            raise InvalidValue("outcome_rate must be nonnegative")
        if np.any(self.population <= 0):
            raise InvalidValue("population must be positive")

        for arr in (self.years, self.outcome, self.covariate, self.population):
            arr.setflags(write=False)

    @property
    def n_units(self) -> int:
        return len(self.unit_ids)

    @property
    def n_years(self) -> int:
        return len(self.years)

    @property
    def year_range(self) -> tuple[int, int]:
        return int(self.years[0]), int(self.years[-1])

    @property
    def n_rows(self) -> int:
        return self.n_units * self.n_years

    def rows(self) -> Iterator[UnitYearRow]:
        for i, unit in enumerate(self.unit_ids):
            for j, year in enumerate(self.years):
                yield UnitYearRow(unit, int(year), float(self.outcome[i, j]),
                                  float(self.covariate[i, j]), float(self.population[i, j]))

    def digest(self) -> str:
        """SHA-256 of the canonical CSV serialization (used as a cache key)."""
        buf = io.StringIO()
        write_panel(self, buf)
        return hashlib.sha256(buf.getvalue().encode("utf-8")).hexdigest()

    def __eq__(self, other) -> bool:
        if not isinstance(other, Panel):
            return NotImplemented
        return (
            self.unit_ids == other.unit_ids
            and np.array_equal(self.years, other.years)
            and np.array_equal(self.outcome, other.outcome)
            and np.array_equal(self.covariate, other.covariate)
            and np.array_equal(self.population, other.population)
        )


@dataclass(frozen=True)
class PanelSummary:
    unit_means: np.ndarray  # mean outcome per unit, over years
    grand_mean: float       # mean outcome over all unit-years
    outcome_sd: float       # SD over all unit-years (ddof=1)


@dataclass(frozen=True)
class SynthConfig:
    """Parameters for the synthetic null-condition panel generator.

    Each unit's outcome follows base_rate + trend_per_year*t plus an AR(1)
    deviation with innovation SD noise_sd plus white rate-measurement noise
    (annual rates are ratios of small counts, so they jitter around the
    latent level), truncated at zero. The measurement SD is tied to noise_sd
    at a fixed 2:1 split (MEASUREMENT_NOISE_FRAC), so noise_sd=0 still
    yields the exact deterministic trend path. Defaults are calibrated to
    look like an opioid-mortality state panel: rates around 10 per 100k
    trending upward, an unemployment-like covariate, log-normal populations
    held constant within unit.
    """

    n_units: int = 50
    n_years: int = 18
    base_rate: float = 10.0
    trend_per_year: float = 0.35
    ar1_coef: float = 0.9
    noise_sd: float = 0.9
    covariate_mean: float = 5.5
    covariate_sd: float = 1.8
    population_log_mean: float = 15.0
    population_log_sd: float = 0.5
    first_year: int = 1999
    seed: int = 7

    def __post_init__(self):
        if self.n_units < 2:
            raise InvalidConfig("n_units must be >= 2")
        if self.n_years < 4:
            raise InvalidConfig("n_years must be >= 4")
        if self.base_rate <= 0:
            raise InvalidConfig("base_rate must be positive")
        if not -1.0 < self.ar1_coef < 1.0:
            raise InvalidConfig("ar1_coef must be in (-1, 1)")
        if self.noise_sd < 0:
            raise InvalidConfig("noise_sd must be nonnegative")
        if self.seed < 0 or self.seed >= 2**64:
            raise InvalidConfig("seed must be a 64-bit unsigned integer")

    def analytic_mean(self) -> float:
        """Expected grand mean of the untruncated process (truncation at 0 is
        negligible for the default calibration)."""
        return self.base_rate + self.trend_per_year * (self.n_years - 1) / 2.0


MEASUREMENT_NOISE_FRAC = 0.5


def synth_panel(config: SynthConfig) -> Panel:
    """Generate a balanced null-condition panel; pure function of config."""
    rng = np.random.default_rng(config.seed)
    n, t = config.n_units, config.n_years

    population = rng.lognormal(config.population_log_mean, config.population_log_sd, size=n)
    covariate = rng.normal(config.covariate_mean, config.covariate_sd, size=(n, t))

    # AR(1) deviations with a stationary start, so early years are not quieter.
    rho = config.ar1_coef
    stationary_sd = config.noise_sd / np.sqrt(1.0 - rho**2)
    dev = np.empty((n, t))
    dev[:, 0] = rng.normal(0.0, 1.0, size=n) * stationary_sd
    innovations = rng.normal(0.0, config.noise_sd, size=(n, t - 1))
    for j in range(1, t):
        dev[:, j] = rho * dev[:, j - 1] + innovations[:, j - 1]

    measurement = rng.normal(0.0, MEASUREMENT_NOISE_FRAC * config.noise_sd, size=(n, t))
    trend = config.base_rate + config.trend_per_year * np.arange(t)
    outcome = np.maximum(trend[np.newaxis, :] + dev + measurement, 0.0)

    unit_ids = [f"U{i:02d}" for i in range(n)]
    years = np.arange(config.first_year, config.first_year + t)
    pop_matrix = np.repeat(population[:, np.newaxis], t, axis=1)
    return Panel(unit_ids, years, outcome, covariate, pop_matrix)


def load_panel(path, schema: Optional[Mapping[str, str]] = None) -> Panel:
    """Load and validate a panel from CSV.

    ``schema`` maps canonical names (unit, year, outcome_rate, covariate,
    population) to the file's column names. Raises ParseError for malformed
    input, InvalidValue for domain violations, UnbalancedPanel for missing
    unit-year cells.
    """
    colmap = dict(DEFAULT_SCHEMA)
    if schema:
        unknown = set(schema) - set(DEFAULT_SCHEMA)
        if unknown:
            raise InvalidConfig(f"unknown schema keys: {sorted(unknown)}")
        colmap.update(schema)

    if hasattr(path, "read"):
        rows = _read_rows(path, colmap)
    else:
        with open(path, "r", encoding="utf-8", newline="") as f:
            rows = _read_rows(f, colmap)
    return panel_from_rows(rows)


def _read_rows(f, colmap: Mapping[str, str]) -> list[UnitYearRow]:
    reader = csv.DictReader(f)
    if reader.fieldnames is None:
        raise ParseError("empty file")
    missing = [v for v in colmap.values() if v not in reader.fieldnames]
    if missing:
        raise ParseError(f"missing columns: {missing}")

    rows = []
    for lineno, rec in enumerate(reader, start=2):
        try:
            rows.append(UnitYearRow(
                unit_id=rec[colmap["unit"]],
                year=int(rec[colmap["year"]]),
                outcome_rate=float(rec[colmap["outcome_rate"]]),
                covariate=float(rec[colmap["covariate"]]),
                population=float(rec[colmap["population"]]),
            ))
        except (TypeError, ValueError) as exc:
            raise ParseError(f"line {lineno}: {exc}") from exc
    if not rows:
        raise ParseError("no data rows")
    return rows


def panel_from_rows(rows: Sequence[UnitYearRow]) -> Panel:
    """Assemble a Panel from per-cell rows, verifying balance and validity."""
    units = sorted({r.unit_id for r in rows})
    year_lo = min(r.year for r in rows)
    year_hi = max(r.year for r in rows)
    years = np.arange(year_lo, year_hi + 1)
    uidx = {u: i for i, u in enumerate(units)}
    yidx = {int(y): j for j, y in enumerate(years)}

    n, t = len(units), len(years)
    outcome = np.full((n, t), np.nan)
    covariate = np.full((n, t), np.nan)
    population = np.full((n, t), np.nan)
    for r in rows:
        i, j = uidx[r.unit_id], yidx[r.year]
        if not np.isnan(outcome[i, j]):
            raise InvalidValue(f"duplicate cell {r.unit_id}/{r.year}")
        if r.outcome_rate < 0:
            raise InvalidValue(f"negative outcome_rate at {r.unit_id}/{r.year}: {r.outcome_rate}")
        if r.population <= 0:
            raise InvalidValue(f"nonpositive population at {r.unit_id}/{r.year}: {r.population}")
        outcome[i, j] = r.outcome_rate
        covariate[i, j] = r.covariate
        population[i, j] = r.population

    holes = np.argwhere(np.isnan(outcome))
    if len(holes):
        raise UnbalancedPanel((units[i], int(years[j])) for i, j in holes)
    return Panel(units, years, outcome, covariate, population)


def write_panel(panel: Panel, path_or_buf) -> None:
    """Write a panel in the canonical CSV schema (round-trips via load_panel)."""
    def _write(f):
        w = csv.writer(f, lineterminator="\n")
        w.writerow(["unit", "year", "outcome_rate", "covariate", "population"])
        for r in panel.rows():
            w.writerow([r.unit_id, r.year, repr(r.outcome_rate), repr(r.covariate), repr(r.population)])

    if hasattr(path_or_buf, "write"):
        _write(path_or_buf)
    else:
        with open(path_or_buf, "w", encoding="utf-8", newline="") as f:
            _write(f)


def panel_summary(panel: Panel) -> PanelSummary:
    """Per-unit outcome means, grand mean, and all-cell SD (ddof=1)."""
    unit_means = panel.outcome.mean(axis=1)
    unit_means.setflags(write=False)
    return PanelSummary(
        unit_means=unit_means,
        grand_mean=float(panel.outcome.mean()),
        outcome_sd=float(panel.outcome.std(ddof=1)),
    )
