"""Run configuration: TOML files for the CLI, JSON bodies for the service.

One pydantic schema family covers both entry points so a scenario submitted
through the HTTP API validates exactly like a config file. Unknown keys are
rejected (extra="forbid") and the offending key is named in the error.
"""

from __future__ import annotations

import os
from typing import Literal, Optional, Union

try:
    import tomllib  # Python >= 3.11
except ModuleNotFoundError:
    import tomli as tomllib

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from .errors import InvalidConfig
from .estimators import ModelSpec
from .panel import Panel, SynthConfig, load_panel, synth_panel
from .policy import GapCondition, PhaseIn
from .runner import GridSpec, PolicyScenario

GapValue = Union[str, tuple[float, float]]


def _parse_gap(value: GapValue) -> GapCondition:
    if isinstance(value, str):
        return GapCondition.from_label(value)
    lo, hi = value
    return GapCondition.custom(float(lo), float(hi))


class PanelSection(BaseModel):
    """Where the null panel comes from: the synthetic generator or a CSV."""

    model_config = ConfigDict(extra="forbid")

    source: Literal["synth", "csv"] = "synth"
    path: Optional[str] = None
    schema_map: Optional[dict[str, str]] = None  # canonical name -> CSV column
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

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            n_units=self.n_units, n_years=self.n_years, base_rate=self.base_rate,
            trend_per_year=self.trend_per_year, ar1_coef=self.ar1_coef, noise_sd=self.noise_sd,
            covariate_mean=self.covariate_mean, covariate_sd=self.covariate_sd,
            population_log_mean=self.population_log_mean, population_log_sd=self.population_log_sd,
            first_year=self.first_year, seed=self.seed,
        )

    def load(self) -> Panel:
        if self.source == "csv":
            if not self.path:
                raise InvalidConfig("panel.source = 'csv' requires panel.path")
            return load_panel(self.path, schema=self.schema_map)
        return synth_panel(self.synth_config())


class GridSection(BaseModel):
    """Factor lists for the scenario grid."""

    model_config = ConfigDict(extra="forbid")

    effects: list[tuple[float, float]] = Field(default=[(-0.10, -0.10)])
    gaps: list[GapValue] = Field(default=["C1", "C2", "C3", "C4"])
    n_treated: list[int] = Field(default=[30])
    phase_ins: list[Literal["instantaneous", "linear_3yr"]] = Field(default=["instantaneous"])
    orderings: list[Literal["random", "primary_first"]] = Field(default=["random"])
    models: list[tuple[Literal["AR", "DID"], Literal["correct", "misspecified"]]] = Field(
        default=[("AR", "correct")])
    scale_mode: Literal["unit_mean", "grand_mean"] = "unit_mean"
    weighting: Literal["population", "unweighted"] = "population"
    se_type: Literal["cluster_robust", "iid"] = "cluster_robust"
    alpha: float = 0.05

    def grid_spec(self) -> GridSpec:
        return GridSpec(
            effects=tuple((float(a), float(b)) for a, b in self.effects),
            gaps=tuple(_parse_gap(g) for g in self.gaps),
            n_treated=tuple(self.n_treated),
            phase_ins=tuple(PhaseIn(p) for p in self.phase_ins),
            orderings=tuple(self.orderings),
            models=tuple(ModelSpec(mc, sp, weighting=self.weighting,
                                   se_type=self.se_type, alpha=self.alpha)
                         for mc, sp in self.models),
            scale_mode=self.scale_mode,
        )


class RunSection(BaseModel):
    model_config = ConfigDict(extra="forbid")

    n_reps: int = Field(default=5000, ge=1)
    master_seed: int = Field(default=0, ge=0, lt=2**64)
    workers: int = Field(default=0, ge=0)  # 0 = COPOLICY_WORKERS env or cpu count
    output_dir: str = "results"
    keep_reps: bool = False


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    panel: PanelSection = Field(default_factory=PanelSection)
    grid: GridSection = Field(default_factory=GridSection)
    run: RunSection = Field(default_factory=RunSection)

    def resolve_workers(self) -> int:
        if self.run.workers > 0:
            return self.run.workers
        env = os.environ.get("COPOLICY_WORKERS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                raise InvalidConfig(f"COPOLICY_WORKERS must be an integer, got {env!r}") from None
        return max(1, os.cpu_count() or 1)


def format_validation_error(exc: ValidationError) -> str:
    """One line per problem, naming the offending key path."""
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        if err["type"] == "extra_forbidden":
            lines.append(f"unknown key: {loc}")
        else:
            lines.append(f"{loc}: {err['msg']}")
    return "\n".join(lines)


def load_run_config(path) -> RunConfig:
    """Parse and validate a TOML run config; InvalidConfig on any problem."""
    try:
        with open(path, "rb") as f:
            raw = tomllib.load(f)
    except FileNotFoundError:
        raise InvalidConfig(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as exc:
        raise InvalidConfig(f"config parse error: {exc}") from None
    try:
        return RunConfig.model_validate(raw)
    except ValidationError as exc:
        raise InvalidConfig(format_validation_error(exc)) from None


class ScenarioRequest(BaseModel):
    """A single scenario, as submitted by the explorer UI."""

    model_config = ConfigDict(extra="forbid")

    effect_primary: float = Field(default=-0.10, ge=-1.0, le=1.0)
    effect_secondary: float = Field(default=-0.10, ge=-1.0, le=1.0)
    gap: GapValue = "C1"
    n_treated: int = Field(default=30, ge=1)
    phase_in: Literal["instantaneous", "linear_3yr"] = "instantaneous"
    ordering: Literal["random", "primary_first"] = "random"
    model_class: Literal["AR", "DID"] = "AR"
    specification: Literal["correct", "misspecified"] = "correct"
    n_reps: int = Field(default=500, ge=2, le=20000)
    seed: int = Field(default=0, ge=0, lt=2**64)
    scale_mode: Literal["unit_mean", "grand_mean"] = "unit_mean"
    weighting: Literal["population", "unweighted"] = "population"
    se_type: Literal["cluster_robust", "iid"] = "cluster_robust"
    alpha: float = Field(default=0.05, gt=0.0, lt=1.0)

    def scenario(self) -> PolicyScenario:
        return PolicyScenario(
            effect_primary=self.effect_primary,
            effect_secondary=self.effect_secondary,
            gap=_parse_gap(self.gap),
            n_treated=self.n_treated,
            phase_in=PhaseIn(self.phase_in),
            ordering=self.ordering,
            model=ModelSpec(self.model_class, self.specification, weighting=self.weighting,
                            se_type=self.se_type, alpha=self.alpha),
            n_reps=self.n_reps,
            master_seed=self.seed,
            scale_mode=self.scale_mode,
        )

    def cache_key_payload(self) -> dict:
        payload = self.model_dump()
        if not isinstance(payload["gap"], str):
            payload["gap"] = list(payload["gap"])
        return payload
