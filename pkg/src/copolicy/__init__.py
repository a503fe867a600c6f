"""Monte Carlo laboratory for co-occurring policy enactments in state panels."""

__version__ = "0.1.0"

from .effects import EffectSpec, TreatedPanel, apply_effects, true_effect_on_rate
from .estimators import DesignMatrix, FitResult, ModelSpec, build_design, cluster_robust_cov, fit_policy_model, fit_wls
from .metrics import MetricSummary, ReplicationRecord, classify_bias, summarize
from .panel import Panel, PanelSummary, SynthConfig, load_panel, panel_summary, synth_panel, write_panel
from .policy import (
    CONDITIONS,
    EnactmentPair,
    ExposureMatrix,
    GapCondition,
    PhaseIn,
    assign_treated,
    build_exposures,
    change_code,
    code_exposure,
    sample_enactments,
)
from .runner import (
    DgpCell,
    GridSpec,
    PolicyScenario,
    ScenarioResult,
    derive_seed,
    paper_grid,
    run_grid,
    run_replication,
    run_scenario,
)

__all__ = [
    "__version__",
    "EffectSpec", "TreatedPanel", "apply_effects", "true_effect_on_rate",
    "DesignMatrix", "FitResult", "ModelSpec", "build_design", "cluster_robust_cov",
    "fit_policy_model", "fit_wls",
    "MetricSummary", "ReplicationRecord", "classify_bias", "summarize",
    "Panel", "PanelSummary", "SynthConfig", "load_panel", "panel_summary", "synth_panel", "write_panel",
    "CONDITIONS", "EnactmentPair", "ExposureMatrix", "GapCondition", "PhaseIn",
    "assign_treated", "build_exposures", "change_code", "code_exposure", "sample_enactments",
    "DgpCell", "GridSpec", "PolicyScenario", "ScenarioResult", "derive_seed",
    "paper_grid", "run_grid", "run_replication", "run_scenario",
]
