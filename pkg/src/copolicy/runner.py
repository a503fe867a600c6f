"""Scenario orchestration: deterministic seeding, replication, grids.

Seeding uses the Philox counter-based generator: the key encodes
(master_seed, data-generation cell) and the counter spaces replications
2^128 draws apart, so streams never overlap and results are independent of
worker count and execution order.

All estimator variants of one data-generation cell share the cell's seed
stream (model fits consume no randomness), so the four models are always
evaluated on identical simulated datasets, and a standalone run_scenario
reproduces the grid's result for the same cell index bit for bit.
"""

from __future__ import annotations

import itertools
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .effects import EffectSpec, apply_effects, true_effect_on_rate
from .errors import AbortThreshold, EstimationError, InvalidConfig, KTooLarge
from .estimators import FitResult, ModelSpec, fit_policy_model
from .metrics import MetricSummary, ReplicationRecord, summarize
from .panel import Panel, PanelSummary, panel_summary
from .policy import (
    GapCondition,
    PhaseIn,
    assign_treated,
    build_exposures,
    enactment_window,
    sample_enactments,
)

DEFAULT_N_REPS = 5000
ABORT_FAIL_RATE = 0.05
# In-memory record retention is capped (a 5000-rep scenario is tiny, a
# million-rep sweep is not); persisted records via --keep-reps are never
# capped.
DEFAULT_RECORD_CAP = 1_000_000

PrimarySecondary = tuple[str, ReplicationRecord]


@dataclass(frozen=True)
class PolicyScenario:
    """One cell of the factorial design plus the estimator to apply."""

    effect_primary: float
    effect_secondary: float
    gap: GapCondition
    n_treated: int
    phase_in: PhaseIn
    ordering: str
    model: ModelSpec
    n_reps: int = DEFAULT_N_REPS
    master_seed: int = 0
    scale_mode: str = "unit_mean"

    def __post_init__(self):
        if self.n_reps < 1:
            raise InvalidConfig("n_reps must be >= 1")
        EffectSpec(self.effect_primary, self.effect_secondary, self.scale_mode)  # validates

    @property
    def effect_spec(self) -> EffectSpec:
        return EffectSpec(self.effect_primary, self.effect_secondary, self.scale_mode)

    def dgp_cell(self) -> "DgpCell":
        return DgpCell(self.effect_primary, self.effect_secondary, self.gap,
                       self.n_treated, self.phase_in, self.ordering, self.scale_mode)


@dataclass(frozen=True)
class DgpCell:
    """Data-generation factors only; what the seed stream is keyed on."""

    effect_primary: float
    effect_secondary: float
    gap: GapCondition
    n_treated: int
    phase_in: PhaseIn
    ordering: str
    scale_mode: str = "unit_mean"

    @property
    def effect_spec(self) -> EffectSpec:
        return EffectSpec(self.effect_primary, self.effect_secondary, self.scale_mode)


@dataclass
class ScenarioResult:
    scenario: PolicyScenario
    scenario_index: int
    summaries: dict[str, MetricSummary]          # "primary" / "secondary"
    n_reps: int
    n_failed: int
    fail_rate: float
    failure_counts: dict[str, int]
    records: Optional[dict[str, list[ReplicationRecord]]]
    master_seed: int


def derive_seed(master_seed: int, scenario_index: int, replication_index: int) -> np.random.Generator:
    """Independent stream for one replication of one scenario cell.

    Injective: the 128-bit Philox key is (master_seed << 64) | scenario_index
    and the 256-bit counter places each replication 2^128 draws apart.
    """
    if not 0 <= master_seed < 2**64:
        raise InvalidConfig("master_seed must be a 64-bit unsigned integer")
    if not 0 <= scenario_index < 2**64:
        raise InvalidConfig("scenario_index out of range")
    if not 0 <= replication_index < 2**64:
        raise InvalidConfig("replication_index out of range")
    key = (master_seed << 64) | scenario_index
    counter = replication_index << 128
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


def simulate_dataset(
    panel: Panel,
    summary: PanelSummary,
    cell: DgpCell,
    rng: np.random.Generator,
):
    """Draw one simulated dataset: treated set, enactment dates, outcomes."""
    treated = assign_treated(panel.unit_ids, cell.n_treated, rng)
    window = panel.year_range
    pairs = {u: sample_enactments(cell.gap, cell.ordering, window, rng) for u in treated}
    exposures = build_exposures(panel.unit_ids, panel.years, pairs, cell.phase_in)
    tpanel = apply_effects(panel, exposures, cell.effect_spec, summary)
    return tpanel, exposures


def scenario_truths(cell: DgpCell, summary: PanelSummary) -> tuple[float, float]:
    """Rate-scale truths the metrics compare against.

    The grand mean is the base for both scale modes: for a balanced panel
    the mean of unit means equals the grand mean, so under unit_mean
    scaling the per-replication estimand averages to this constant over
    treated-set draws.
    """
    return true_effect_on_rate(cell.effect_spec, summary.grand_mean)


def _records_from_fit(fit: FitResult, truth1: float, truth2: float) -> list[PrimarySecondary]:
    out = [("primary", ReplicationRecord(
        estimate=fit.primary.estimate, se=fit.primary.se,
        ci_low=fit.primary.ci_low, ci_high=fit.primary.ci_high,
        p_value=fit.primary.p_value, truth=truth1))]
    if fit.secondary is not None:
        out.append(("secondary", ReplicationRecord(
            estimate=fit.secondary.estimate, se=fit.secondary.se,
            ci_low=fit.secondary.ci_low, ci_high=fit.secondary.ci_high,
            p_value=fit.secondary.p_value, truth=truth2)))
    return out


def run_replication(
    scenario: PolicyScenario,
    panel: Panel,
    rep_index: int,
    *,
    scenario_index: int = 0,
    summary: Optional[PanelSummary] = None,
) -> list[PrimarySecondary]:
    """Simulate one dataset and fit the scenario's model.

    Returns (policy, record) pairs: primary always, secondary only for the
    correctly specified model. Estimation errors propagate; run_scenario
    is the layer that records them as failures.
    """
    summary = summary or panel_summary(panel)
    cell = scenario.dgp_cell()
    rng = derive_seed(scenario.master_seed, scenario_index, rep_index)
    tpanel, exposures = simulate_dataset(panel, summary, cell, rng)
    truth1, truth2 = scenario_truths(cell, summary)
    fit = fit_policy_model(tpanel, exposures, scenario.model)
    return _records_from_fit(fit, truth1, truth2)


# ---------------------------------------------------------------------------
# Cell execution: one pass over replications, all estimator variants fitted
# to the same simulated dataset.

RepOutcome = tuple[int, list]  # (rep_index, per-model ("ok", records) | ("fail", errname))


def _run_rep_range(
    panel: Panel,
    summary: PanelSummary,
    cell: DgpCell,
    models: Sequence[ModelSpec],
    master_seed: int,
    scenario_index: int,
    rep_lo: int,
    rep_hi: int,
) -> list[RepOutcome]:
    truth1, truth2 = scenario_truths(cell, summary)
    out = []
    for rep in range(rep_lo, rep_hi):
        rng = derive_seed(master_seed, scenario_index, rep)
        tpanel, exposures = simulate_dataset(panel, summary, cell, rng)
        per_model = []
        for model in models:
            try:
                fit = fit_policy_model(tpanel, exposures, model)
            except EstimationError as exc:
                per_model.append(("fail", type(exc).__name__))
            else:
                per_model.append(("ok", _records_from_fit(fit, truth1, truth2)))
        out.append((rep, per_model))
    return out


_WORKER_PANEL: Optional[Panel] = None
_WORKER_SUMMARY: Optional[PanelSummary] = None


def _init_worker(panel: Panel, summary: PanelSummary) -> None:
    global _WORKER_PANEL, _WORKER_SUMMARY
    _WORKER_PANEL = panel
    _WORKER_SUMMARY = summary


def _worker_rep_range(args) -> list[RepOutcome]:
    cell, models, master_seed, scenario_index, lo, hi = args
    return _run_rep_range(_WORKER_PANEL, _WORKER_SUMMARY, cell, models,
                          master_seed, scenario_index, lo, hi)


def _validate_cell(panel: Panel, cell: DgpCell) -> None:
    if cell.n_treated > panel.n_units:
        raise KTooLarge(f"n_treated={cell.n_treated} exceeds {panel.n_units} units")
    if cell.n_treated < 1:
        raise InvalidConfig("n_treated must be >= 1")
    enactment_window(cell.gap, *panel.year_range)  # raises InfeasibleWindow
    if cell.ordering not in ("random", "primary_first"):
        raise InvalidConfig(f"unknown ordering {cell.ordering!r}")


def _execute_cell(
    panel: Panel,
    summary: PanelSummary,
    cell: DgpCell,
    models: Sequence[ModelSpec],
    n_reps: int,
    master_seed: int,
    scenario_index: int,
    pool: Optional[ProcessPoolExecutor],
    workers: int,
    progress: Optional[Callable[[int], None]] = None,
) -> list[list]:
    """Run all replications of one cell; outcomes indexed [rep][model]."""
    _validate_cell(panel, cell)
    outcomes: list = [None] * n_reps
    if pool is None or workers <= 1 or n_reps < 2 * workers:
        step = max(1, min(64, n_reps // 10 or 1))
        for lo in range(0, n_reps, step):
            hi = min(lo + step, n_reps)
            for rep, per_model in _run_rep_range(panel, summary, cell, models,
                                                 master_seed, scenario_index, lo, hi):
                outcomes[rep] = per_model
            if progress:
                progress(hi - lo)
    else:
        chunk = max(1, -(-n_reps // (workers * 4)))
        tasks = [(cell, tuple(models), master_seed, scenario_index, lo, min(lo + chunk, n_reps))
                 for lo in range(0, n_reps, chunk)]
        for got in pool.map(_worker_rep_range, tasks):
            for rep, per_model in got:
                outcomes[rep] = per_model
            if progress:
                progress(len(got))
    return outcomes


def _summarize_model(
    scenario: PolicyScenario,
    scenario_index: int,
    outcomes: list,
    model_pos: int,
    summary: PanelSummary,
    retain_records: bool,
) -> ScenarioResult:
    records: dict[str, list[ReplicationRecord]] = {}
    failure_counts: dict[str, int] = {}
    n_failed = 0
    for per_model in outcomes:
        status, payload = per_model[model_pos]
        if status == "fail":
            n_failed += 1
            failure_counts[payload] = failure_counts.get(payload, 0) + 1
        else:
            for policy, rec in payload:
                records.setdefault(policy, []).append(rec)

    n_reps = len(outcomes)
    fail_rate = n_failed / n_reps
    if fail_rate > ABORT_FAIL_RATE:
        raise AbortThreshold(
            f"{n_failed}/{n_reps} replications failed ({fail_rate:.1%}) for "
            f"model={scenario.model.model_class}/{scenario.model.specification}: {failure_counts}"
        )

    summaries = {}
    for policy, recs in records.items():
        pct = scenario.effect_primary if policy == "primary" else scenario.effect_secondary
        summaries[policy] = summarize(recs, truth_is_null=(pct == 0.0),
                                      sd_scale=summary.outcome_sd, alpha=scenario.model.alpha)
    return ScenarioResult(
        scenario=scenario,
        scenario_index=scenario_index,
        summaries=summaries,
        n_reps=n_reps,
        n_failed=n_failed,
        fail_rate=fail_rate,
        failure_counts=failure_counts,
        records=records if retain_records else None,
        master_seed=scenario.master_seed,
    )


def run_scenario(
    scenario: PolicyScenario,
    panel: Panel,
    *,
    scenario_index: int = 0,
    workers: int = 1,
    progress: Optional[Callable[[int], None]] = None,
    retain_records: bool = True,
    record_cap: Optional[int] = DEFAULT_RECORD_CAP,
) -> ScenarioResult:
    """Execute all replications of one scenario and summarize per policy."""
    summary = panel_summary(panel)
    cell = scenario.dgp_cell()
    pool = None
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                       initargs=(panel, summary))
        outcomes = _execute_cell(panel, summary, cell, [scenario.model], scenario.n_reps,
                                 scenario.master_seed, scenario_index, pool, workers, progress)
    finally:
        if pool is not None:
            pool.shutdown()
    retain = retain_records and (record_cap is None or 2 * scenario.n_reps <= record_cap)
    return _summarize_model(scenario, scenario_index, outcomes, 0, summary, retain)


@dataclass(frozen=True)
class GridSpec:
    """Factor lists whose Cartesian product forms the data-generation cells."""

    effects: tuple[tuple[float, float], ...]
    gaps: tuple[GapCondition, ...]
    n_treated: tuple[int, ...]
    phase_ins: tuple[PhaseIn, ...]
    orderings: tuple[str, ...]
    models: tuple[ModelSpec, ...]
    scale_mode: str = "unit_mean"

    def __post_init__(self):
        for name in ("effects", "gaps", "n_treated", "phase_ins", "orderings", "models"):
            if not getattr(self, name):
                raise InvalidConfig(f"grid factor {name} is empty")

    def cells(self) -> list[DgpCell]:
        return [
            DgpCell(e1, e2, gap, k, phase, ordering, self.scale_mode)
            for (e1, e2), gap, k, phase, ordering in itertools.product(
                self.effects, self.gaps, self.n_treated, self.phase_ins, self.orderings)
        ]

    @property
    def n_cells(self) -> int:
        return (len(self.effects) * len(self.gaps) * len(self.n_treated)
                * len(self.phase_ins) * len(self.orderings))


PAPER_EFFECT_PAIRS = (
    (0.0, 0.0), (0.0, -0.15), (-0.15, 0.0), (-0.10, -0.10),
    (-0.15, -0.05), (-0.05, -0.15), (-0.10, -0.20), (-0.20, -0.10),
)


def paper_grid(models: Optional[Sequence[ModelSpec]] = None) -> GridSpec:
    """The full factorial studied in the source analysis: 8 effect pairs x
    4 gap conditions x {5, 30} treated x 2 phase-ins x 2 orderings = 256
    data-generation cells, each fit by 4 estimator variants."""
    from .policy import CONDITIONS

    if models is None:
        models = tuple(
            ModelSpec(model_class=mc, specification=sp)
            for mc in ("AR", "DID") for sp in ("correct", "misspecified")
        )
    return GridSpec(
        effects=PAPER_EFFECT_PAIRS,
        gaps=tuple(CONDITIONS[c] for c in ("C1", "C2", "C3", "C4")),
        n_treated=(5, 30),
        phase_ins=(PhaseIn.INSTANTANEOUS, PhaseIn.LINEAR_3YR),
        orderings=("random", "primary_first"),
        models=tuple(models),
    )


def validate_grid(grid: GridSpec, panel: Panel) -> None:
    """Raise the appropriate config error if any cell cannot run on this panel."""
    for cell in grid.cells():
        _validate_cell(panel, cell)


def run_grid(
    grid: GridSpec,
    panel: Panel,
    *,
    n_reps: int,
    master_seed: int,
    workers: int = 1,
    progress: Optional[Callable[[int, int], None]] = None,
    retain_records: bool = False,
) -> list[ScenarioResult]:
    """Run every (cell, model) combination; one ScenarioResult per pair.

    Deterministic given (panel, grid, n_reps, master_seed): cell seed
    streams are keyed by cell index, and all models of a cell are fit to
    the same datasets in a single pass.
    """
    summary = panel_summary(panel)
    cells = grid.cells()
    for cell in cells:
        _validate_cell(panel, cell)

    total = len(cells) * n_reps
    done = 0

    def cell_progress(k: int) -> None:
        nonlocal done
        done += k
        if progress:
            progress(done, total)

    results: list[ScenarioResult] = []
    pool = None
    try:
        if workers > 1:
            pool = ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                       initargs=(panel, summary))
        for ci, cell in enumerate(cells):
            outcomes = _execute_cell(panel, summary, cell, grid.models, n_reps,
                                     master_seed, ci, pool, workers, cell_progress)
            for mi, model in enumerate(grid.models):
                scenario = PolicyScenario(
                    effect_primary=cell.effect_primary, effect_secondary=cell.effect_secondary,
                    gap=cell.gap, n_treated=cell.n_treated, phase_in=cell.phase_in,
                    ordering=cell.ordering, model=model, n_reps=n_reps,
                    master_seed=master_seed, scale_mode=cell.scale_mode,
                )
                results.append(_summarize_model(scenario, ci, outcomes, mi, summary, retain_records))
    finally:
        if pool is not None:
            pool.shutdown()
    return results
