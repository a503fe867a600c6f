"""Persistence of scenario results: long-format CSV, per-rep CSV, manifest.

Floats are written with repr (shortest round-trip form) so reruns with the
same seed produce byte-identical files regardless of worker count.
"""

from __future__ import annotations

import csv
import hashlib
import json
from typing import Optional, Sequence

from . import __version__
from .runner import ScenarioResult

RESULT_COLUMNS = [
    "scenario_id", "effect1", "effect2", "gap", "k", "phase_in", "ordering",
    "model", "spec", "policy", "n_reps", "bias", "std_bias", "rel_bias_pct",
    "var_model", "var_empirical", "rmse", "type1", "typeS", "coverage",
    "fail_rate", "master_seed",
]

REPLICATION_COLUMNS = [
    "scenario_id", "model", "spec", "policy", "rep",
    "estimate", "se", "ci_low", "ci_high", "p_value", "truth",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def result_rows(results: Sequence[ScenarioResult]) -> list[dict]:
    rows = []
    for res in results:
        sc = res.scenario
        for policy in ("primary", "secondary"):
            if policy not in res.summaries:
                continue
            m = res.summaries[policy]
            rows.append({
                "scenario_id": res.scenario_index,
                "effect1": sc.effect_primary,
                "effect2": sc.effect_secondary,
                "gap": sc.gap.label,
                "k": sc.n_treated,
                "phase_in": sc.phase_in.value,
                "ordering": sc.ordering,
                "model": sc.model.model_class,
                "spec": sc.model.specification,
                "policy": policy,
                "n_reps": m.n_reps,
                "bias": m.bias,
                "std_bias": m.std_bias,
                "rel_bias_pct": m.rel_bias_pct,
                "var_model": m.var_model,
                "var_empirical": m.var_empirical,
                "rmse": m.rmse,
                "type1": m.type1_rate,
                "typeS": m.typeS_rate,
                "coverage": m.coverage,
                "fail_rate": res.fail_rate,
                "master_seed": res.master_seed,
            })
    return rows


def write_results_csv(results: Sequence[ScenarioResult], path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(RESULT_COLUMNS)
        for row in result_rows(results):
            w.writerow([_fmt(row[c]) for c in RESULT_COLUMNS])


def write_replication_csv(results: Sequence[ScenarioResult], path) -> None:
    """Per-replication records for every result that retained them."""
    with open(path, "w", encoding="utf-8", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(REPLICATION_COLUMNS)
        for res in results:
            if not res.records:
                continue
            sc = res.scenario
            for policy in ("primary", "secondary"):
                for rep, rec in enumerate(res.records.get(policy, [])):
                    w.writerow([
                        res.scenario_index, sc.model.model_class, sc.model.specification,
                        policy, rep, _fmt(rec.estimate), _fmt(rec.se), _fmt(rec.ci_low),
                        _fmt(rec.ci_high), _fmt(rec.p_value), _fmt(rec.truth),
                    ])


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def write_manifest(
    path,
    *,
    config_echo: dict,
    master_seed: int,
    panel_digest: str,
    results_file: str,
    n_results: int,
    replication_file: Optional[str] = None,
) -> None:
    manifest = {
        "artifact_version": __version__,
        "config": config_echo,
        "master_seed": master_seed,
        "panel_digest": panel_digest,
        "results_file": results_file,
        "replication_file": replication_file,
        "n_result_rows": n_results,
    }
    with open(path, "w", encoding="utf-8") as f:
        json.dump(manifest, f, indent=2, sort_keys=True)
        f.write("\n")
