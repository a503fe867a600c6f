"""Figure-ready tidy tables from a results CSV.

Each known figure is a filter over the long-format results table plus an
x-axis factor; the output is one tidy CSV per metric panel (x, policy,
value), the same shape the scenario service returns to the explorer UI.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import pandas as pd

from .errors import InvalidConfig, MissingCells
from .metrics import MetricSummary

# Panels shown for a non-null scenario, in display order.
NON_NULL_PANEL_METRICS = ["bias", "rel_bias_pct", "var_model", "rmse", "typeS", "coverage"]
NULL_PANEL_METRICS = ["bias", "std_bias", "var_model", "rmse", "type1", "coverage"]

GAP_ORDER = ["C1", "C2", "C3", "C4"]


@dataclass(frozen=True)
class FigureDef:
    figure_id: str
    model: str
    specification: str
    x_factor: str                 # results column used as the x axis
    filters: dict
    facet: Optional[str] = None   # extra grouping column (figure 3: ordering)


FIGURES = {
    "1": FigureDef("1", "AR", "correct", "gap",
                   {"effect1": -0.10, "effect2": -0.10, "k": 30,
                    "ordering": "random", "phase_in": "instantaneous"}),
    "2": FigureDef("2", "AR", "misspecified", "gap",
                   {"effect1": -0.10, "effect2": -0.10, "k": 30,
                    "ordering": "random", "phase_in": "instantaneous"}),
    "3": FigureDef("3", "AR", "correct", "effect_pair",
                   {"gap": "C1", "k": 30, "phase_in": "instantaneous"},
                   facet="ordering"),
    "a1": FigureDef("a1", "DID", "correct", "gap",
                    {"effect1": -0.10, "effect2": -0.10, "k": 30,
                     "ordering": "random", "phase_in": "instantaneous"}),
    "a2": FigureDef("a2", "DID", "misspecified", "gap",
                    {"effect1": -0.10, "effect2": -0.10, "k": 30,
                     "ordering": "random", "phase_in": "instantaneous"}),
}


def load_results(path) -> pd.DataFrame:
    return pd.read_csv(path)


def figure_tables(results: pd.DataFrame, figure_id: str) -> dict[str, pd.DataFrame]:
    """One tidy DataFrame per metric panel for the requested figure.

    Raises MissingCells listing the absent scenario cells when the results
    table does not contain what the figure needs.
    """
    fig = FIGURES.get(str(figure_id).lower())
    if fig is None:
        raise InvalidConfig(f"unknown figure {figure_id!r}; known: {sorted(FIGURES)}")

    df = results[(results["model"] == fig.model) & (results["spec"] == fig.specification)]
    for col, val in fig.filters.items():
        df = df[df[col] == val]

    if fig.x_factor == "gap":
        missing = [f"gap={g} model={fig.model}/{fig.specification}"
                   for g in GAP_ORDER if g not in set(df["gap"])]
        if missing:
            raise MissingCells(missing)
        df = df.copy()
        df["x"] = pd.Categorical(df["gap"], categories=GAP_ORDER, ordered=True)
        id_cols = ["x", "policy"]
    else:
        if df.empty:
            raise MissingCells([f"gap=C1 model={fig.model}/{fig.specification} (effect grid)"])
        df = df.copy()
        df["x"] = df["effect1"].map("{:g}".format) + "," + df["effect2"].map("{:g}".format)
        id_cols = ["x", "effect1", "effect2", "policy"]
        if fig.facet and len(set(df[fig.facet])) < 2:
            raise MissingCells([f"{fig.facet}={v} (figure {fig.figure_id} facets on {fig.facet})"
                                for v in ("random", "primary_first") if v not in set(df[fig.facet])])

    if fig.facet:
        id_cols = [fig.facet] + id_cols

    null_run = bool(len(df) and (df["effect1"] == 0.0).all() and (df["effect2"] == 0.0).all())
    metrics = NULL_PANEL_METRICS if null_run else NON_NULL_PANEL_METRICS

    tables = {}
    for metric in metrics:
        part = df[id_cols + [metric, "n_reps"]].rename(columns={metric: "value"})
        part = part.sort_values(id_cols).reset_index(drop=True)
        tables[metric] = part
    return tables


def write_figure_csvs(tables: dict[str, pd.DataFrame], out_dir, figure_id: str) -> list[str]:
    written = []
    for metric, table in tables.items():
        path = f"{out_dir}/figure{figure_id}_{metric}.csv"
        table.to_csv(path, index=False)
        written.append(path)
    return written


def summary_panels(summary: MetricSummary, policy: str) -> list[dict]:
    """Tidy per-metric records for one policy's MetricSummary (service shape)."""
    values = {
        "bias": summary.bias,
        "std_bias": summary.std_bias,
        "rel_bias_pct": summary.rel_bias_pct,
        "var_model": summary.var_model,
        "var_empirical": summary.var_empirical,
        "rmse": summary.rmse,
        "type1": summary.type1_rate,
        "typeS": summary.typeS_rate,
        "coverage": summary.coverage,
    }
    return [{"metric": k, "policy": policy, "value": v}
            for k, v in values.items() if v is not None]
