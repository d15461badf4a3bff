"""Figure rendering over the harness's documented CSV report schemas.

The CSV column layouts are the only coupling to the evaluation harness; the
scripts never import it. Every renderer reads one or more CSVs, validates the
expected columns (aborting with a named-column error otherwise), draws one
matplotlib figure, and writes exactly the requested output file.
"""

from __future__ import annotations

from dataclasses import dataclass

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd

KINDS = ("popularity", "active-periods", "weekly", "similarity", "accuracy-sweep")

REQUIRED_COLUMNS = {
    "popularity": ("item", "window", "count"),
    "active-periods": ("dataset", "entity", "mean_days", "median_days"),
    "weekly": ("week", "item_releases", "user_last_interactions"),
    "similarity": ("kind", "experiment", "test_index", "mean_jaccard"),
    "accuracy-sweep": ("model", "future_windows", "mean_hr", "mean_ndcg"),
}

NUMERIC_COLUMNS = {
    "popularity": ("window", "count"),
    "active-periods": ("mean_days", "median_days"),
    "weekly": ("week", "item_releases", "user_last_interactions"),
    "similarity": ("mean_jaccard",),
    "accuracy-sweep": ("future_windows", "mean_hr", "mean_ndcg"),
}


class SchemaError(ValueError):
    """Input CSV does not match the documented report schema."""


@dataclass(frozen=True)
class FigureSpec:
    kind: str
    inputs: tuple[str, ...]
    output: str
    topn: int = 20

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise SchemaError("at least one input CSV is required")


def load_frame(path, kind: str) -> pd.DataFrame:
    try:
        frame = pd.read_csv(path)
    except FileNotFoundError:
        raise SchemaError(f"input not found: {path}")
    except pd.errors.EmptyDataError:
        raise SchemaError(f"empty input: {path}")
    missing = [c for c in REQUIRED_COLUMNS[kind] if c not in frame.columns]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {', '.join(missing)}")
    if frame.empty:
        raise SchemaError(f"{path}: no data rows")
    for column in NUMERIC_COLUMNS[kind]:
        coerced = pd.to_numeric(frame[column], errors="coerce")
        if coerced.isna().any():
            raise SchemaError(f"{path}: non-numeric values in column {column}")
        frame[column] = coerced
    return frame


def render(spec: FigureSpec) -> str:
    """Render one figure and return the written path."""
    frame = pd.concat([load_frame(p, spec.kind) for p in spec.inputs], ignore_index=True)
    fig, axes = plt.subplots(
        1, 2 if spec.kind == "active-periods" else 1,
        figsize=(9, 4) if spec.kind == "active-periods" else (6.5, 4.2),
    )
    try:
        _DRAWERS[spec.kind](frame, axes, spec)
        fig.tight_layout()
        fig.savefig(spec.output, dpi=120)
    finally:
        plt.close(fig)
    return spec.output


def _draw_popularity(frame: pd.DataFrame, ax, spec: FigureSpec) -> None:
    for item, group in frame.groupby("item"):
        group = group.sort_values("window")
        ax.plot(group["window"], group["count"], marker="o", label=str(item))
    ax.set_xlabel("window")
    ax.set_ylabel("interactions")
    ax.set_title("Per-window item popularity")
    ax.legend(fontsize=8)


def _draw_active_periods(frame: pd.DataFrame, axes, spec: FigureSpec) -> None:
    for ax, column, label in zip(axes, ("mean_days", "median_days"), ("mean", "median")):
        pivot = frame.pivot_table(index="dataset", columns="entity", values=column,
                                  aggfunc="first")
        pivot.plot.bar(ax=ax, rot=20)
        ax.set_ylabel(f"{label} active period (days)")
        ax.set_title(f"{label.capitalize()} active period")


def _draw_weekly(frame: pd.DataFrame, ax, spec: FigureSpec) -> None:
    frame = frame.sort_values("week")
    ax.plot(frame["week"], frame["item_releases"], label="item releases")
    ax.plot(frame["week"], frame["user_last_interactions"], label="user last interactions")
    ax.set_xlabel("week")
    ax.set_ylabel("count")
    ax.set_title("Weekly item releases and user last interactions")
    ax.legend(fontsize=8)


def _draw_similarity(frame: pd.DataFrame, ax, spec: FigureSpec) -> None:
    for (kind, experiment), group in frame.groupby(["kind", "experiment"]):
        ax.hist(group["mean_jaccard"], bins=min(30, max(5, len(group) // 5 + 1)),
                range=(0.0, 1.0), alpha=0.5, label=f"{kind}: {experiment}")
    ax.set_xlabel(f"mean Jaccard of top-{spec.topn} lists")
    ax.set_ylabel("test instances")
    ax.set_title("Recommendation-list similarity distributions")
    ax.legend(fontsize=7)


def _draw_accuracy_sweep(frame: pd.DataFrame, ax, spec: FigureSpec) -> None:
    for model, group in frame.groupby("model"):
        group = group.sort_values("future_windows")
        ax.plot(group["future_windows"], group["mean_hr"], marker="o",
                label=f"{model} HR@{spec.topn}")
        ax.plot(group["future_windows"], group["mean_ndcg"], marker="s", linestyle="--",
                label=f"{model} NDCG@{spec.topn}")
    ax.set_xlabel("future windows in training")
    ax.set_ylabel("metric value")
    ax.set_title("Accuracy vs amount of future data")
    ax.legend(fontsize=7)


_DRAWERS = {
    "popularity": _draw_popularity,
    "active-periods": _draw_active_periods,
    "weekly": _draw_weekly,
    "similarity": _draw_similarity,
    "accuracy-sweep": _draw_accuracy_sweep,
}
