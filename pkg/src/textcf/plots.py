"""Figure rendering for evaluation reports and sweep results.

Rendered headlessly (Agg) with pinned savefig settings and constant PNG
metadata so reruns of the same inputs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from .metrics import RunReport  # noqa: E402

_SAVEFIG = {"dpi": 100, "metadata": {"Software": "textcf"}}
_HIST_STYLE = {"bins": 10, "color": "#4878a8", "edgecolor": "white"}


def _histogram(ax, values, title, xlabel):
    values = [v for v in values if v is not None]
    if values:
        ax.hist(values, **_HIST_STYLE)
    else:
        ax.text(0.5, 0.5, "no data", ha="center", va="center",
                transform=ax.transAxes, color="gray")
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("instances")


def render_report_figure(report: RunReport, path) -> None:
    """2x2 panel: success rates plus per-instance metric histograms."""
    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    rates = axes[0][0]
    rates.bar(["any", "full quota"],
              [report.success_rate, report.strict_success_rate],
              color=["#4878a8", "#a8784c"])
    rates.set_ylim(0, 1)
    rates.set_title("success rate")
    rates.set_ylabel("fraction of instances")

    per = report.per_instance
    _histogram(axes[0][1], [r["sparsity"] for r in per], "sparsity", "edits / origin words")
    _histogram(axes[1][0], [r["similarity"] for r in per], "similarity", "cosine to origin")
    _histogram(axes[1][1], [r["ppl_ratio"] for r in per], "fluency", "perplexity ratio")
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)


def render_sweep_figure(sweep_result: dict, path) -> None:
    """Objective-vs-hyperparameter scatter grid; the best trial is marked."""
    trials = sweep_result["trials"]
    best = sweep_result["best_trial"]
    params = ("alpha", "margin", "topk", "beam_width")
    objectives = ("success_rate", "mean_similarity", "mean_diversity",
                  "mean_sparsity")

    fig, axes = plt.subplots(len(objectives), len(params),
                             figsize=(3 * len(params), 2.4 * len(objectives)),
                             squeeze=False)
    for row, metric in enumerate(objectives):
        for col, param in enumerate(params):
            ax = axes[row][col]
            xs, ys = [], []
            for record in trials:
                value = record["metrics"][metric]
                if value is None:
                    continue
                xs.append(record["config"][param])
                ys.append(value)
            ax.scatter(xs, ys, s=18, color="#4878a8")
            best_value = trials[best]["metrics"][metric]
            if best_value is not None:
                ax.scatter([trials[best]["config"][param]], [best_value],
                           s=50, color="#c03028", marker="*")
            if row == len(objectives) - 1:
                ax.set_xlabel(param)
            if col == 0:
                ax.set_ylabel(metric)
    fig.tight_layout()
    fig.savefig(path, **_SAVEFIG)
    plt.close(fig)
