"""Matplotlib rendering of experiment reports to SVG files.

All figures are written headlessly (Agg backend) with a fixed hash salt and
no embedded creation date, so repeated renders of the same report produce
identical files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "recipeopt"

_METHOD_STYLE = {
    "bo": dict(color="#1f77b4", label="Bayesian optimization"),
    "random": dict(color="#ff7f0e", label="Random search"),
    "expert": dict(color="#2ca02c", label="Expert criterion", linestyle="--"),
}
_SAVE_KW = dict(format="svg", metadata={"Date": None}, bbox_inches="tight")


def _save(fig, path):
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
    return Path(path)


def plot_curve(iterations, mean, std, method, path, title=""):
    """Single best-so-far quality curve with a +/- 1 std band."""
    x = np.arange(1, iterations + 1)
    fig, ax = plt.subplots(figsize=(5, 3.5))
    style = _METHOD_STYLE.get(method, dict(label=method))
    ax.plot(x, mean, **style)
    if np.any(std > 0):
        ax.fill_between(x, mean - std, mean + std,
                        color=style.get("color"), alpha=0.2, linewidth=0)
    ax.set_xlabel("iteration")
    ax.set_ylabel("best observed quality")
    ax.set_title(title or style.get("label", method))
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_curves(report, path):
    """Figure-style comparison of all methods on one axis."""
    x = np.arange(1, report.iterations + 1)
    fig, ax = plt.subplots(figsize=(5.5, 3.8))
    for method, mean in report.mean_curves.items():
        style = _METHOD_STYLE.get(method, dict(label=method))
        ax.plot(x, mean, **style)
        std = report.std_curves[method]
        if np.any(std > 0):
            ax.fill_between(x, mean - std, mean + std,
                            color=style.get("color"), alpha=0.15, linewidth=0)
    ax.set_xlabel("iteration")
    ax.set_ylabel("best observed quality")
    ax.set_title(f"{report.benchmark_name}: mean over {report.replications} replications")
    ax.legend(loc="lower right", fontsize=8)
    ax.grid(alpha=0.3)
    return _save(fig, path)


def plot_histogram(labels, counts, variable_name, path):
    """Recommendation histogram for one variable."""
    fig, ax = plt.subplots(figsize=(5, 3.2))
    ax.bar(np.arange(len(labels)), counts, color="#1f77b4")
    ax.set_xticks(np.arange(len(labels)))
    ax.set_xticklabels(labels, rotation=45, ha="right", fontsize=7)
    ax.set_xlabel(variable_name)
    ax.set_ylabel("recommendations")
    ax.set_title(f"suggested values: {variable_name}")
    return _save(fig, path)


def render_report_figures(report, out_dir):
    """Write the combined curve figure, one SVG per method curve, and one
    histogram SVG per variable. Returns the written paths."""
    out = Path(out_dir)
    written = [plot_curves(report, out / "curves.svg")]
    for method, mean in report.mean_curves.items():
        written.append(plot_curve(
            report.iterations, mean, report.std_curves[method],
            method, out / f"curve_{method}.svg",
        ))
    for name, (labels, counts) in report.histograms.items():
        written.append(plot_histogram(labels, counts, name, out / f"hist_{name}.svg"))
    return written
