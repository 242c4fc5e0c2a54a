"""Figure rendering for the report paths.

All figures are written as SVG next to the delimited output they illustrate.
The SVG hash salt is pinned and file dates are stripped so figures do not
churn between identical runs.
"""

from __future__ import annotations

import math
from typing import Dict, List

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .fields import FIELD_NAMES
from .physics import DomainSpec
from .sampling import CollocationSet
from .studies import NOT_CONVERGED, StudyCell
from .training import TrainingHistory

plt.rcParams["svg.hashsalt"] = "thermopinn"

_SVG_META = {"Date": None}

FIELD_LABELS = {"u": "u", "v": "v", "p": "p", "theta": r"$\theta$"}


def _save(fig, path) -> None:
    fig.savefig(path, metadata=_SVG_META)
    plt.close(fig)


def plot_training_history(history: TrainingHistory, path) -> None:
    """Residual decomposition and validation loss over the epochs."""
    epochs = [r.epoch for r in history.records]
    fig, ax = plt.subplots(figsize=(6.5, 4.2))
    series = [
        ("domain", [r.breakdown.r_domain for r in history.records]),
        ("boundary", [r.breakdown.r_boundary for r in history.records]),
        ("total", [r.breakdown.r_total for r in history.records]),
    ]
    if history.records and history.records[0].breakdown.r_augm is not None:
        series.insert(2, ("augmentation", [r.breakdown.r_augm for r in history.records]))
    if any(math.isfinite(r.validation_total) for r in history.records):
        series.append(("validation", [r.validation_total for r in history.records]))
    for label, values in series:
        ax.semilogy(epochs, values, label=label, linewidth=1.0)
    ax.set_xlabel("epoch")
    ax.set_ylabel("mean squared residual")
    ax.legend(frameon=False, fontsize=8)
    ax.set_title(f"training residuals ({history.status})", fontsize=10)
    fig.tight_layout()
    _save(fig, path)


def plot_error_fields(
    grid_points: np.ndarray, errors: Dict[str, np.ndarray], rect: DomainSpec, n_per_side: int, path
) -> None:
    """Four pointwise |exact - predicted| panels over the evaluation grid."""
    fig, axes = plt.subplots(1, 4, figsize=(13, 3.1))
    extent = (rect.x_min, rect.x_max, rect.y_min, rect.y_max)
    for ax, name in zip(axes, FIELD_NAMES):
        image = errors[name].reshape(n_per_side, n_per_side)
        im = ax.imshow(image, origin="lower", extent=extent, cmap="viridis")
        ax.set_title(FIELD_LABELS[name])
        fig.colorbar(im, ax=ax, fraction=0.046)
    fig.tight_layout()
    _save(fig, path)


def plot_collocation(cset: CollocationSet, rect: DomainSpec, path) -> None:
    fig, ax = plt.subplots(figsize=(4.4, 4.4))
    ax.scatter(cset.domain_points[:, 0], cset.domain_points[:, 1], s=8, label="domain")
    ax.scatter(
        cset.boundary_points[:, 0], cset.boundary_points[:, 1], s=10, marker="s", label="boundary"
    )
    ax.set_xlim(rect.x_min, rect.x_max)
    ax.set_ylim(rect.y_min, rect.y_max)
    ax.set_aspect("equal")
    ax.legend(frameon=False, fontsize=8, loc="upper right")
    ax.set_title(f"level {cset.level}: {cset.n_domain} domain + {cset.n_boundary} boundary")
    fig.tight_layout()
    _save(fig, path)


def plot_convergence(cells: List[StudyCell], norm: str, abscissa: str, path) -> None:
    """Log-log error curves, one line per field.

    ``abscissa`` is "training_error" (one line per dataset level would be
    busy, so the largest level is shown) or "collocation_count" (tightest
    threshold shown). Non-converged cells are skipped.
    """
    converged = [c for c in cells if c.status != NOT_CONVERGED and c.status != "Diverged"]
    if not converged:
        return
    if abscissa == "training_error":
        pick_level = max(c.level for c in converged)
        rows = [c for c in converged if c.level == pick_level]
        xs = [c.achieved_training_error for c in rows]
        xlabel = "training error"
        title = f"{norm} error vs training error ({rows[0].total_points} points)"
    else:
        pick_threshold = min(c.threshold for c in converged)
        rows = [c for c in converged if c.threshold == pick_threshold]
        xs = [c.total_points for c in rows]
        xlabel = "collocation points"
        title = f"{norm} error vs collocation points (threshold {pick_threshold:g})"
    if len(rows) < 2:
        return
    order = np.argsort(xs)
    fig, ax = plt.subplots(figsize=(5.2, 4.0))
    for name in FIELD_NAMES:
        ys = [getattr(rows[i].report.fields[name], norm) for i in order]
        ax.loglog(np.asarray(xs)[order], ys, marker="o", markersize=4, label=FIELD_LABELS[name])
    ax.set_xlabel(xlabel)
    ax.set_ylabel(f"{norm} error")
    ax.set_title(title, fontsize=10)
    ax.legend(frameon=False, fontsize=8)
    fig.tight_layout()
    _save(fig, path)


def plot_architecture_heatmap(arch_rows: List[str], level_totals: List[int], cells: dict, path) -> None:
    """Epochs-to-threshold grid; non-converged cells are hatched with N.C."""
    data = np.full((len(arch_rows), len(level_totals)), np.nan)
    for i, arch in enumerate(arch_rows):
        for j, total in enumerate(level_totals):
            value = cells.get((arch, total))
            if isinstance(value, int):
                data[i, j] = value
    fig, ax = plt.subplots(figsize=(1.6 + 1.1 * len(level_totals), 1.2 + 0.55 * len(arch_rows)))
    masked = np.ma.masked_invalid(data)
    im = ax.imshow(masked, aspect="auto", cmap="YlGnBu")
    ax.set_xticks(range(len(level_totals)), [str(t) for t in level_totals])
    ax.set_yticks(range(len(arch_rows)), arch_rows, fontsize=8)
    ax.set_xlabel("total collocation points")
    for i in range(len(arch_rows)):
        for j in range(len(level_totals)):
            text = NOT_CONVERGED if np.isnan(data[i, j]) else f"{int(data[i, j])}"
            ax.text(j, i, text, ha="center", va="center", fontsize=7)
    fig.colorbar(im, ax=ax, label="epochs to threshold")
    fig.tight_layout()
    _save(fig, path)
