"""Sweep drivers for the convergence and architecture studies.

A convergence cell is one (dataset level, training threshold) pair. Cells at
the same level share a single training trajectory: with a deterministic
full-batch optimizer, stopping at a looser threshold is identical to
snapshotting the first crossing during a longer run, so each level trains
once to the tightest threshold.

Cells that never reach their threshold are recorded with the N.C. status and
excluded from the rate fits.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional

from . import evaluation, net, physics, sampling, training
from .config import ExperimentConfig
from .evaluation import (
    ABSCISSA_COLLOCATION_COUNT,
    ABSCISSA_TRAINING_ERROR,
    ErrorReport,
    fit_convergence,
)
from .fields import FIELD_NAMES

NOT_CONVERGED = "N.C."
NORM_KEYS = ("w0_inf", "w1_inf", "w2_inf", "l2")


@dataclass
class StudyCell:
    """One trained (level, threshold) cell with its error report."""

    level: int
    total_points: int
    domain_points: int
    threshold: float
    status: str  # Converged | N.C. | Diverged
    epochs: int
    achieved_training_error: float
    report: ErrorReport


@dataclass
class ArchitectureCell:
    architecture: str
    level: int
    total_points: int
    status: str
    epochs: int


def run_convergence_study(cfg: ExperimentConfig, progress: Optional[Callable] = None) -> List[StudyCell]:
    """Train every (level, threshold) cell of the configured sweep."""
    arch = net.MLPArchitecture.from_string(cfg.architecture)
    ladder = sampling.hierarchical_datasets(cfg.dataset.levels, cfg.domain, cfg.seed)
    spec = cfg.convergence_study
    train_cfg = cfg.resolved_train()
    cells = []
    for level in spec.levels:
        cset = ladder[level]
        params0 = net.init_parameters(arch, cfg.seed)
        snapshots, _, history = training.train_threshold_ladder(
            arch, params0, cset, cfg.flow, physics.beltrami_forcing_arrays,
            train_cfg, spec.thresholds,
        )
        for threshold in sorted(spec.thresholds, reverse=True):
            snap = snapshots[threshold]
            if snap.reached:
                status = training.STATUS_CONVERGED
            elif history.status == training.STATUS_DIVERGED:
                status = training.STATUS_DIVERGED
            else:
                status = NOT_CONVERGED
            report = evaluation.evaluate_errors(arch, snap.params, cfg.domain, cfg.eval_grid_n)
            cell = StudyCell(
                level=level,
                total_points=cset.n_total,
                domain_points=cset.n_domain,
                threshold=threshold,
                status=status,
                epochs=snap.epoch,
                achieved_training_error=snap.achieved_total,
                report=report,
            )
            cells.append(cell)
            if progress is not None:
                progress(cell)
    return cells


def _norm_value(report: ErrorReport, field_name: str, norm: str) -> float:
    return getattr(report.fields[field_name], norm)


def fit_study_cells(cells: List[StudyCell]) -> dict:
    """Rate fits per field and norm, against both abscissas.

    Training-error fits use the largest dataset level present; collocation
    counts use the tightest threshold. Only converged cells with at least two
    data points produce a fit.
    """
    converged = [c for c in cells if c.status == training.STATUS_CONVERGED]
    fits: Dict[str, dict] = {"vs_training_error": {}, "vs_collocation_count": {}}
    if not converged:
        return fits

    max_level = max(c.level for c in converged)
    by_error = [c for c in converged if c.level == max_level]
    min_threshold = min(c.threshold for c in converged)
    by_count = [c for c in converged if c.threshold == min_threshold]

    for field_name in FIELD_NAMES:
        for norm in NORM_KEYS:
            pairs = [
                (c.achieved_training_error, _norm_value(c.report, field_name, norm))
                for c in by_error
            ]
            pairs = [(a, e) for a, e in pairs if a > 0.0 and e > 0.0]
            if len(pairs) >= 2:
                fit = fit_convergence(pairs, ABSCISSA_TRAINING_ERROR)
                fits["vs_training_error"].setdefault(field_name, {})[norm] = _fit_dict(fit)
            pairs = [
                (c.total_points, _norm_value(c.report, field_name, norm)) for c in by_count
            ]
            pairs = [(a, e) for a, e in pairs if a > 0.0 and e > 0.0]
            if len(pairs) >= 2:
                fit = fit_convergence(pairs, ABSCISSA_COLLOCATION_COUNT)
                fits["vs_collocation_count"].setdefault(field_name, {})[norm] = _fit_dict(fit)
    return fits


def _fit_dict(fit: evaluation.ConvergenceFit) -> dict:
    return {
        "slope": fit.slope,
        "intercept": fit.intercept,
        "r_squared": fit.r_squared,
        "abscissa_kind": fit.abscissa_kind,
        "rate": fit.rate,
    }


def architecture_grid(spec) -> List[str]:
    """The swept architecture strings, depth-major: one row per network."""
    archs = []
    for depth in spec.hidden_depths:
        for width in spec.hidden_widths:
            archs.append("-".join(["2"] + [str(width)] * depth + ["4"]))
    return archs


def run_architecture_study(cfg: ExperimentConfig, progress: Optional[Callable] = None) -> List[ArchitectureCell]:
    """Epochs-to-threshold (or N.C.) for each architecture and dataset size."""
    ladder = sampling.hierarchical_datasets(cfg.dataset.levels, cfg.domain, cfg.seed)
    spec = cfg.architecture_study
    train_cfg = cfg.resolved_train()
    cells = []
    for arch_string in architecture_grid(spec):
        arch = net.MLPArchitecture.from_string(arch_string)
        for level in spec.levels:
            cset = ladder[level]
            params0 = net.init_parameters(arch, cfg.seed)
            _, history = training.train(
                arch, params0, cset, cfg.flow, physics.beltrami_forcing_arrays, train_cfg
            )
            if history.status == training.STATUS_CONVERGED:
                status = training.STATUS_CONVERGED
            elif history.status == training.STATUS_DIVERGED:
                status = training.STATUS_DIVERGED
            else:
                status = NOT_CONVERGED
            cell = ArchitectureCell(
                architecture=arch_string,
                level=level,
                total_points=cset.n_total,
                status=status,
                epochs=history.epochs_used,
            )
            cells.append(cell)
            if progress is not None:
                progress(cell)
    return cells


def heatmap_cells(cells: List[ArchitectureCell]) -> dict:
    """Map (architecture, total_points) to the printed cell value."""
    out = {}
    for c in cells:
        out[(c.architecture, c.total_points)] = (
            c.epochs if c.status == training.STATUS_CONVERGED else NOT_CONVERGED
        )
    return out
