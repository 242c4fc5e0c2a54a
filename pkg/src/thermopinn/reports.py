"""Delimited and JSON report writers.

Every file starts with (or contains) the resolved configuration so any output
is traceable to the run that produced it. Floats are written with their
shortest round-trip representation; repeated runs with the same config and
seed produce byte-identical files.
"""

from __future__ import annotations

import json
import math
from typing import Dict, Optional

import numpy as np

from .evaluation import ErrorReport
from .fields import FIELD_NAMES
from .training import TrainingHistory

METRICS_COLUMNS = (
    "epoch",
    "r_u",
    "r_v",
    "r_div",
    "r_theta",
    "r_boundary_total",
    "r_p",
    "r_div_x",
    "r_div_y",
    "r_domain",
    "r_augm",
    "r_total",
    "validation_total",
)


def _cell(value) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return ""
    return repr(value)


def write_metrics_csv(path, history: TrainingHistory, config_json: str) -> None:
    """Per-epoch residual decomposition in the fixed column layout."""
    lines = [f"# config={config_json}", f"# status={history.status} epochs_used={history.epochs_used}"]
    lines.append(",".join(METRICS_COLUMNS))
    for rec in history.records:
        bd = rec.breakdown
        lines.append(
            ",".join(
                [
                    str(rec.epoch),
                    _cell(bd.r_u),
                    _cell(bd.r_v),
                    _cell(bd.r_div),
                    _cell(bd.r_theta),
                    _cell(bd.r_boundary),
                    _cell(bd.r_p),
                    _cell(bd.r_div_x),
                    _cell(bd.r_div_y),
                    _cell(bd.r_domain),
                    _cell(bd.r_augm),
                    _cell(bd.r_total),
                    _cell(rec.validation_total),
                ]
            )
        )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_error_report_json(
    path,
    report: ErrorReport,
    config_dict: dict,
    generalization_error: Optional[float] = None,
    extra: Optional[dict] = None,
) -> None:
    payload = {"config": config_dict, "report": report.to_dict()}
    if generalization_error is not None:
        payload["generalization_error"] = generalization_error
    if extra:
        payload.update(extra)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_error_field_csv(path, grid_points: np.ndarray, errors: Dict[str, np.ndarray], config_json: str) -> None:
    """Pointwise |exact - predicted| per field, aligned with the grid rows."""
    lines = [f"# config={config_json}", "x,y," + ",".join(f"err_{n}" for n in FIELD_NAMES)]
    cols = [errors[n] for n in FIELD_NAMES]
    for i, (x, y) in enumerate(grid_points):
        lines.append(f"{float(x)!r},{float(y)!r}," + ",".join(repr(float(c[i])) for c in cols))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


STUDY_COLUMNS = (
    "level",
    "total_points",
    "domain_points",
    "threshold",
    "status",
    "epochs",
    "achieved_training_error",
) + tuple(f"{name}_{norm}" for name in FIELD_NAMES for norm in ("w0", "w1", "w2", "l2"))


def write_study_csv(path, rows, config_json: str) -> None:
    """Convergence-study table: one row per (dataset level, threshold) cell."""
    lines = [f"# config={config_json}", ",".join(STUDY_COLUMNS)]
    for row in rows:
        report = row.report
        cells = [
            str(row.level),
            str(row.total_points),
            str(row.domain_points),
            _cell(row.threshold),
            row.status,
            str(row.epochs),
            _cell(row.achieved_training_error),
        ]
        for name in FIELD_NAMES:
            fe = report.fields[name]
            cells.extend([_cell(fe.w0_inf), _cell(fe.w1_inf), _cell(fe.w2_inf), _cell(fe.l2)])
        lines.append(",".join(cells))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def write_fits_json(path, fits: dict, config_dict: dict) -> None:
    payload = {"config": config_dict, "fits": fits}
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(json.dumps(payload, sort_keys=True, indent=2) + "\n")


def write_heatmap_csv(path, arch_rows, level_totals, cells, config_json: str) -> None:
    """Architecture-study grid: epochs to threshold, or N.C., per cell."""
    header = ["architecture"] + [f"points_{t}" for t in level_totals]
    lines = [f"# config={config_json}", ",".join(header)]
    for arch_string in arch_rows:
        row = [arch_string]
        for total in level_totals:
            row.append(str(cells[(arch_string, total)]))
        lines.append(",".join(row))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
