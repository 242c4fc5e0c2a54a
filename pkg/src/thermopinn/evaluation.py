"""Error measurement against the analytical solution and posteriori
convergence-rate fitting.

All norms are discrete maxima or means over a fixed evaluation grid: the
W^{k,inf} norm of a field error is the largest absolute derivative mismatch
over all derivative orders m <= k, and the L2 error is the root mean square
of the pointwise mismatch.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np

from . import autodiff, physics, sampling
from .fields import FIELD_NAMES, VAL
from .net import MLPArchitecture
from .physics import DomainSpec, FlowParameters

ABSCISSA_TRAINING_ERROR = "training_error"
ABSCISSA_COLLOCATION_COUNT = "collocation_count"

# Jet component indices grouped by derivative order.
_ORDER_COMPONENTS = ((0,), (1, 2), (3, 4, 5))


@dataclass(frozen=True)
class FieldErrors:
    w0_inf: float
    w1_inf: float
    w2_inf: float
    l2: float


@dataclass(frozen=True)
class ErrorReport:
    """Per-field error norms on a uniform evaluation grid."""

    fields: Dict[str, FieldErrors]
    rect: DomainSpec
    n_per_side: int

    def to_dict(self) -> dict:
        return {
            "grid": {
                "n_per_side": self.n_per_side,
                "x_min": self.rect.x_min,
                "x_max": self.rect.x_max,
                "y_min": self.rect.y_min,
                "y_max": self.rect.y_max,
            },
            "fields": {
                name: {
                    "w0_inf": fe.w0_inf,
                    "w1_inf": fe.w1_inf,
                    "w2_inf": fe.w2_inf,
                    "l2": fe.l2,
                }
                for name, fe in self.fields.items()
            },
        }


@dataclass(frozen=True)
class ConvergenceFit:
    """Least-squares line in log10-log10 space.

    The reported rate equals the slope for a training-error abscissa and the
    negated slope for a collocation-count abscissa, so a rate of 2.0 always
    means error ~ N^-2.
    """

    slope: float
    intercept: float
    r_squared: float
    abscissa_kind: str

    @property
    def rate(self) -> float:
        return -self.slope if self.abscissa_kind == ABSCISSA_COLLOCATION_COUNT else self.slope


def sobolev_error_from_jets(pred_jets: np.ndarray, exact_jets: np.ndarray, k: int) -> Dict[str, float]:
    """W^{k,inf} error per field from predicted and exact jet arrays (n, 6, 4)."""
    if k not in (0, 1, 2):
        raise ValueError(f"derivative order k must be 0, 1, or 2, got {k}")
    diff = np.abs(exact_jets - pred_jets)
    out = {}
    for j, name in enumerate(FIELD_NAMES):
        seminorms = [diff[:, comps, j].max() for comps in _ORDER_COMPONENTS[: k + 1]]
        out[name] = float(max(seminorms))
    return out


def l2_error_from_values(pred: np.ndarray, exact: np.ndarray) -> Dict[str, float]:
    """Root-mean-square error per field from (n, 4) value arrays."""
    sq = (exact - pred) ** 2
    return {name: float(np.sqrt(sq[:, j].mean())) for j, name in enumerate(FIELD_NAMES)}


def sobolev_error(
    arch: MLPArchitecture,
    params: np.ndarray,
    grid_points: np.ndarray,
    k: int,
    exact_jets_fn: Callable[[np.ndarray], np.ndarray] = physics.beltrami_jets,
) -> Dict[str, float]:
    """Per-field W^{k,inf} error of the network prediction on the grid."""
    pred = autodiff.field_jets(arch, params, grid_points)
    return sobolev_error_from_jets(pred, exact_jets_fn(grid_points), k)


def l2_error(
    arch: MLPArchitecture,
    params: np.ndarray,
    grid_points: np.ndarray,
    exact_fields_fn: Callable[[np.ndarray], np.ndarray] = physics.beltrami_fields,
) -> Dict[str, float]:
    """Per-field RMS error of the network prediction on the grid."""
    pred = autodiff.field_jets(arch, params, grid_points)[:, VAL, :]
    return l2_error_from_values(pred, exact_fields_fn(grid_points))


def error_field(
    arch: MLPArchitecture,
    params: np.ndarray,
    grid_points: np.ndarray,
    exact_fields_fn: Callable[[np.ndarray], np.ndarray] = physics.beltrami_fields,
) -> Dict[str, np.ndarray]:
    """Pointwise |exact - predicted| arrays per field, aligned with the grid."""
    pred = autodiff.field_jets(arch, params, grid_points)[:, VAL, :]
    diff = np.abs(exact_fields_fn(grid_points) - pred)
    return {name: diff[:, j].copy() for j, name in enumerate(FIELD_NAMES)}


def evaluate_errors(
    arch: MLPArchitecture,
    params: np.ndarray,
    rect: DomainSpec,
    n_per_side: int = 100,
) -> ErrorReport:
    """All error norms on the uniform test grid, in one pass over the jets."""
    grid = sampling.test_grid(rect, n_per_side)
    pred = autodiff.field_jets(arch, params, grid)
    exact = physics.beltrami_jets(grid)
    l2 = l2_error_from_values(pred[:, VAL, :], exact[:, VAL, :])
    by_order = [sobolev_error_from_jets(pred, exact, k) for k in (0, 1, 2)]
    fields = {
        name: FieldErrors(
            w0_inf=by_order[0][name],
            w1_inf=by_order[1][name],
            w2_inf=by_order[2][name],
            l2=l2[name],
        )
        for name in FIELD_NAMES
    }
    return ErrorReport(fields=fields, rect=rect, n_per_side=n_per_side)


def estimate_generalization_error(
    arch: MLPArchitecture,
    params: np.ndarray,
    domain_points: np.ndarray,
    boundary_points: np.ndarray,
    flow: FlowParameters,
    forcing: Callable = physics.beltrami_forcing_arrays,
    augmented: bool = False,
    exact_fields_fn: Callable[[np.ndarray], np.ndarray] = physics.beltrami_fields,
) -> float:
    """Mean-squared residual of the full residual set on dense unseen grids.

    Uses the same composition as the training total, so it coincides with
    total_loss on identical point sets.
    """
    domain_jets = autodiff.field_jets(arch, params, domain_points)
    boundary_values = autodiff.field_jets(arch, params, boundary_points)[:, VAL, :]
    targets = exact_fields_fn(boundary_points)[:, [0, 1, 3]]
    breakdown = physics.total_loss(
        domain_jets,
        boundary_values,
        targets,
        flow,
        forcing(domain_points, flow),
        augmented=augmented,
    )
    return breakdown.r_total


def fit_convergence(points, abscissa_kind: str = ABSCISSA_TRAINING_ERROR) -> ConvergenceFit:
    """Least-squares power-law fit through (abscissa, error) pairs."""
    if abscissa_kind not in (ABSCISSA_TRAINING_ERROR, ABSCISSA_COLLOCATION_COUNT):
        raise ValueError(f"unknown abscissa kind {abscissa_kind!r}")
    pairs = [(float(a), float(e)) for a, e in points]
    if len(pairs) < 2:
        raise ValueError("need at least two (abscissa, error) pairs")
    if any(a <= 0.0 or e <= 0.0 for a, e in pairs):
        raise ValueError("abscissa and error values must be strictly positive")
    x = np.log10([a for a, _ in pairs])
    y = np.log10([e for _, e in pairs])
    design = np.column_stack([x, np.ones_like(x)])
    coef, _, _, _ = np.linalg.lstsq(design, y, rcond=None)
    slope, intercept = float(coef[0]), float(coef[1])
    predicted = design @ coef
    ss_res = float(np.sum((y - predicted) ** 2))
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r_squared = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return ConvergenceFit(slope, intercept, r_squared, abscissa_kind)
