"""Boussinesq flow residuals, the pressure-Poisson augmentation, and the
Beltrami manufactured solution with closed-form derivatives and forcing.

Residual conventions:
  momentum-x   u u_x + v u_y + p_x - nu (u_xx + u_yy) + g_x beta theta - f_bx
  momentum-y   u v_x + v v_y + p_y - nu (v_xx + v_yy) + g_y beta theta - f_by
  divergence   u_x + v_y
  energy       u theta_x + v theta_y - alpha (theta_xx + theta_yy) - f
  pressure     p_xx + p_yy - div(f_b) + div(u . grad u) + beta (g . grad theta)
  div-x        u_xx + v_xy
  div-y        u_xy + v_yy

The viscous term uses nu * Laplacian(u); for constant viscosity and a
divergence-free field this equals the symmetric-gradient form.

Loss components are means of squared pointwise residuals over their point
sets, so they are invariant under duplication of collocation points.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .errors import ConfigurationError
from .fields import DX, DXX, DXY, DY, DYY, VAL, FieldJet2, FieldState, Point2

PI = math.pi


@dataclass(frozen=True)
class FlowParameters:
    """Nondimensional material parameters and gravity direction.

    The baseline problem uses nu = alpha = beta = 1 with g = (0, -1); a
    Reynolds number Re is realized as nu = 1/Re.
    """

    nu: float = 1.0
    alpha: float = 1.0
    beta: float = 1.0
    g: Tuple[float, float] = (0.0, -1.0)

    def __post_init__(self):
        if not (self.nu > 0.0 and self.alpha > 0.0):
            raise ConfigurationError("nu and alpha must be positive")
        values = (self.nu, self.alpha, self.beta, *self.g)
        if not all(math.isfinite(v) for v in values):
            raise ConfigurationError("flow parameters must be finite")

    @staticmethod
    def for_reynolds(re: float, **kwargs) -> "FlowParameters":
        return FlowParameters(nu=1.0 / re, **kwargs)


@dataclass(frozen=True)
class DomainSpec:
    """Axis-aligned rectangular domain."""

    x_min: float = -1.0
    x_max: float = 1.0
    y_min: float = -1.0
    y_max: float = 1.0

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ConfigurationError("domain rectangle must have positive extent")

    @property
    def width(self) -> float:
        return self.x_max - self.x_min

    @property
    def height(self) -> float:
        return self.y_max - self.y_min


@dataclass(frozen=True)
class ResidualBreakdown:
    """Per-component loss values and their totals.

    Augmentation components are None when the augmented terms are inactive;
    r_total then excludes them. r_p_b is the optional pressure boundary term.
    """

    r_u: float
    r_v: float
    r_div: float
    r_theta: float
    r_u_b: float
    r_v_b: float
    r_theta_b: float
    r_p: Optional[float] = None
    r_div_x: Optional[float] = None
    r_div_y: Optional[float] = None
    r_p_b: Optional[float] = None

    @property
    def r_domain(self) -> float:
        return self.r_u + self.r_v + self.r_div + self.r_theta

    @property
    def r_boundary(self) -> float:
        total = self.r_u_b + self.r_v_b + self.r_theta_b
        if self.r_p_b is not None:
            total += self.r_p_b
        return total

    @property
    def r_augm(self) -> Optional[float]:
        if self.r_p is None:
            return None
        return self.r_p + self.r_div_x + self.r_div_y

    @property
    def r_total(self) -> float:
        total = self.r_domain + self.r_boundary
        if self.r_p is not None:
            total += self.r_augm
        return total


@dataclass(frozen=True)
class ForcingArrays:
    """Body force, heat source, and body-force divergence at a set of points."""

    fb: np.ndarray  # (n, 2)
    f: np.ndarray  # (n,)
    div_fb: np.ndarray  # (n,)


def require_nonempty(n_domain: int, n_boundary: int) -> None:
    if n_domain < 1 or n_boundary < 1:
        raise ConfigurationError(
            f"need at least one domain and one boundary point, got {n_domain}/{n_boundary}"
        )


# ---------------------------------------------------------------------------
# Residuals (batched; jets laid out as (n, 6, 4))
# ---------------------------------------------------------------------------


def domain_residuals(jets: np.ndarray, flow: FlowParameters, fb: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Raw (unsquared) PDE residuals at each point, shape (n, 4)."""
    u, v = jets[:, VAL, 0], jets[:, VAL, 1]
    theta = jets[:, VAL, 3]
    gx, gy = flow.g
    out = np.empty((jets.shape[0], 4))
    out[:, 0] = (
        u * jets[:, DX, 0]
        + v * jets[:, DY, 0]
        + jets[:, DX, 2]
        - flow.nu * (jets[:, DXX, 0] + jets[:, DYY, 0])
        + gx * flow.beta * theta
        - fb[:, 0]
    )
    out[:, 1] = (
        u * jets[:, DX, 1]
        + v * jets[:, DY, 1]
        + jets[:, DY, 2]
        - flow.nu * (jets[:, DXX, 1] + jets[:, DYY, 1])
        + gy * flow.beta * theta
        - fb[:, 1]
    )
    out[:, 2] = jets[:, DX, 0] + jets[:, DY, 1]
    out[:, 3] = (
        u * jets[:, DX, 3]
        + v * jets[:, DY, 3]
        - flow.alpha * (jets[:, DXX, 3] + jets[:, DYY, 3])
        - f
    )
    return out


def augmentation_residuals(jets: np.ndarray, flow: FlowParameters, div_fb: np.ndarray) -> np.ndarray:
    """Raw pressure-Poisson and divergence-derivative residuals, shape (n, 3).

    div(u . grad u) is expanded by the product rule into jet entries:
    u_x^2 + u u_xx + 2 u_y v_x + v u_xy + u v_xy + v_y^2 + v v_yy.
    """
    u, v = jets[:, VAL, 0], jets[:, VAL, 1]
    u_x, u_y = jets[:, DX, 0], jets[:, DY, 0]
    v_x, v_y = jets[:, DX, 1], jets[:, DY, 1]
    gx, gy = flow.g
    conv_div = (
        u_x * u_x
        + u * jets[:, DXX, 0]
        + 2.0 * u_y * v_x
        + v * jets[:, DXY, 0]
        + u * jets[:, DXY, 1]
        + v_y * v_y
        + v * jets[:, DYY, 1]
    )
    out = np.empty((jets.shape[0], 3))
    out[:, 0] = (
        jets[:, DXX, 2]
        + jets[:, DYY, 2]
        - div_fb
        + conv_div
        + flow.beta * (gx * jets[:, DX, 3] + gy * jets[:, DY, 3])
    )
    out[:, 1] = jets[:, DXX, 0] + jets[:, DXY, 1]
    out[:, 2] = jets[:, DXY, 0] + jets[:, DYY, 1]
    return out


def boundary_residuals(
    values: np.ndarray,
    targets: np.ndarray,
    pressure_targets: Optional[np.ndarray] = None,
):
    """Raw Dirichlet mismatches for (u, v, theta), plus optionally pressure.

    ``values`` is (n, 4) predicted fields; ``targets`` is (n, 3) Dirichlet
    data. Pressure is excluded unless explicit pressure targets are given.
    """
    res = np.empty((values.shape[0], 3))
    res[:, 0] = values[:, 0] - targets[:, 0]
    res[:, 1] = values[:, 1] - targets[:, 1]
    res[:, 2] = values[:, 3] - targets[:, 2]
    if pressure_targets is None:
        return res, None
    return res, values[:, 2] - np.asarray(pressure_targets, dtype=np.float64)


def assemble_breakdown(
    domain_res: np.ndarray,
    boundary_res: np.ndarray,
    aug_res: Optional[np.ndarray] = None,
    boundary_pressure_res: Optional[np.ndarray] = None,
) -> ResidualBreakdown:
    """Mean-squared components from raw residual arrays."""
    dom = np.mean(domain_res * domain_res, axis=0)
    bnd = np.mean(boundary_res * boundary_res, axis=0)
    kwargs = {}
    if aug_res is not None:
        aug = np.mean(aug_res * aug_res, axis=0)
        kwargs.update(r_p=float(aug[0]), r_div_x=float(aug[1]), r_div_y=float(aug[2]))
    if boundary_pressure_res is not None:
        kwargs.update(r_p_b=float(np.mean(boundary_pressure_res**2)))
    return ResidualBreakdown(
        r_u=float(dom[0]),
        r_v=float(dom[1]),
        r_div=float(dom[2]),
        r_theta=float(dom[3]),
        r_u_b=float(bnd[0]),
        r_v_b=float(bnd[1]),
        r_theta_b=float(bnd[2]),
        **kwargs,
    )


# ---------------------------------------------------------------------------
# Single-point views of the residual operations
# ---------------------------------------------------------------------------


def domain_residual_point(jet: FieldJet2, flow: FlowParameters, fb, f: float):
    """Squared pointwise residuals (momentum-x, momentum-y, divergence, energy)."""
    jets = jet.as_array()[np.newaxis]
    fb = np.asarray(fb, dtype=np.float64).reshape(1, 2)
    raw = domain_residuals(jets, flow, fb, np.array([f]))
    return tuple(float(r) ** 2 for r in raw[0])


def augmentation_residual_point(jet: FieldJet2, flow: FlowParameters, div_fb: float):
    """Squared residuals (pressure-Poisson, div-x, div-y).

    ``div_fb`` is the divergence of the body force at the point; for the
    manufactured forcing it comes from beltrami_forcing_divergence.
    """
    jets = jet.as_array()[np.newaxis]
    raw = augmentation_residuals(jets, flow, np.array([div_fb]))
    return tuple(float(r) ** 2 for r in raw[0])


def boundary_residual_point(pred: FieldState, target):
    """Squared Dirichlet mismatches for (u, v, theta); pressure is excluded."""
    g_u, g_v, g_theta = target
    return ((pred.u - g_u) ** 2, (pred.v - g_v) ** 2, (pred.theta - g_theta) ** 2)


def total_loss(
    domain_jets: np.ndarray,
    boundary_values: np.ndarray,
    boundary_targets: np.ndarray,
    flow: FlowParameters,
    forcing: ForcingArrays,
    augmented: bool,
    boundary_pressure_targets: Optional[np.ndarray] = None,
) -> ResidualBreakdown:
    """Residual breakdown over a collocation set.

    Domain components average over the domain points, boundary components over
    the boundary points, and the augmentation components (present only when
    ``augmented``) again over the domain points. Totals are unweighted sums.
    """
    domain_jets = np.asarray(domain_jets, dtype=np.float64)
    require_nonempty(domain_jets.shape[0], boundary_values.shape[0])
    raw_dom = domain_residuals(domain_jets, flow, forcing.fb, forcing.f)
    raw_aug = augmentation_residuals(domain_jets, flow, forcing.div_fb) if augmented else None
    raw_bnd, raw_bnd_p = boundary_residuals(boundary_values, boundary_targets, boundary_pressure_targets)
    return assemble_breakdown(raw_dom, raw_bnd, raw_aug, raw_bnd_p)


# ---------------------------------------------------------------------------
# Beltrami manufactured solution
# ---------------------------------------------------------------------------


def beltrami_fields(points: np.ndarray) -> np.ndarray:
    """Exact (u, v, p, theta) at each point, shape (n, 4)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    x, y = points[:, 0], points[:, 1]
    cx, sx = np.cos(PI * x), np.sin(PI * x)
    cy, sy = np.cos(PI * y), np.sin(PI * y)
    out = np.empty((points.shape[0], 4))
    out[:, 0] = -cx * sy
    out[:, 1] = sx * cy
    out[:, 2] = -0.25 * (np.cos(2.0 * PI * x) + np.cos(2.0 * PI * y))
    out[:, 3] = cx * cy
    return out


def beltrami_jets(points: np.ndarray) -> np.ndarray:
    """Exact jets of the manufactured solution, shape (n, 6, 4)."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    x, y = points[:, 0], points[:, 1]
    cx, sx = np.cos(PI * x), np.sin(PI * x)
    cy, sy = np.cos(PI * y), np.sin(PI * y)
    c2x, s2x = np.cos(2.0 * PI * x), np.sin(2.0 * PI * x)
    c2y, s2y = np.cos(2.0 * PI * y), np.sin(2.0 * PI * y)
    pi2 = PI * PI

    jets = np.empty((points.shape[0], 6, 4))
    # u = -cos(pi x) sin(pi y)
    jets[:, VAL, 0] = -cx * sy
    jets[:, DX, 0] = PI * sx * sy
    jets[:, DY, 0] = -PI * cx * cy
    jets[:, DXX, 0] = pi2 * cx * sy
    jets[:, DXY, 0] = pi2 * sx * cy
    jets[:, DYY, 0] = pi2 * cx * sy
    # v = sin(pi x) cos(pi y)
    jets[:, VAL, 1] = sx * cy
    jets[:, DX, 1] = PI * cx * cy
    jets[:, DY, 1] = -PI * sx * sy
    jets[:, DXX, 1] = -pi2 * sx * cy
    jets[:, DXY, 1] = -pi2 * cx * sy
    jets[:, DYY, 1] = -pi2 * sx * cy
    # p = -(cos(2 pi x) + cos(2 pi y)) / 4
    jets[:, VAL, 2] = -0.25 * (c2x + c2y)
    jets[:, DX, 2] = 0.5 * PI * s2x
    jets[:, DY, 2] = 0.5 * PI * s2y
    jets[:, DXX, 2] = pi2 * c2x
    jets[:, DXY, 2] = 0.0
    jets[:, DYY, 2] = pi2 * c2y
    # theta = cos(pi x) cos(pi y)
    jets[:, VAL, 3] = cx * cy
    jets[:, DX, 3] = -PI * sx * cy
    jets[:, DY, 3] = -PI * cx * sy
    jets[:, DXX, 3] = -pi2 * cx * cy
    jets[:, DXY, 3] = pi2 * sx * sy
    jets[:, DYY, 3] = -pi2 * cx * cy
    return jets


def beltrami_forcing_arrays(points: np.ndarray, flow: FlowParameters) -> ForcingArrays:
    """Manufactured body force, heat source, and body-force divergence."""
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    x, y = points[:, 0], points[:, 1]
    cx, sx = np.cos(PI * x), np.sin(PI * x)
    cy, sy = np.cos(PI * y), np.sin(PI * y)
    g1, g2 = flow.g
    two_pi2 = 2.0 * PI * PI

    fb = np.empty((points.shape[0], 2))
    fb[:, 0] = -two_pi2 * flow.nu * cx * sy + g1 * flow.beta * cx * cy
    fb[:, 1] = two_pi2 * flow.nu * sx * cy + g2 * flow.beta * cx * cy
    f = two_pi2 * flow.alpha * cx * cy
    # The viscous contributions cancel in the divergence.
    div_fb = -PI * flow.beta * (g1 * sx * cy + g2 * cx * sy)
    return ForcingArrays(fb=fb, f=f, div_fb=div_fb)


def beltrami_exact(point) -> FieldState:
    """Exact solution fields at one point."""
    arr = _point_array(point)
    return FieldState.from_array(beltrami_fields(arr)[0])


def beltrami_exact_jet(point) -> FieldJet2:
    """Exact solution jet (closed-form derivatives) at one point."""
    arr = _point_array(point)
    return FieldJet2.from_array(beltrami_jets(arr)[0])


def beltrami_forcing(point, flow: FlowParameters):
    """Body force 2-vector and heat source at one point."""
    arr = _point_array(point)
    forcing = beltrami_forcing_arrays(arr, flow)
    return forcing.fb[0].copy(), float(forcing.f[0])


def beltrami_forcing_divergence(point, flow: FlowParameters) -> float:
    """Closed-form divergence of the manufactured body force."""
    arr = _point_array(point)
    return float(beltrami_forcing_arrays(arr, flow).div_fb[0])


def _point_array(point) -> np.ndarray:
    if isinstance(point, Point2):
        point = point.as_array()
    return np.asarray(point, dtype=np.float64).reshape(1, 2)
