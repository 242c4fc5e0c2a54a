"""Second-order spatial jets of the network outputs and exact parameter gradients.

Every scalar flowing through the network carries six Taylor coefficients
(value, d/dx, d/dy, d2/dx2, d2/dxdy, d2/dy2). Affine layers act linearly on
the coefficients; tanh composes through the one-dimensional chain rule. The
parameter gradient of a loss built from output jets is obtained by reverse
accumulation through the same computation, seeded with the loss adjoint of
each output jet component.

Internally jets are flat (6n, width) arrays (six row blocks of n points), so
each layer is a single matrix product plus one fused elementwise kernel. All
arithmetic is float64 with fixed-order reductions: repeated evaluations are
bit-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dataclass_field
from typing import Callable

import numpy as np

from . import _kernels, net, physics
from .errors import ConfigurationError, NumericalOverflowError
from .fields import DX, DXX, DXY, DY, DYY, VAL, FieldJet2, Point2
from .physics import FlowParameters, ResidualBreakdown


def _input_jets_flat(points: np.ndarray) -> np.ndarray:
    """Seed jets for the coordinates: value plus unit first derivative."""
    n = points.shape[0]
    jets = np.zeros((6 * n, 2))
    jets[0:n] = points
    jets[n : 2 * n, 0] = 1.0
    jets[2 * n : 3 * n, 1] = 1.0
    return jets


def _forward_flat(layers, points: np.ndarray, keep_trace: bool):
    """Propagate input jets through all layers in the flat layout.

    Returns (output jets (6n, 4), trace); the trace holds per layer the input
    activations plus, for hidden layers, the pre-activation jets and tanh
    values needed by the reverse pass.
    """
    n = points.shape[0]
    acts = _input_jets_flat(points)
    trace = [] if keep_trace else None
    n_layers = len(layers)
    for l, (w, b) in enumerate(layers):
        s = acts @ w.T
        s[0:n] += b
        if not _kernels.all_finite(s):
            raise NumericalOverflowError(l + 1)
        if l < n_layers - 1:
            out = np.empty_like(s)
            t = np.empty((n, s.shape[1]))
            _kernels.tanh_jet_forward(s, out, t, n)
            if keep_trace:
                trace.append((acts, s, t))
            acts = out
        else:
            if keep_trace:
                trace.append((acts, None, None))
            acts = s
    return acts, trace


def _backward_flat(layers, trace, jets_bar_flat: np.ndarray, n: int) -> np.ndarray:
    """Reverse accumulation from output-jet adjoints to the flat parameter gradient."""
    grads = [None] * len(layers)
    sbar = jets_bar_flat
    for l in range(len(layers) - 1, -1, -1):
        w, _b = layers[l]
        acts, _s, _t = trace[l]
        dw = sbar.T @ acts
        db = sbar[0:n].sum(axis=0)
        grads[l] = (dw, db)
        if l > 0:
            abar = sbar @ w
            _, s_prev, t_prev = trace[l - 1]
            sbar = np.empty_like(abar)
            _kernels.tanh_jet_backward(s_prev, t_prev, abar, sbar, n)
    return net.pack_parameters(grads)


def _point_major(flat: np.ndarray, n: int) -> np.ndarray:
    """View a flat (6n, w) jet array as (n, 6, w) without copying."""
    return np.moveaxis(flat.reshape(6, n, -1), 0, 1)


def field_jets(arch: net.MLPArchitecture, params: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Jets of all four fields at each point, shape (n, 6, 4)."""
    layers = net.split_parameters(arch, params)
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    flat, _ = _forward_flat(layers, points, keep_trace=False)
    return np.ascontiguousarray(_point_major(flat, points.shape[0]))


def evaluate_jet(arch: net.MLPArchitecture, params: np.ndarray, point) -> FieldJet2:
    """Values and exact spatial derivatives up to order 2 of all four fields."""
    if isinstance(point, Point2):
        point = point.as_array()
    pts = np.asarray(point, dtype=np.float64).reshape(1, 2)
    jets = field_jets(arch, params, pts)
    return FieldJet2.from_array(jets[0])


@dataclass(frozen=True)
class LossSpec:
    """Selects the residual composition used by the training loss.

    ``augmented`` switches between the bare domain+boundary total and the
    total that also carries the pressure-Poisson and divergence-derivative
    terms. ``forcing`` maps (points, flow) to the body force, heat source,
    and body-force divergence at those points.
    """

    augmented: bool = True
    include_pressure_boundary: bool = False
    forcing: Callable = dataclass_field(default=physics.beltrami_forcing_arrays)


def _domain_jet_adjoint(
    jets: np.ndarray,
    jbar: np.ndarray,
    residuals: np.ndarray,
    flow: FlowParameters,
    augmented: bool,
    aug_residuals,
) -> None:
    """Accumulate the adjoint of the mean-squared domain (and augmentation)
    residuals into ``jbar``.

    ``jets``/``jbar`` are (n, 6, 4) views; ``residuals`` is (n, 4) raw values
    (r_u, r_v, r_div, r_theta) and ``aug_residuals`` (n, 3) raw values
    (r_p, r_divx, r_divy). Each MSE component contributes
    2/n * r * dr/d(jet entry).
    """
    n = jets.shape[0]
    u, v = jets[:, VAL, 0], jets[:, VAL, 1]
    u_x, u_y = jets[:, DX, 0], jets[:, DY, 0]
    v_x, v_y = jets[:, DX, 1], jets[:, DY, 1]
    th_x, th_y = jets[:, DX, 3], jets[:, DY, 3]
    gx, gy = flow.g
    nu, alpha, beta = flow.nu, flow.alpha, flow.beta

    ru = 2.0 / n * residuals[:, 0]
    rv = 2.0 / n * residuals[:, 1]
    rdiv = 2.0 / n * residuals[:, 2]
    rth = 2.0 / n * residuals[:, 3]

    # momentum-x: u u_x + v u_y + p_x - nu (u_xx + u_yy) + gx beta theta - f_bx
    jbar[:, VAL, 0] += ru * u_x
    jbar[:, DX, 0] += ru * u
    jbar[:, VAL, 1] += ru * u_y
    jbar[:, DY, 0] += ru * v
    jbar[:, DX, 2] += ru
    jbar[:, DXX, 0] += -nu * ru
    jbar[:, DYY, 0] += -nu * ru
    jbar[:, VAL, 3] += gx * beta * ru
    # momentum-y: u v_x + v v_y + p_y - nu (v_xx + v_yy) + gy beta theta - f_by
    jbar[:, VAL, 0] += rv * v_x
    jbar[:, DX, 1] += rv * u
    jbar[:, VAL, 1] += rv * v_y
    jbar[:, DY, 1] += rv * v
    jbar[:, DY, 2] += rv
    jbar[:, DXX, 1] += -nu * rv
    jbar[:, DYY, 1] += -nu * rv
    jbar[:, VAL, 3] += gy * beta * rv
    # divergence: u_x + v_y
    jbar[:, DX, 0] += rdiv
    jbar[:, DY, 1] += rdiv
    # energy: u th_x + v th_y - alpha (th_xx + th_yy) - f
    jbar[:, VAL, 0] += rth * th_x
    jbar[:, VAL, 1] += rth * th_y
    jbar[:, DX, 3] += rth * u
    jbar[:, DY, 3] += rth * v
    jbar[:, DXX, 3] += -alpha * rth
    jbar[:, DYY, 3] += -alpha * rth

    if augmented:
        u_xx, u_xy = jets[:, DXX, 0], jets[:, DXY, 0]
        v_xy, v_yy = jets[:, DXY, 1], jets[:, DYY, 1]
        rp = 2.0 / n * aug_residuals[:, 0]
        rdx = 2.0 / n * aug_residuals[:, 1]
        rdy = 2.0 / n * aug_residuals[:, 2]
        # pressure Poisson: p_xx + p_yy - div f_b + div(u . grad u) + beta g . grad theta
        jbar[:, DXX, 2] += rp
        jbar[:, DYY, 2] += rp
        jbar[:, VAL, 0] += rp * (u_xx + v_xy)
        jbar[:, DX, 0] += rp * 2.0 * u_x
        jbar[:, DY, 0] += rp * 2.0 * v_x
        jbar[:, DXX, 0] += rp * u
        jbar[:, DXY, 0] += rp * v
        jbar[:, VAL, 1] += rp * (u_xy + v_yy)
        jbar[:, DX, 1] += rp * 2.0 * u_y
        jbar[:, DY, 1] += rp * 2.0 * v_y
        jbar[:, DXY, 1] += rp * u
        jbar[:, DYY, 1] += rp * v
        jbar[:, DX, 3] += rp * beta * gx
        jbar[:, DY, 3] += rp * beta * gy
        # x-derivative of divergence: u_xx + v_xy
        jbar[:, DXX, 0] += rdx
        jbar[:, DXY, 1] += rdx
        # y-derivative of divergence: u_xy + v_yy
        jbar[:, DXY, 0] += rdy
        jbar[:, DYY, 1] += rdy


class LossEvaluator:
    """Loss, gradient, and breakdown over one collocation set.

    Precomputes everything that does not depend on the parameters (stacked
    points, forcing arrays, Dirichlet targets), so repeated evaluations
    during training touch only the network passes.
    """

    def __init__(self, arch: net.MLPArchitecture, loss_spec: LossSpec, collocation, flow: FlowParameters):
        self.arch = arch
        self.spec = loss_spec
        self.flow = flow
        dom = np.asarray(collocation.domain_points, dtype=np.float64)
        bnd = np.asarray(collocation.boundary_points, dtype=np.float64)
        self.n_dom, self.n_bnd = dom.shape[0], bnd.shape[0]
        physics.require_nonempty(self.n_dom, self.n_bnd)
        self.points = np.concatenate([dom, bnd], axis=0)
        self.n = self.points.shape[0]
        self.forcing = loss_spec.forcing(dom, flow)
        self.targets = np.asarray(collocation.boundary_targets, dtype=np.float64)
        if loss_spec.include_pressure_boundary:
            if collocation.boundary_pressure is None:
                raise ConfigurationError(
                    "pressure boundary term requested but the collocation set "
                    "carries no pressure targets"
                )
            self.pressure_targets = np.asarray(collocation.boundary_pressure, dtype=np.float64)
        else:
            self.pressure_targets = None

    def _residuals(self, jets_pm: np.ndarray):
        dom_jets = jets_pm[: self.n_dom]
        bnd_values = jets_pm[self.n_dom :, VAL, :]
        residuals = physics.domain_residuals(dom_jets, self.flow, self.forcing.fb, self.forcing.f)
        aug = (
            physics.augmentation_residuals(dom_jets, self.flow, self.forcing.div_fb)
            if self.spec.augmented
            else None
        )
        bnd_res, bnd_p_res = physics.boundary_residuals(bnd_values, self.targets, self.pressure_targets)
        return residuals, aug, bnd_res, bnd_p_res

    def loss_only(self, params: np.ndarray) -> ResidualBreakdown:
        layers = net.split_parameters(self.arch, params)
        flat, _ = _forward_flat(layers, self.points, keep_trace=False)
        residuals, aug, bnd_res, bnd_p_res = self._residuals(_point_major(flat, self.n))
        return physics.assemble_breakdown(residuals, bnd_res, aug, bnd_p_res)

    def loss_and_gradient(self, params: np.ndarray):
        """Returns (active total, gradient, breakdown)."""
        layers = net.split_parameters(self.arch, params)
        flat, trace = _forward_flat(layers, self.points, keep_trace=True)
        jets_pm = _point_major(flat, self.n)
        residuals, aug, bnd_res, bnd_p_res = self._residuals(jets_pm)
        breakdown = physics.assemble_breakdown(residuals, bnd_res, aug, bnd_p_res)

        jbar = np.zeros((self.n, 6, 4))
        _domain_jet_adjoint(
            jets_pm[: self.n_dom], jbar[: self.n_dom], residuals, self.flow, self.spec.augmented, aug
        )
        scale = 2.0 / self.n_bnd
        jbar[self.n_dom :, VAL, 0] = scale * bnd_res[:, 0]
        jbar[self.n_dom :, VAL, 1] = scale * bnd_res[:, 1]
        jbar[self.n_dom :, VAL, 3] = scale * bnd_res[:, 2]
        if bnd_p_res is not None:
            jbar[self.n_dom :, VAL, 2] = scale * bnd_p_res

        jbar_flat = np.ascontiguousarray(np.moveaxis(jbar, 1, 0)).reshape(6 * self.n, 4)
        grad = _backward_flat(layers, trace, jbar_flat, self.n)
        return breakdown.r_total, grad, breakdown


def loss_and_gradient(
    arch: net.MLPArchitecture,
    params: np.ndarray,
    loss_spec: LossSpec,
    collocation,
    flow: FlowParameters,
):
    """One-shot (loss, gradient, breakdown); see LossEvaluator for hot loops."""
    evaluator = LossEvaluator(arch, loss_spec, collocation, flow)
    return evaluator.loss_and_gradient(params)


def loss_gradient(
    arch: net.MLPArchitecture,
    params: np.ndarray,
    loss_spec: LossSpec,
    collocation,
    flow: FlowParameters,
):
    """Gradient of the composite scalar loss with respect to every parameter.

    Returns (gradient, loss); agrees with central finite differences of the
    scalar loss.
    """
    loss, grad, _ = loss_and_gradient(arch, params, loss_spec, collocation, flow)
    return grad, loss


def loss_only(
    arch: net.MLPArchitecture,
    params: np.ndarray,
    loss_spec: LossSpec,
    collocation,
    flow: FlowParameters,
) -> ResidualBreakdown:
    """Residual breakdown without the reverse pass (used for validation logging)."""
    evaluator = LossEvaluator(arch, loss_spec, collocation, flow)
    return evaluator.loss_only(params)
