"""Self-check oracles: manufactured-solution residuals, jet derivatives
against finite differences of the forward pass, and loss gradients against
finite differences of the loss.

These back the ``verify`` CLI subcommand. Relative errors use a floor of one
percent of the largest magnitude in the batch, so entries dominated by
cancellation do not inflate the result.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff, net, physics, sampling
from ._threads import single_thread_blas
from .fields import VAL
from .net import MLPArchitecture
from .physics import DomainSpec, FlowParameters


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def relative_error(approx: np.ndarray, exact: np.ndarray, floor_scale: float = 1e-2) -> np.ndarray:
    """|approx - exact| over a floored denominator, elementwise."""
    exact = np.asarray(exact, dtype=np.float64)
    approx = np.asarray(approx, dtype=np.float64)
    scale = np.abs(exact).max(initial=0.0)
    denom = np.maximum(np.abs(exact), max(floor_scale * scale, 1e-12))
    return np.abs(approx - exact) / denom


def manufactured_solution_check(seed: int = 0, tol: float = 1e-20) -> CheckResult:
    """All seven domain and augmentation residuals vanish on the exact jets."""
    flow = FlowParameters()
    rect = DomainSpec()
    ladder = sampling.hierarchical_datasets(8, rect, seed)
    points = np.concatenate([ladder[-1].domain_points, sampling.test_grid(rect, 100)])
    jets = physics.beltrami_jets(points)
    forcing = physics.beltrami_forcing_arrays(points, flow)
    dom_sq = physics.domain_residuals(jets, flow, forcing.fb, forcing.f) ** 2
    aug_sq = physics.augmentation_residuals(jets, flow, forcing.div_fb) ** 2
    worst = max(dom_sq.max(), aug_sq.max())
    return CheckResult(
        name="manufactured-solution residuals",
        passed=bool(worst < tol),
        detail=f"max squared residual {worst:.3e} over {points.shape[0]} points (tol {tol:g})",
    )


def finite_difference_jets(values_fn, pts: np.ndarray, h_first: float = 1e-5, h_second: float = 1e-4):
    """Central-difference first and second derivatives of a field evaluator.

    ``values_fn`` maps (m, 2) points to (m, 4) values. Second derivatives use
    a larger step: with h = 1e-5 their roundoff (~4 eps |f| / h^2) would
    exceed the comparison tolerances, while h = 1e-4 balances roundoff and
    truncation. Returns (first (n, 2, 4), second (n, 3, 4)).
    """
    n = pts.shape[0]
    h1, h2 = h_first, h_second
    offsets = np.array(
        [
            (0, 0),
            (h1, 0), (-h1, 0), (0, h1), (0, -h1),
            (h2, 0), (-h2, 0), (0, h2), (0, -h2),
            (h2, h2), (h2, -h2), (-h2, h2), (-h2, -h2),
        ]
    )
    stencil = (pts[:, None, :] + offsets[None, :, :]).reshape(-1, 2)
    vals = np.asarray(values_fn(stencil)).reshape(n, len(offsets), 4)
    f0 = vals[:, 0]
    fxp1, fxm1, fyp1, fym1 = vals[:, 1], vals[:, 2], vals[:, 3], vals[:, 4]
    fxp2, fxm2, fyp2, fym2 = vals[:, 5], vals[:, 6], vals[:, 7], vals[:, 8]
    fpp, fpm, fmp, fmm = vals[:, 9], vals[:, 10], vals[:, 11], vals[:, 12]

    first = np.stack([(fxp1 - fxm1) / (2 * h1), (fyp1 - fym1) / (2 * h1)], axis=1)
    second = np.stack(
        [
            (fxp2 - 2 * f0 + fxm2) / (h2 * h2),
            (fpp - fpm - fmp + fmm) / (4 * h2 * h2),
            (fyp2 - 2 * f0 + fym2) / (h2 * h2),
        ],
        axis=1,
    )
    return first, second


def jet_fd_check(
    arch_string: str = "2-32-32-4",
    seed: int = 0,
    n_points: int = 100,
    tol_first: float = 1e-5,
    tol_second: float = 1e-4,
) -> CheckResult:
    """Jet derivatives against central finite differences of the forward values."""
    arch = MLPArchitecture.from_string(arch_string)
    params = net.init_parameters(arch, seed)
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xFD]))
    pts = rng.uniform(-0.9, 0.9, size=(n_points, 2))

    jets = autodiff.field_jets(arch, params, pts)
    fd_first, fd_second = finite_difference_jets(
        lambda q: autodiff.field_jets(arch, params, q)[:, VAL, :], pts
    )
    err_first = relative_error(fd_first, jets[:, 1:3, :]).max()
    err_second = relative_error(fd_second, jets[:, 3:6, :]).max()
    passed = bool(err_first < tol_first and err_second < tol_second)
    return CheckResult(
        name="jet vs finite differences",
        passed=passed,
        detail=(
            f"max rel err: first {err_first:.3e} (tol {tol_first:g}), "
            f"second {err_second:.3e} (tol {tol_second:g})"
        ),
    )


def gradient_fd_check(
    n_seeds: int = 5,
    arch_string: str = "2-8-8-4",
    h: float = 1e-5,
    tol: float = 1e-5,
) -> CheckResult:
    """Loss gradients (bare and augmented) against central finite differences."""
    arch = MLPArchitecture.from_string(arch_string)
    flow = FlowParameters()
    cset = sampling.hierarchical_datasets(2, DomainSpec(), seed=17)[1]  # 16 domain points
    worst = 0.0
    for seed in range(n_seeds):
        rng = np.random.default_rng(np.random.SeedSequence([seed, 0x9D]))
        params = net.init_parameters(arch, seed) + 0.1 * rng.standard_normal(
            net.parameter_count(arch)
        )
        for augmented in (False, True):
            spec = autodiff.LossSpec(augmented=augmented)
            grad, _ = autodiff.loss_gradient(arch, params, spec, cset, flow)
            fd = np.empty_like(grad)
            for i in range(params.size):
                shifted = params.copy()
                shifted[i] += h
                _, up = autodiff.loss_gradient(arch, shifted, spec, cset, flow)
                shifted[i] -= 2 * h
                _, down = autodiff.loss_gradient(arch, shifted, spec, cset, flow)
                fd[i] = (up - down) / (2 * h)
            worst = max(worst, float(relative_error(fd, grad).max()))
    return CheckResult(
        name="loss gradient vs finite differences",
        passed=bool(worst < tol),
        detail=f"max rel component err {worst:.3e} over {n_seeds} seeds (tol {tol:g})",
    )


def run_all_checks() -> list:
    with single_thread_blas():
        return [manufactured_solution_check(), jet_fd_check(), gradient_fd_check()]
