"""Residual minimization with Adam or L-BFGS, stopping criteria, residual
decomposition logging, and transfer-learning warm starts.

Training is full batch: the datasets stay small and the stopping thresholds
refer to the full residual. Every run is a deterministic function of its
inputs and the config seed.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from . import autodiff, sampling
from ._threads import single_thread_blas
from .autodiff import LossSpec
from .errors import CheckpointError, ConfigurationError, NumericalOverflowError
from .net import MLPArchitecture, parameter_count
from .physics import FlowParameters, ResidualBreakdown

STATUS_CONVERGED = "Converged"
STATUS_MAX_EPOCHS = "MaxEpochsReached"
STATUS_DIVERGED = "Diverged"


@dataclass(frozen=True)
class TrainConfig:
    """Optimizer selection, stopping rule, and split/seed bookkeeping."""

    optimizer: str = "adam"
    learning_rate: float = 1e-3
    threshold: float = 1e-2
    max_epochs: int = 50_000
    augmented: bool = True
    validation_fraction: float = 0.15
    seed: int = 0
    lbfgs_history: int = 20
    wolfe_c1: float = 1e-4
    wolfe_c2: float = 0.9
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    include_pressure_boundary: bool = False
    divergence_limit: float = 1e6

    def __post_init__(self):
        if self.optimizer not in ("adam", "lbfgs"):
            raise ConfigurationError(f"unknown optimizer {self.optimizer!r}")
        if not self.threshold > 0.0:
            raise ConfigurationError("threshold must be positive")
        if self.max_epochs < 0:
            raise ConfigurationError("max_epochs must be nonnegative")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise ConfigurationError("validation_fraction must be in [0, 1)")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    breakdown: ResidualBreakdown
    validation_total: float  # NaN when no usable validation split


@dataclass
class TrainingHistory:
    records: List[EpochRecord] = field(default_factory=list)
    status: str = STATUS_MAX_EPOCHS
    epochs_used: int = 0
    note: str = ""

    @property
    def final_total(self) -> float:
        return self.records[-1].breakdown.r_total if self.records else math.nan


# ---------------------------------------------------------------------------
# Adam
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AdamHyper:
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


@dataclass(frozen=True)
class AdamState:
    m: np.ndarray
    v: np.ndarray

    @staticmethod
    def zeros(n: int) -> "AdamState":
        return AdamState(m=np.zeros(n), v=np.zeros(n))


def adam_step(params: np.ndarray, grad: np.ndarray, state: AdamState, t: int, hyper: AdamHyper):
    """One bias-corrected Adam update; t is the 1-based step index."""
    m = hyper.beta1 * state.m + (1.0 - hyper.beta1) * grad
    v = hyper.beta2 * state.v + (1.0 - hyper.beta2) * grad * grad
    m_hat = m / (1.0 - hyper.beta1**t)
    v_hat = v / (1.0 - hyper.beta2**t)
    new_params = params - hyper.learning_rate * m_hat / (np.sqrt(v_hat) + hyper.eps)
    return new_params, AdamState(m=m, v=v)


# ---------------------------------------------------------------------------
# L-BFGS with strong-Wolfe line search
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LbfgsConfig:
    history: int = 20
    max_iterations: int = 500
    grad_tol: float = 1e-10
    loss_threshold: Optional[float] = None
    c1: float = 1e-4
    c2: float = 0.9
    max_step_growth: int = 50
    max_zoom_iters: int = 30


@dataclass
class LbfgsResult:
    x: np.ndarray
    f: float
    grad: np.ndarray
    iterations: int
    converged: bool
    stop_reason: str  # gradient_norm | loss_threshold | max_iterations | line_search_failure


class _Eval:
    """One (f, grad, aux) evaluation along a search ray."""

    __slots__ = ("alpha", "f", "grad", "aux", "dphi")

    def __init__(self, alpha, f, grad, aux, dphi):
        self.alpha, self.f, self.grad, self.aux, self.dphi = alpha, f, grad, aux, dphi


def _interp_cubic(a0, f0, g0, a1, f1, g1):
    """Minimizer of the cubic through two (alpha, value, slope) samples."""
    if a0 == a1:
        return None
    d1 = g0 + g1 - 3.0 * (f0 - f1) / (a0 - a1)
    radical = d1 * d1 - g0 * g1
    if not radical >= 0.0:
        return None
    d2 = math.sqrt(radical)
    if a1 < a0:
        d2 = -d2
    denom = g1 - g0 + 2.0 * d2
    if denom == 0.0:
        return None
    return a1 - (a1 - a0) * (g1 + d2 - d1) / denom


def _wolfe_search(phi, f0, dphi0, alpha_init, c1, c2, max_growth, max_zoom):
    """Strong-Wolfe step selection (bracket, then zoom with cubic interpolation).

    ``phi(alpha)`` evaluates the objective along the ray and returns an _Eval
    (with f = inf when the point is not evaluable). Returns the accepted
    _Eval or None, plus the best finite _Eval seen.
    """
    best = None

    def consider(ev):
        nonlocal best
        if ev.grad is not None and math.isfinite(ev.f) and (best is None or ev.f < best.f):
            best = ev

    def zoom(lo, hi):
        for _ in range(max_zoom):
            aj = _interp_cubic(lo.alpha, lo.f, lo.dphi, hi.alpha, hi.f, hi.dphi)
            a_min, a_max = min(lo.alpha, hi.alpha), max(lo.alpha, hi.alpha)
            width = a_max - a_min
            if width <= 1e-16 * max(1.0, a_max):
                return None
            if aj is None or not (a_min + 0.1 * width <= aj <= a_max - 0.1 * width):
                aj = 0.5 * (a_min + a_max)
            ev = phi(aj)
            consider(ev)
            if not math.isfinite(ev.f) or ev.f > f0 + c1 * aj * dphi0 or ev.f >= lo.f:
                hi = ev
            else:
                if abs(ev.dphi) <= -c2 * dphi0:
                    return ev
                if ev.dphi * (hi.alpha - lo.alpha) >= 0.0:
                    hi = lo
                lo = ev
        return None

    prev = _Eval(0.0, f0, None, None, dphi0)
    alpha = alpha_init
    for i in range(max_growth):
        ev = phi(alpha)
        consider(ev)
        if not math.isfinite(ev.f) or ev.f > f0 + c1 * alpha * dphi0 or (i > 0 and ev.f >= prev.f):
            return zoom(prev, ev), best
        if abs(ev.dphi) <= -c2 * dphi0:
            return ev, best
        if ev.dphi >= 0.0:
            return zoom(ev, prev), best
        prev = ev
        alpha = 2.0 * alpha
    return None, best


class LbfgsStepper:
    """Limited-memory BFGS direction plus strong-Wolfe step, one call per iterate.

    ``fg(x)`` must return (value, gradient, aux); the aux of the accepted
    point is handed back so callers can log it without re-evaluating.
    """

    def __init__(self, config: LbfgsConfig):
        self.config = config
        self.memory = []  # (s, y, rho), newest last
        self.first_step = True

    def _direction(self, grad: np.ndarray) -> np.ndarray:
        q = grad.copy()
        alphas = []
        for s, y, rho in reversed(self.memory):
            a = rho * (s @ q)
            alphas.append(a)
            q -= a * y
        if self.memory:
            s, y, _ = self.memory[-1]
            q *= (s @ y) / (y @ y)
        for (s, y, rho), a in zip(self.memory, reversed(alphas)):
            q += (a - rho * (y @ q)) * s
        return -q

    def _push(self, s: np.ndarray, y: np.ndarray) -> None:
        sy = s @ y
        if sy > 1e-10 * np.linalg.norm(s) * np.linalg.norm(y):
            self.memory.append((s, y, 1.0 / sy))
            if len(self.memory) > self.config.history:
                self.memory.pop(0)

    def _attempt(self, fg, x, f, grad, direction):
        dphi0 = float(grad @ direction)
        if dphi0 >= 0.0:
            return None, None

        def phi(alpha):
            try:
                f_a, g_a, aux_a = fg(x + alpha * direction)
            except NumericalOverflowError:
                return _Eval(alpha, math.inf, None, None, math.inf)
            if not math.isfinite(f_a):
                return _Eval(alpha, math.inf, g_a, aux_a, math.inf)
            return _Eval(alpha, f_a, g_a, aux_a, float(g_a @ direction))

        if self.first_step:
            alpha0 = min(1.0, 1.0 / max(1.0, float(np.abs(grad).max())))
        else:
            alpha0 = 1.0
        return _wolfe_search(
            phi, f, dphi0, alpha0,
            self.config.c1, self.config.c2,
            self.config.max_step_growth, self.config.max_zoom_iters,
        )

    def step(self, fg: Callable, x: np.ndarray, f: float, grad: np.ndarray):
        """Advance one iterate.

        Returns (ok, x1, f1, grad1, aux1). On line-search failure (even after
        a memory reset) ok is False and the best strictly improving point
        found, if any, is returned; otherwise the inputs come back unchanged.
        """
        direction = self._direction(grad)
        accepted, best = self._attempt(fg, x, f, grad, direction)
        if accepted is None and self.memory:
            self.memory.clear()
            direction = -grad
            retry_accepted, retry_best = self._attempt(fg, x, f, grad, direction)
            accepted = retry_accepted
            if retry_best is not None and (best is None or retry_best.f < best.f):
                best = retry_best
        self.first_step = False
        if accepted is None:
            if best is not None and best.f < f:
                return False, x + best.alpha * direction, best.f, best.grad, best.aux
            return False, x, f, grad, None
        x1 = x + accepted.alpha * direction
        self._push(x1 - x, accepted.grad - grad)
        return True, x1, accepted.f, accepted.grad, accepted.aux


def _with_aux(fg: Callable) -> Callable:
    """Normalize a (f, grad) callable to the (f, grad, aux) protocol."""

    def wrapped(x):
        out = fg(x)
        if len(out) == 2:
            return out[0], out[1], None
        return out

    return wrapped


def lbfgs_minimize(fg: Callable, x0: np.ndarray, config: LbfgsConfig = LbfgsConfig()) -> LbfgsResult:
    """Minimize a smooth function given its value-and-gradient callable.

    ``fg(x)`` returns (value, gradient). Terminates on the gradient infinity
    norm, on the optional loss threshold, on the iteration cap, or when the
    line search cannot make progress (the best point seen is then returned,
    flagged via stop_reason).
    """
    fg = _with_aux(fg)
    x = np.asarray(x0, dtype=np.float64).copy()
    with single_thread_blas():
        f, grad, _ = fg(x)
        stepper = LbfgsStepper(config)
        iterations = 0
        while True:
            if config.loss_threshold is not None and f <= config.loss_threshold:
                return LbfgsResult(x, f, grad, iterations, True, "loss_threshold")
            if float(np.abs(grad).max(initial=0.0)) <= config.grad_tol:
                return LbfgsResult(x, f, grad, iterations, True, "gradient_norm")
            if iterations >= config.max_iterations:
                return LbfgsResult(x, f, grad, iterations, False, "max_iterations")
            ok, x, f, grad, _aux = stepper.step(fg, x, f, grad)
            iterations += 1
            if not ok:
                return LbfgsResult(x, f, grad, iterations, False, "line_search_failure")


# ---------------------------------------------------------------------------
# Training loop
# ---------------------------------------------------------------------------


def train(
    arch: MLPArchitecture,
    initial_params: np.ndarray,
    collocation: sampling.CollocationSet,
    flow: FlowParameters,
    forcing: Callable = None,
    config: TrainConfig = TrainConfig(),
    on_epoch: Optional[Callable] = None,
):
    """Minimize the total residual; returns (params, TrainingHistory).

    Stops with status Converged when the active total drops to the threshold,
    MaxEpochsReached at the epoch cap, or Diverged on a non-finite or runaway
    loss. The validation residual is logged every epoch but never used for
    stopping. ``on_epoch(epoch, params, breakdown)`` is a monitoring hook
    called once per logged epoch.
    """
    from .physics import beltrami_forcing_arrays

    if forcing is None:
        forcing = beltrami_forcing_arrays
    loss_spec = LossSpec(
        augmented=config.augmented,
        include_pressure_boundary=config.include_pressure_boundary,
        forcing=forcing,
    )
    if config.validation_fraction > 0.0:
        train_set, val_set = sampling.split_validation(
            collocation, config.validation_fraction, config.seed
        )
        if val_set.n_domain < 1 or val_set.n_boundary < 1:
            val_set = None
        if train_set.n_domain < 1 or train_set.n_boundary < 1:
            raise ConfigurationError("validation split left no usable training points")
    else:
        train_set, val_set = collocation, None

    train_eval = autodiff.LossEvaluator(arch, loss_spec, train_set, flow)
    val_eval = autodiff.LossEvaluator(arch, loss_spec, val_set, flow) if val_set is not None else None

    def fg(p):
        return train_eval.loss_and_gradient(p)

    def validation_total(p):
        if val_eval is None:
            return math.nan
        return val_eval.loss_only(p).r_total

    params = np.asarray(initial_params, dtype=np.float64).copy()
    history = TrainingHistory()
    if config.max_epochs == 0:
        return params, history

    adam_state = AdamState.zeros(params.size)
    adam_hyper = AdamHyper(config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps)
    stepper = LbfgsStepper(
        LbfgsConfig(history=config.lbfgs_history, c1=config.wolfe_c1, c2=config.wolfe_c2)
    )

    with single_thread_blas():
        try:
            f, grad, breakdown = fg(params)
        except NumericalOverflowError:
            history.status = STATUS_DIVERGED
            history.note = "overflow at initial evaluation"
            return params, history

        prev_params = params
        for epoch in range(1, config.max_epochs + 1):
            history.records.append(EpochRecord(epoch, breakdown, validation_total(params)))
            history.epochs_used = epoch
            if on_epoch is not None:
                on_epoch(epoch, params, breakdown)
            total = breakdown.r_total
            if total <= config.threshold:
                history.status = STATUS_CONVERGED
                return params, history
            if not math.isfinite(total) or total > config.divergence_limit:
                history.status = STATUS_DIVERGED
                return params, history
            if epoch == config.max_epochs:
                history.status = STATUS_MAX_EPOCHS
                return params, history

            prev_params = params
            if config.optimizer == "adam":
                params, adam_state = adam_step(params, grad, adam_state, epoch, adam_hyper)
                try:
                    f, grad, breakdown = fg(params)
                except NumericalOverflowError:
                    history.status = STATUS_DIVERGED
                    history.note = "overflow after adam step"
                    return prev_params, history
            else:
                ok, params, f, grad, breakdown = stepper.step(fg, params, f, grad)
                if not ok:
                    if breakdown is None:
                        history.status = STATUS_MAX_EPOCHS
                        history.note = "line_search_failure"
                        return params, history
                    # Improving but non-Wolfe point: log it next epoch, then
                    # stop unless it happens to satisfy a stopping rule.
                    history.records.append(
                        EpochRecord(epoch + 1, breakdown, validation_total(params))
                    )
                    history.epochs_used = epoch + 1
                    if on_epoch is not None:
                        on_epoch(epoch + 1, params, breakdown)
                    if breakdown.r_total <= config.threshold:
                        history.status = STATUS_CONVERGED
                    else:
                        history.status = STATUS_MAX_EPOCHS
                        history.note = "line_search_failure"
                    return params, history

    history.status = STATUS_MAX_EPOCHS
    return params, history


def transfer_learn(
    arch: MLPArchitecture,
    checkpoint_params: np.ndarray,
    collocation: sampling.CollocationSet,
    flow: FlowParameters,
    forcing: Callable = None,
    config: Optional[TrainConfig] = None,
):
    """Continue training from previously optimized parameters.

    Defaults to the L-BFGS optimizer, which suits fine-tuning an already
    trained network. The checkpoint must match the target architecture.
    """
    checkpoint_params = np.asarray(checkpoint_params, dtype=np.float64)
    if checkpoint_params.ndim != 1 or checkpoint_params.size != parameter_count(arch):
        raise CheckpointError(
            f"checkpoint has {checkpoint_params.size} parameters but architecture "
            f"{arch.to_string()} needs {parameter_count(arch)}"
        )
    if config is None:
        config = TrainConfig(optimizer="lbfgs")
    return train(arch, checkpoint_params, collocation, flow, forcing, config)


@dataclass
class ThresholdSnapshot:
    """State captured the first time the active total crossed a threshold."""

    threshold: float
    params: np.ndarray
    epoch: int
    achieved_total: float
    reached: bool


def train_threshold_ladder(
    arch: MLPArchitecture,
    initial_params: np.ndarray,
    collocation: sampling.CollocationSet,
    flow: FlowParameters,
    forcing: Callable,
    config: TrainConfig,
    thresholds,
):
    """Train once to the tightest threshold, snapshotting each crossing.

    With a deterministic full-batch optimizer, the state at the first crossing
    of a threshold is identical to the result of a separate run stopped at
    that threshold, so one run serves a whole threshold ladder. Returns
    (snapshots keyed by threshold, final params, TrainingHistory).
    """
    thresholds = sorted(set(float(t) for t in thresholds), reverse=True)
    config = dataclasses.replace(config, threshold=min(thresholds))
    snapshots = {}

    def on_epoch(epoch, params, breakdown):
        for t in thresholds:
            if t not in snapshots and breakdown.r_total <= t:
                snapshots[t] = ThresholdSnapshot(
                    threshold=t,
                    params=params.copy(),
                    epoch=epoch,
                    achieved_total=breakdown.r_total,
                    reached=True,
                )

    params, history = train(arch, initial_params, collocation, flow, forcing, config, on_epoch=on_epoch)
    for t in thresholds:
        if t not in snapshots:
            snapshots[t] = ThresholdSnapshot(
                threshold=t,
                params=params.copy(),
                epoch=history.epochs_used,
                achieved_total=history.final_total,
                reached=False,
            )
    return snapshots, params, history
