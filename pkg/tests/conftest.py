import os

# Single-threaded BLAS: every matrix in this package is small enough that
# thread hand-off costs more than it saves, and reductions stay bit-stable.
os.environ.setdefault("OPENBLAS_NUM_THREADS", "1")
os.environ.setdefault("OMP_NUM_THREADS", "1")

import numpy as np
import pytest

from thermopinn import DomainSpec, FlowParameters, MLPArchitecture
from thermopinn import net as net_mod


@pytest.fixture
def rect():
    return DomainSpec()


@pytest.fixture
def flow():
    return FlowParameters()


@pytest.fixture
def small_arch():
    return MLPArchitecture((2, 8, 8, 4))


def perturbed_params(arch, seed, scale=0.1):
    """Glorot init plus noise, so derivatives are not atypically small."""
    rng = np.random.default_rng(np.random.SeedSequence([seed, 0xA11CE]))
    return net_mod.init_parameters(arch, seed) + scale * rng.standard_normal(
        net_mod.parameter_count(arch)
    )


def max_relative_error(approx, exact, floor_scale=1e-2):
    """Max |approx-exact| over a floored denominator.

    The floor (a fraction of the largest |exact| entry) keeps entries that
    are pure cancellation noise from dominating the metric.
    """
    approx = np.asarray(approx, dtype=np.float64)
    exact = np.asarray(exact, dtype=np.float64)
    scale = np.abs(exact).max(initial=0.0)
    denom = np.maximum(np.abs(exact), max(floor_scale * scale, 1e-12))
    return float((np.abs(approx - exact) / denom).max())
