import numpy as np
import pytest

from thermopinn import FlowParameters, MLPArchitecture, evaluate_jet
from thermopinn import autodiff, net, sampling
from thermopinn.autodiff import LossSpec, loss_gradient
from thermopinn.fields import VAL
from thermopinn.net import pack_parameters, split_parameters
from thermopinn.physics import DomainSpec, ForcingArrays

from conftest import max_relative_error, perturbed_params


def fd_jets(arch, params, pts, h1=1e-5, h2=1e-4):
    """Independent central-difference jet oracle built on forward values.

    First derivatives use h = 1e-5. Second derivatives use h = 1e-4: at
    1e-5 their roundoff (~4 eps |f| / h^2) would swamp the tolerances being
    checked, while 1e-4 balances roundoff against truncation.
    """
    def values(q):
        return autodiff.field_jets(arch, params, q)[:, VAL, :]

    n = pts.shape[0]
    offs = np.array(
        [
            (0, 0),
            (h1, 0), (-h1, 0), (0, h1), (0, -h1),
            (h2, 0), (-h2, 0), (0, h2), (0, -h2),
            (h2, h2), (h2, -h2), (-h2, h2), (-h2, -h2),
        ]
    )
    vals = values((pts[:, None, :] + offs[None, :, :]).reshape(-1, 2)).reshape(n, 13, 4)
    first = np.stack(
        [(vals[:, 1] - vals[:, 2]) / (2 * h1), (vals[:, 3] - vals[:, 4]) / (2 * h1)], axis=1
    )
    second = np.stack(
        [
            (vals[:, 5] - 2 * vals[:, 0] + vals[:, 6]) / h2**2,
            (vals[:, 9] - vals[:, 10] - vals[:, 11] + vals[:, 12]) / (4 * h2**2),
            (vals[:, 7] - 2 * vals[:, 0] + vals[:, 8]) / h2**2,
        ],
        axis=1,
    )
    return first, second


class TestEvaluateJet:
    def test_zero_params_all_zero(self):
        arch = MLPArchitecture((2, 5, 4))
        jet = evaluate_jet(arch, np.zeros(net.parameter_count(arch)), (0.3, 0.8))
        np.testing.assert_array_equal(jet.as_array(), np.zeros((6, 4)))

    def test_linear_network_derivatives(self):
        arch = MLPArchitecture((2, 4))
        layers = split_parameters(arch, np.zeros(12))
        rows = np.array([[1.0, 2.0], [0.5, -1.0], [0.0, 3.0], [-2.0, 0.25]])
        layers[0][0][:] = rows
        params = pack_parameters(layers)
        jet = evaluate_jet(arch, params, (0.7, -0.1)).as_array()
        np.testing.assert_allclose(jet[1, :], rows[:, 0], rtol=0, atol=0)
        np.testing.assert_allclose(jet[2, :], rows[:, 1], rtol=0, atol=0)
        np.testing.assert_array_equal(jet[3:, :], np.zeros((3, 4)))

    def test_tanh_chain_values(self):
        # u = tanh(x): u_x = 1 - tanh(x)^2, u_xx = -2 tanh(x) (1 - tanh(x)^2)
        arch = MLPArchitecture((2, 1, 4))
        layers = split_parameters(arch, np.zeros(net.parameter_count(arch)))
        layers[0][0][:] = [[1.0, 0.0]]
        layers[1][0][:] = [[1.0], [0.0], [0.0], [0.0]]
        params = pack_parameters(layers)

        jet0 = evaluate_jet(arch, params, (0.0, 0.0))
        assert jet0.u.dx == pytest.approx(1.0, abs=1e-15)
        assert jet0.u.dxx == pytest.approx(0.0, abs=1e-15)

        jet1 = evaluate_jet(arch, params, (1.0, 0.0))
        t = np.tanh(1.0)
        assert jet1.u.dx == pytest.approx(1.0 - t * t, rel=1e-14)  # ~0.41997
        assert jet1.u.dxx == pytest.approx(-2.0 * t * (1.0 - t * t), rel=1e-14)  # ~-0.63970

    def test_values_match_forward_bitwise(self):
        arch = MLPArchitecture((2, 16, 16, 4))
        params = perturbed_params(arch, 2)
        for point in [(0.2, -0.5), (-0.9, 0.9)]:
            jet_values = evaluate_jet(arch, params, point).values().as_array()
            fwd_values = net.forward(arch, params, point).as_array()
            np.testing.assert_array_equal(jet_values, fwd_values)

    def test_mixed_partial_symmetry_against_fd(self):
        arch = MLPArchitecture((2, 12, 4))
        params = perturbed_params(arch, 7)
        pts = np.random.default_rng(3).uniform(-0.9, 0.9, (30, 2))
        jets = autodiff.field_jets(arch, params, pts)
        _, fd_second = fd_jets(arch, params, pts)
        assert max_relative_error(fd_second[:, 1, :], jets[:, 4, :]) < 1e-4

    @pytest.mark.parametrize("widths", [(2, 8, 4), (2, 16, 16, 4), (2, 8, 8, 8, 4)])
    def test_jets_match_fd(self, widths):
        arch = MLPArchitecture(widths)
        params = perturbed_params(arch, sum(widths))
        pts = np.random.default_rng(11).uniform(-0.9, 0.9, (40, 2))
        jets = autodiff.field_jets(arch, params, pts)
        fd_first, fd_second = fd_jets(arch, params, pts)
        assert max_relative_error(fd_first, jets[:, 1:3, :]) < 1e-5
        assert max_relative_error(fd_second, jets[:, 3:6, :]) < 1e-4


class TestLossGradient:
    @pytest.fixture
    def cset(self):
        return sampling.hierarchical_datasets(2, DomainSpec(), seed=5)[1]

    def test_zero_loss_means_zero_gradient(self, cset):
        # Zero forcing and zero Dirichlet data make the all-zero network an
        # exact global minimizer; the gradient must vanish there.
        def zero_forcing(points, flow):
            n = points.shape[0]
            return ForcingArrays(fb=np.zeros((n, 2)), f=np.zeros(n), div_fb=np.zeros(n))

        zero_targets = sampling.CollocationSet(
            domain_points=cset.domain_points,
            boundary_points=cset.boundary_points,
            boundary_edges=cset.boundary_edges,
            boundary_targets=np.zeros_like(cset.boundary_targets),
            boundary_pressure=None,
            level=cset.level,
            seed=cset.seed,
        )
        arch = MLPArchitecture((2, 6, 4))
        params = np.zeros(net.parameter_count(arch))
        spec = LossSpec(augmented=True, forcing=zero_forcing)
        grad, loss = loss_gradient(arch, params, spec, zero_targets, FlowParameters())
        assert loss == 0.0
        np.testing.assert_array_equal(grad, np.zeros_like(grad))

    @pytest.mark.parametrize("augmented", [False, True])
    def test_gradient_matches_fd(self, cset, augmented, small_arch, flow):
        params = perturbed_params(small_arch, 1)
        spec = LossSpec(augmented=augmented)
        grad, _ = loss_gradient(small_arch, params, spec, cset, flow)
        h = 1e-5
        fd = np.empty_like(grad)
        for i in range(params.size):
            shifted = params.copy()
            shifted[i] += h
            _, up = loss_gradient(small_arch, shifted, spec, cset, flow)
            shifted[i] -= 2 * h
            _, down = loss_gradient(small_arch, shifted, spec, cset, flow)
            fd[i] = (up - down) / (2 * h)
        assert max_relative_error(fd, grad) < 1e-5

    def test_duplication_invariance(self, cset, small_arch, flow):
        params = perturbed_params(small_arch, 4)
        doubled = sampling.CollocationSet(
            domain_points=np.concatenate([cset.domain_points] * 2),
            boundary_points=np.concatenate([cset.boundary_points] * 2),
            boundary_edges=cset.boundary_edges * 2,
            boundary_targets=np.concatenate([cset.boundary_targets] * 2),
            boundary_pressure=None,
            level=cset.level,
            seed=cset.seed,
        )
        spec = LossSpec(augmented=True)
        grad_a, loss_a = loss_gradient(small_arch, params, spec, cset, FlowParameters())
        grad_b, loss_b = loss_gradient(small_arch, params, spec, doubled, FlowParameters())
        assert loss_a == pytest.approx(loss_b, rel=1e-14)
        np.testing.assert_allclose(grad_a, grad_b, rtol=1e-12, atol=1e-14)

    def test_pressure_boundary_term_changes_gradient(self, cset, small_arch, flow):
        params = perturbed_params(small_arch, 8)
        base = LossSpec(augmented=False)
        with_p = LossSpec(augmented=False, include_pressure_boundary=True)
        grad_a, _ = loss_gradient(small_arch, params, base, cset, flow)
        grad_b, _ = loss_gradient(small_arch, params, with_p, cset, flow)
        assert not np.array_equal(grad_a, grad_b)

    def test_pressure_boundary_gradient_matches_fd(self, cset, small_arch, flow):
        params = perturbed_params(small_arch, 9)
        spec = LossSpec(augmented=True, include_pressure_boundary=True)
        grad, _ = loss_gradient(small_arch, params, spec, cset, flow)
        h = 1e-5
        fd = np.empty_like(grad)
        for i in range(params.size):
            shifted = params.copy()
            shifted[i] += h
            _, up = loss_gradient(small_arch, shifted, spec, cset, flow)
            shifted[i] -= 2 * h
            _, down = loss_gradient(small_arch, shifted, spec, cset, flow)
            fd[i] = (up - down) / (2 * h)
        assert max_relative_error(fd, grad) < 1e-5
