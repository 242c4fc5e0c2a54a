import math

import numpy as np
import pytest

from thermopinn import FlowParameters, beltrami_exact, beltrami_exact_jet
from thermopinn import physics
from thermopinn.errors import ConfigurationError
from thermopinn.fields import FieldJet2, FieldState, ScalarJet2
from thermopinn.physics import (
    DomainSpec,
    augmentation_residual_point,
    beltrami_forcing,
    beltrami_forcing_divergence,
    boundary_residual_point,
    domain_residual_point,
    total_loss,
)

PI = math.pi

ZERO_JET = ScalarJet2(0, 0, 0, 0, 0, 0)


def jet_with(**fields):
    base = {"u": ZERO_JET, "v": ZERO_JET, "p": ZERO_JET, "theta": ZERO_JET}
    base.update(fields)
    return FieldJet2(**base)


class TestFlowParameters:
    def test_defaults(self, flow):
        assert (flow.nu, flow.alpha, flow.beta) == (1.0, 1.0, 1.0)
        assert flow.g == (0.0, -1.0)

    def test_reynolds_mapping(self):
        assert FlowParameters.for_reynolds(10.0).nu == pytest.approx(0.1)

    @pytest.mark.parametrize("kwargs", [{"nu": 0.0}, {"alpha": -1.0}, {"nu": float("nan")}])
    def test_invalid_rejected(self, kwargs):
        with pytest.raises(ConfigurationError):
            FlowParameters(**kwargs)


class TestDomainSpec:
    def test_dimensions(self):
        rect = DomainSpec(0.0, 1.0, -1.0, 1.0)
        assert rect.width == 1.0 and rect.height == 2.0

    def test_degenerate_rejected(self):
        with pytest.raises(ConfigurationError):
            DomainSpec(1.0, 1.0, 0.0, 2.0)


class TestBeltramiExact:
    @pytest.mark.parametrize(
        "point,expected",
        [
            ((0.0, 0.0), (0.0, 0.0, -0.5, 1.0)),
            ((0.0, 0.5), (-1.0, 0.0, 0.0, 0.0)),
            ((0.5, 0.5), (0.0, 0.0, 0.5, 0.0)),
        ],
    )
    def test_reference_values(self, point, expected):
        state = beltrami_exact(point)
        np.testing.assert_allclose(state.as_array(), expected, atol=1e-15)

    def test_jet_reference_values(self):
        jet = beltrami_exact_jet((0.5, 0.5))
        assert jet.u.dx == pytest.approx(PI, rel=1e-15)
        jet0 = beltrami_exact_jet((0.0, 0.0))
        assert jet0.theta.dxx + jet0.theta.dyy == pytest.approx(-2.0 * PI * PI, rel=1e-15)

    def test_divergence_free_everywhere(self):
        pts = np.random.default_rng(0).uniform(-1, 1, (200, 2))
        jets = physics.beltrami_jets(pts)
        divergence = jets[:, 1, 0] + jets[:, 2, 1]
        np.testing.assert_allclose(divergence, 0.0, atol=1e-13)

    def test_jet_matches_fd_of_exact(self):
        h = 1e-6
        pts = np.random.default_rng(1).uniform(-1, 1, (100, 2))
        jets = physics.beltrami_jets(pts)
        for dim, comp in ((0, 1), (1, 2)):
            shift = np.zeros(2)
            shift[dim] = h
            fd = (physics.beltrami_fields(pts + shift) - physics.beltrami_fields(pts - shift)) / (2 * h)
            np.testing.assert_allclose(fd, jets[:, comp, :], rtol=1e-6, atol=1e-6)


class TestBeltramiForcing:
    def test_reference_values(self, flow):
        fb, f = beltrami_forcing((0.0, 0.0), flow)
        np.testing.assert_allclose(fb, [0.0, -1.0], atol=1e-15)
        assert f == pytest.approx(2.0 * PI * PI, rel=1e-15)  # ~19.7392

        # cos(pi/2) is ~6e-17 in floating point, so "zero" here means ~1e-15
        fb2, f2 = beltrami_forcing((0.5, 0.5), flow)
        np.testing.assert_allclose(fb2, [0.0, 0.0], atol=1e-14)
        assert f2 == pytest.approx(0.0, abs=1e-14)

    def test_viscous_part_linear_in_nu(self):
        pts = np.random.default_rng(2).uniform(-1, 1, (20, 2))
        base = physics.beltrami_forcing_arrays(pts, FlowParameters(nu=1.0))
        doubled = physics.beltrami_forcing_arrays(pts, FlowParameters(nu=2.0))
        buoyant = physics.beltrami_forcing_arrays(pts, FlowParameters(nu=1e-12))
        viscous = base.fb - buoyant.fb
        np.testing.assert_allclose(doubled.fb, base.fb + viscous, rtol=1e-9, atol=1e-12)

    def test_divergence_matches_fd(self, flow):
        h = 1e-6
        pts = np.random.default_rng(3).uniform(-1, 1, (20, 2))
        div = physics.beltrami_forcing_arrays(pts, flow).div_fb
        fd = (
            physics.beltrami_forcing_arrays(pts + [h, 0], flow).fb[:, 0]
            - physics.beltrami_forcing_arrays(pts - [h, 0], flow).fb[:, 0]
        ) / (2 * h) + (
            physics.beltrami_forcing_arrays(pts + [0, h], flow).fb[:, 1]
            - physics.beltrami_forcing_arrays(pts - [0, h], flow).fb[:, 1]
        ) / (2 * h)
        np.testing.assert_allclose(fd, div, rtol=1e-6, atol=1e-6)

    def test_divergence_zero_at_origin_and_without_buoyancy(self):
        assert beltrami_forcing_divergence((0.0, 0.0), FlowParameters()) == pytest.approx(0.0, abs=1e-15)
        no_buoyancy = FlowParameters(nu=1e-300, beta=0.0)
        pts = np.random.default_rng(4).uniform(-1, 1, (10, 2))
        div = physics.beltrami_forcing_arrays(pts, no_buoyancy).div_fb
        np.testing.assert_array_equal(div, np.zeros(10))


class TestResidualPoints:
    def test_manufactured_solution_annihilates_residuals(self, flow):
        pts = np.random.default_rng(5).uniform(-1, 1, (50, 2))
        for point in pts:
            jet = beltrami_exact_jet(point)
            fb, f = beltrami_forcing(point, flow)
            dom = domain_residual_point(jet, flow, fb, f)
            assert max(dom) < 1e-20
            aug = augmentation_residual_point(jet, flow, beltrami_forcing_divergence(point, flow))
            assert max(aug) < 1e-20

    def test_pressure_gradient_only(self, flow):
        jet = jet_with(p=ScalarJet2(0, 1.0, 0, 0, 0, 0))
        res = domain_residual_point(jet, flow, (0.0, 0.0), 0.0)
        assert res == (1.0, 0.0, 0.0, 0.0)

    def test_buoyancy_only(self, flow):
        jet = jet_with(theta=ScalarJet2(1.0, 0, 0, 0, 0, 0))
        res = domain_residual_point(jet, flow, (0.0, 0.0), 0.0)
        # g = (0, -1), beta = 1: momentum-y residual is (g_y * beta * theta)^2
        assert res[1] == pytest.approx(1.0, rel=1e-15)
        assert res[0] == 0.0
        # theta also drives the energy residual through the convection term
        # only via u, v which are zero here
        assert res[3] == 0.0

    def test_div_x_from_uxx(self, flow):
        jet = jet_with(u=ScalarJet2(0, 0.7, 0, 1.0, 0, 0))
        res = augmentation_residual_point(jet, flow, 0.0)
        assert res[1] == pytest.approx(1.0, rel=1e-15)

    def test_pressure_poisson_from_pxx(self, flow):
        jet = jet_with(p=ScalarJet2(0, 0, 0, 2.0, 0, 0))
        res = augmentation_residual_point(jet, flow, 0.0)
        assert res[0] == pytest.approx(4.0, rel=1e-15)

    def test_boundary_residual_examples(self):
        pred = FieldState(1.0, 2.0, 3.0, 4.0)
        assert boundary_residual_point(pred, (1.0, 2.0, 4.0)) == (0.0, 0.0, 0.0)

        off = FieldState(1.2, 2.0, 9.9, 4.0)
        res = boundary_residual_point(off, (1.0, 2.0, 4.0))
        assert res[0] == pytest.approx(0.04, rel=1e-12)
        assert res[1:] == (0.0, 0.0)

        # Beltrami target at (0, 0.5) is u = -1; pressure never enters.
        # theta there is cos(pi/2) ~ 6e-17, squared ~4e-33.
        target = beltrami_exact((0.0, 0.5))
        res = boundary_residual_point(
            FieldState(0.0, 0.0, 123.0, 0.0), (target.u, target.v, target.theta)
        )
        assert res[0] == 1.0
        assert res[1] == 0.0
        assert res[2] == pytest.approx(0.0, abs=1e-30)


class TestTotalLoss:
    def _exact_inputs(self, flow, n_dom=16, n_bnd=8, seed=6):
        rng = np.random.default_rng(seed)
        dom = rng.uniform(-1, 1, (n_dom, 2))
        bx = rng.uniform(-1, 1, n_bnd)
        bnd = np.column_stack([bx, np.full(n_bnd, -1.0)])
        jets = physics.beltrami_jets(dom)
        values = physics.beltrami_fields(bnd)
        targets = values[:, [0, 1, 3]]
        forcing = physics.beltrami_forcing_arrays(dom, flow)
        return jets, values, targets, forcing

    def test_exact_fields_give_zero(self, flow):
        jets, values, targets, forcing = self._exact_inputs(flow)
        bd = total_loss(jets, values, targets, flow, forcing, augmented=True)
        assert bd.r_total < 1e-20
        for name in ("r_u", "r_v", "r_div", "r_theta", "r_p", "r_div_x", "r_div_y"):
            assert getattr(bd, name) < 1e-25

    def test_single_residual_accounting(self, flow):
        jets = np.zeros((1, 6, 4))
        jets[0, 1, 2] = 1.0  # p_x = 1 -> momentum-x residual 1
        values = np.zeros((1, 4))
        targets = np.zeros((1, 3))
        forcing = physics.ForcingArrays(np.zeros((1, 2)), np.zeros(1), np.zeros(1))
        bd = total_loss(jets, values, targets, flow, forcing, augmented=False)
        assert bd.r_u == 1.0
        assert bd.r_domain == 1.0
        assert bd.r_total == 1.0

    def test_augmented_differs_exactly_by_augm(self, flow):
        rng = np.random.default_rng(7)
        jets = rng.standard_normal((10, 6, 4))
        values = rng.standard_normal((5, 4))
        targets = rng.standard_normal((5, 3))
        forcing = physics.ForcingArrays(
            rng.standard_normal((10, 2)), rng.standard_normal(10), rng.standard_normal(10)
        )
        bare = total_loss(jets, values, targets, flow, forcing, augmented=False)
        augm = total_loss(jets, values, targets, flow, forcing, augmented=True)
        assert bare.r_augm is None
        assert augm.r_total == pytest.approx(bare.r_total + augm.r_augm, rel=1e-15)

    def test_duplication_invariance(self, flow):
        jets, values, targets, forcing = self._exact_inputs(flow)
        rng = np.random.default_rng(8)
        jets = jets + 0.1 * rng.standard_normal(jets.shape)
        bd1 = total_loss(jets, values, targets, flow, forcing, augmented=True)
        forcing2 = physics.ForcingArrays(
            np.concatenate([forcing.fb] * 2),
            np.concatenate([forcing.f] * 2),
            np.concatenate([forcing.div_fb] * 2),
        )
        bd2 = total_loss(
            np.concatenate([jets] * 2),
            np.concatenate([values] * 2),
            np.concatenate([targets] * 2),
            flow,
            forcing2,
            augmented=True,
        )
        assert bd1.r_total == pytest.approx(bd2.r_total, rel=1e-14)

    def test_sum_identities(self, flow):
        rng = np.random.default_rng(9)
        jets = rng.standard_normal((12, 6, 4))
        values = rng.standard_normal((6, 4))
        targets = rng.standard_normal((6, 3))
        pressure_targets = rng.standard_normal(6)
        forcing = physics.ForcingArrays(
            rng.standard_normal((12, 2)), rng.standard_normal(12), rng.standard_normal(12)
        )
        bd = total_loss(jets, values, targets, flow, forcing, True, pressure_targets)
        ulp = np.spacing(bd.r_total)
        assert bd.r_domain == pytest.approx(bd.r_u + bd.r_v + bd.r_div + bd.r_theta, abs=8 * ulp)
        assert bd.r_boundary == pytest.approx(
            bd.r_u_b + bd.r_v_b + bd.r_theta_b + bd.r_p_b, abs=8 * ulp
        )
        assert bd.r_augm == pytest.approx(bd.r_p + bd.r_div_x + bd.r_div_y, abs=8 * ulp)
        assert bd.r_total == pytest.approx(bd.r_domain + bd.r_boundary + bd.r_augm, abs=8 * ulp)

    def test_empty_point_set_rejected(self, flow):
        forcing = physics.ForcingArrays(np.zeros((0, 2)), np.zeros(0), np.zeros(0))
        with pytest.raises(ConfigurationError):
            total_loss(
                np.zeros((0, 6, 4)), np.zeros((1, 4)), np.zeros((1, 3)), flow, forcing, False
            )
