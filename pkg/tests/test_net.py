import numpy as np
import pytest

from thermopinn import MLPArchitecture, forward, init_parameters, parameter_count
from thermopinn.errors import ArchitectureError
from thermopinn.net import pack_parameters, split_parameters


class TestArchitecture:
    def test_string_round_trip(self):
        arch = MLPArchitecture.from_string("2-128-128-4")
        assert arch.layer_widths == (2, 128, 128, 4)
        assert arch.to_string() == "2-128-128-4"
        assert arch.n_hidden == 2

    def test_no_hidden_layers_allowed(self):
        assert MLPArchitecture((2, 4)).n_hidden == 0

    @pytest.mark.parametrize("widths", [(2,), (3, 4), (2, 5), (2, 0, 4), (2, -1, 4)])
    def test_invalid_widths_rejected(self, widths):
        with pytest.raises(ArchitectureError):
            MLPArchitecture(widths)

    def test_unknown_activation_rejected(self):
        with pytest.raises(ArchitectureError):
            MLPArchitecture((2, 4), activation="relu")

    def test_bad_string_rejected(self):
        with pytest.raises(ArchitectureError):
            MLPArchitecture.from_string("2-wide-4")


class TestParameterCount:
    @pytest.mark.parametrize(
        "widths,expected",
        [
            ((2, 32, 4), 228),
            ((2, 64, 64, 4), 4612),
            ((2, 4), 12),
            # (2*128+128) + (128*128+128) + (128*4+4)
            ((2, 128, 128, 4), 17412),
        ],
    )
    def test_counts(self, widths, expected):
        assert parameter_count(MLPArchitecture(widths)) == expected

    def test_count_matches_init_length(self):
        for widths in [(2, 4), (2, 7, 4), (2, 16, 16, 4)]:
            arch = MLPArchitecture(widths)
            for seed in (0, 1, 12345):
                assert init_parameters(arch, seed).size == parameter_count(arch)


class TestInitParameters:
    def test_biases_zero_weights_bounded(self):
        arch = MLPArchitecture((2, 4))
        params = init_parameters(arch, 3)
        assert params.size == 12
        np.testing.assert_array_equal(params[8:], np.zeros(4))
        bound = np.sqrt(6.0 / (2 + 4))
        assert np.all(np.abs(params[:8]) <= bound)

    def test_glorot_bound_per_layer(self):
        arch = MLPArchitecture((2, 128, 128, 4))
        layers = split_parameters(arch, init_parameters(arch, 9))
        for (w, b), (fan_in, fan_out) in zip(layers, [(2, 128), (128, 128), (128, 4)]):
            bound = np.sqrt(6.0 / (fan_in + fan_out))
            assert np.all(np.abs(w) <= bound)
            np.testing.assert_array_equal(b, np.zeros(fan_out))

    def test_deterministic_under_seed(self):
        arch = MLPArchitecture((2, 128, 128, 4))
        a = init_parameters(arch, 42)
        b = init_parameters(arch, 42)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, init_parameters(arch, 43))


class TestForward:
    def test_zero_parameters_zero_output(self):
        arch = MLPArchitecture((2, 3, 4))
        params = np.zeros(parameter_count(arch))
        for point in [(0.0, 0.0), (0.5, -0.25), (-1.0, 1.0)]:
            state = forward(arch, params, point)
            assert state.as_array().tolist() == [0.0, 0.0, 0.0, 0.0]

    def test_linear_identity_padded(self):
        arch = MLPArchitecture((2, 4))
        layers = split_parameters(arch, np.zeros(12))
        layers[0][0][:] = [[1.0, 0.0], [0.0, 1.0], [0.0, 0.0], [0.0, 0.0]]
        params = pack_parameters(layers)
        state = forward(arch, params, (0.3, -0.7))
        assert (state.u, state.v, state.p, state.theta) == (0.3, -0.7, 0.0, 0.0)

    def test_two_layer_tanh_path(self):
        # hidden weights (1, 0), output weights (c, 0, 0, 0): u = c*tanh(x)
        arch = MLPArchitecture((2, 1, 4))
        c = 1.7
        layers = split_parameters(arch, np.zeros(parameter_count(arch)))
        layers[0][0][:] = [[1.0, 0.0]]
        layers[1][0][:] = [[c], [0.0], [0.0], [0.0]]
        params = pack_parameters(layers)
        for x, y in [(0.0, 0.4), (1.0, -0.2), (-0.6, 0.0)]:
            state = forward(arch, params, (x, y))
            assert state.u == pytest.approx(c * np.tanh(x), rel=1e-15)
            assert (state.v, state.p, state.theta) == (0.0, 0.0, 0.0)

    def test_parameter_length_mismatch(self):
        arch = MLPArchitecture((2, 8, 4))
        with pytest.raises(ArchitectureError):
            forward(arch, np.zeros(5), (0.0, 0.0))

    def test_deterministic(self):
        arch = MLPArchitecture((2, 16, 4))
        params = init_parameters(arch, 5)
        a = forward(arch, params, (0.1, 0.2)).as_array()
        b = forward(arch, params, (0.1, 0.2)).as_array()
        np.testing.assert_array_equal(a, b)
