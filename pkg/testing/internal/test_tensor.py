import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from latentsat.exceptions import DimensionError, NonFiniteError
from latentsat.helpers import make_rng
from latentsat.tensor import (as_tensor, conv2d, leaky_relu, linear, sigmoid,
                              sigmoid_array)


def naive_conv2d(x, k, b, stride, padding):
    c_in, h, w = x.shape
    c_out, _, kh, kw = k.shape
    xp = np.zeros((c_in, h + 2 * padding, w + 2 * padding))
    xp[:, padding:padding + h, padding:padding + w] = x
    oh = (h + 2 * padding - kh) // stride + 1
    ow = (w + 2 * padding - kw) // stride + 1
    out = np.zeros((c_out, oh, ow))
    for co in range(c_out):
        for oy in range(oh):
            for ox in range(ow):
                acc = float(b[co])
                for ci in range(c_in):
                    for ky in range(kh):
                        for kx in range(kw):
                            acc += float(xp[ci, oy * stride + ky, ox * stride + kx]) * \
                                float(k[co, ci, ky, kx])
                out[co, oy, ox] = acc
    return out


class Test_conv2d:
    @settings(max_examples=120, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1),
           c_in=st.integers(1, 3), c_out=st.integers(1, 3),
           size=st.integers(3, 9), kernel=st.integers(1, 3),
           stride=st.integers(1, 3), padding=st.integers(0, 2))
    def test_matches_naive_loops(self, seed, c_in, c_out, size, kernel, stride, padding):
        rng = make_rng(seed)
        x = rng.standard_normal((c_in, size, size)).astype(np.float32)
        k = rng.standard_normal((c_out, c_in, kernel, kernel)).astype(np.float32)
        b = rng.standard_normal(c_out).astype(np.float32)
        got = conv2d(x, k, b, stride=stride, padding=padding)
        want = naive_conv2d(x, k, b, stride, padding)
        assert got.dtype == np.float32
        assert got.shape == want.shape
        np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-5)

    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), stride=st.integers(1, 2),
           a=st.floats(-2, 2), c=st.floats(-2, 2))
    def test_linear_in_input(self, seed, stride, a, c):
        rng = make_rng(seed)
        x = rng.standard_normal((2, 7, 7)).astype(np.float32)
        y = rng.standard_normal((2, 7, 7)).astype(np.float32)
        k = rng.standard_normal((3, 2, 3, 3)).astype(np.float32)
        zero = np.zeros(3, np.float32)
        mixed = (np.float64(a) * x + np.float64(c) * y).astype(np.float32)
        got = conv2d(mixed, k, zero, stride=stride, padding=1).astype(np.float64)
        want = a * conv2d(x, k, zero, stride=stride, padding=1).astype(np.float64) + \
            c * conv2d(y, k, zero, stride=stride, padding=1).astype(np.float64)
        np.testing.assert_allclose(got, want, rtol=1e-5, atol=1e-5)

    def test_identity_and_zero_kernels(self, rng):
        x = rng.standard_normal((1, 5, 5)).astype(np.float32)
        one = np.ones((1, 1, 1, 1), np.float32)
        assert conv2d(x, one, np.zeros(1, np.float32)).tobytes() == x.tobytes()
        out = conv2d(x, np.zeros((2, 1, 3, 3), np.float32),
                     np.array([1.5, -2.0], np.float32), padding=1)
        assert np.all(out[0] == 1.5) and np.all(out[1] == -2.0)

    def test_stride_two_halves(self):
        x = np.ones((4, 32, 32), np.float32)
        sizes = []
        for c_out in (32, 64, 128, 256):
            x = conv2d(x, np.full((c_out, x.shape[0], 3, 3), 1e-3, np.float32),
                       np.zeros(c_out, np.float32), stride=2, padding=1)
            sizes.append(x.shape[1:])
        assert sizes == [(16, 16), (8, 8), (4, 4), (2, 2)]

    def test_output_shape_of_reference_layers(self):
        x = np.zeros((4, 32, 32), dtype=np.float32)
        k = np.zeros((32, 4, 3, 3), dtype=np.float32)
        assert conv2d(x, k, np.zeros(32, np.float32), stride=2, padding=1).shape == (32, 16, 16)

    def test_cross_correlation_convention(self):
        x = np.arange(9, dtype=np.float32).reshape(1, 3, 3)
        k = np.zeros((1, 1, 3, 3), dtype=np.float32)
        k[0, 0, 0, 0] = 1.0
        # unflipped kernel picks the top-left input
        assert conv2d(x, k, np.zeros(1, np.float32))[0, 0, 0] == 0.0
        k[0, 0, 0, 0], k[0, 0, 2, 2] = 0.0, 1.0
        assert conv2d(x, k, np.zeros(1, np.float32))[0, 0, 0] == 8.0

    def test_channel_mismatch(self):
        with pytest.raises(DimensionError):
            conv2d(np.zeros((3, 8, 8), np.float32), np.zeros((2, 4, 3, 3), np.float32),
                   np.zeros(2, np.float32))

    def test_kernel_larger_than_input(self):
        with pytest.raises(DimensionError):
            conv2d(np.zeros((1, 2, 2), np.float32), np.zeros((1, 1, 3, 3), np.float32),
                   np.zeros(1, np.float32))

    def test_bad_bias(self):
        with pytest.raises(DimensionError):
            conv2d(np.zeros((1, 4, 4), np.float32), np.zeros((2, 1, 3, 3), np.float32),
                   np.zeros(3, np.float32))

    def test_does_not_mutate_inputs(self, rng):
        x = rng.standard_normal((2, 6, 6)).astype(np.float32)
        k = rng.standard_normal((3, 2, 3, 3)).astype(np.float32)
        b = rng.standard_normal(3).astype(np.float32)
        before = (x.tobytes(), k.tobytes(), b.tobytes())
        conv2d(x, k, b, stride=2, padding=1)
        assert (x.tobytes(), k.tobytes(), b.tobytes()) == before


class Test_linear:
    @settings(max_examples=100, deadline=None)
    @given(seed=st.integers(0, 2 ** 32 - 1), m=st.integers(1, 12), n=st.integers(1, 24))
    def test_matches_loops(self, seed, m, n):
        rng = make_rng(seed)
        x = rng.standard_normal(n).astype(np.float32)
        w = rng.standard_normal((m, n)).astype(np.float32)
        b = rng.standard_normal(m).astype(np.float32)
        want = [sum(float(w[i, j]) * float(x[j]) for j in range(n)) + float(b[i])
                for i in range(m)]
        np.testing.assert_allclose(linear(x, w, b), want, rtol=1e-5, atol=1e-5)

    def test_identity_and_zero_weights(self, rng):
        x = rng.standard_normal(16).astype(np.float32)
        b = rng.standard_normal(8).astype(np.float32)
        assert linear(x, np.eye(16, dtype=np.float32), np.zeros(16, np.float32)).tobytes() \
            == x.tobytes()
        assert linear(x[:8], np.zeros((8, 8), np.float32), b).tobytes() \
            == b.tobytes()

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            linear(np.zeros(3, np.float32), np.zeros((2, 4), np.float32),
                   np.zeros(2, np.float32))


class Test_leaky_relu:
    def test_values(self):
        x = np.array([-2.0, -0.5, 0.0, 3.0], dtype=np.float32)
        np.testing.assert_allclose(leaky_relu(x, 0.01), [-0.02, -0.005, 0.0, 3.0], rtol=1e-6)
        assert leaky_relu(x, 0.01).dtype == np.float32

    @settings(max_examples=100)
    @given(values=st.lists(st.floats(-1e6, 1e6, width=32), min_size=1, max_size=64),
           alpha=st.floats(0, 1))
    def test_matches_elementwise_max(self, values, alpha):
        x = np.array(values, dtype=np.float32)
        want = [max(float(v), alpha * float(v)) for v in x]
        np.testing.assert_allclose(leaky_relu(x, alpha), want, rtol=1e-6, atol=1e-30)

    def test_negative_alpha(self):
        with pytest.raises(ValueError):
            leaky_relu(np.zeros(2, np.float32), -0.1)


class Test_sigmoid:
    def test_stable_at_extremes(self):
        assert sigmoid(1000.0) == 1.0
        assert sigmoid(-1000.0) == 0.0
        assert sigmoid(0.0) == 0.5

    @given(st.floats(-700, 700))
    def test_array_matches_scalar(self, z):
        assert math.isclose(float(sigmoid_array(np.array([z]))[0]), sigmoid(z),
                            rel_tol=1e-12, abs_tol=1e-300)

    def test_known_values(self):
        assert math.isclose(sigmoid(math.log(3.0)), 0.75, rel_tol=1e-12)
        low = sigmoid(-100.0)
        assert math.isfinite(low) and 0.0 < low <= 1e-40

    def test_symmetry(self):
        for z in (0.1, 3.0, 40.0):
            assert math.isclose(sigmoid(z) + sigmoid(-z), 1.0, rel_tol=1e-12)


class Test_as_tensor:
    def test_converts_to_contiguous_float32(self):
        t = as_tensor([[1, 2], [3, 4]], shape=(2, 2))
        assert t.dtype == np.float32 and t.flags['C_CONTIGUOUS']

    def test_shape_mismatch(self):
        with pytest.raises(DimensionError):
            as_tensor(np.zeros((2, 3)), shape=(3, 2))

    def test_empty(self):
        with pytest.raises(DimensionError):
            as_tensor(np.zeros((0, 3)))

    def test_non_finite(self):
        with pytest.raises(NonFiniteError) as e:
            as_tensor([1.0, float('nan'), 2.0])
        assert e.value.offset == 1


class Test_determinism:
    def test_repeat_calls_are_bit_identical(self, rng):
        x = rng.standard_normal((4, 32, 32)).astype(np.float32)
        k = rng.standard_normal((32, 4, 3, 3)).astype(np.float32)
        b = rng.standard_normal(32).astype(np.float32)
        w = rng.standard_normal((128, 1024)).astype(np.float32)
        v = rng.standard_normal(1024).astype(np.float32)
        z = rng.standard_normal(256) * 30
        runs = [(conv2d(x, k, b, stride=2, padding=1).tobytes(),
                 linear(v, w, b[:1].repeat(128)).tobytes(),
                 leaky_relu(x, 0.01).tobytes(),
                 sigmoid_array(z).tobytes())
                for _ in range(3)]
        assert runs[0] == runs[1] == runs[2]
