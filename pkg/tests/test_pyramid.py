import numpy as np
import pytest

from texturekit import (
    BURT_ADELSON,
    LpConfig,
    ShapeError,
    feature_map,
    lp_analyze,
    lp_synthesize,
    reflect_pad,
)


def oracle_separable(data: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Nested-loop separable convolution with symmetric boundary handling."""
    half = len(taps) // 2

    def mirror(i: int, n: int) -> int:
        while i < 0 or i >= n:
            i = -1 - i if i < 0 else 2 * n - 1 - i
        return i

    c, h, w = data.shape
    rows = np.zeros_like(data)
    for ci in range(c):
        for i in range(h):
            for j in range(w):
                acc = 0.0
                for t in range(len(taps)):
                    acc += taps[t] * data[ci, mirror(i - (t - half), h), j]
                rows[ci, i, j] = acc
    out = np.zeros_like(data)
    for ci in range(c):
        for i in range(h):
            for j in range(w):
                acc = 0.0
                for t in range(len(taps)):
                    acc += taps[t] * rows[ci, i, mirror(j - (t - half), w)]
                out[ci, i, j] = acc
    return out


class TestAnalysis:
    def test_low_matches_nested_loop_oracle_on_impulse(self):
        taps = np.array([0.25, 0.5, 0.25])
        x = np.zeros((1, 4, 4))
        x[0, 1, 2] = 1.0
        expected = oracle_separable(x, taps)[:, ::2, ::2]
        cfg = LpConfig(analysis_filter=(0.25, 0.5, 0.25), synthesis_filter=(0.25, 0.5, 0.25))
        low, _ = lp_analyze(feature_map(x), cfg)
        np.testing.assert_allclose(low.data, expected, atol=1e-7)

    def test_low_matches_oracle_on_random(self):
        rng = np.random.default_rng(5)
        x = rng.standard_normal((2, 8, 8))
        expected = oracle_separable(x, np.array(BURT_ADELSON))[:, ::2, ::2]
        low, _ = lp_analyze(feature_map(x))
        np.testing.assert_allclose(low.data, expected, atol=1e-6)

    def test_output_dims(self):
        low, high = lp_analyze(feature_map(np.zeros((3, 12, 8))))
        assert low.shape == (3, 6, 4)
        assert high.shape == (3, 12, 8)

    def test_constant_input(self):
        low, high = lp_analyze(feature_map(np.full((2, 16, 16), 0.7)))
        np.testing.assert_allclose(low.data, 0.7, atol=1e-6)
        np.testing.assert_allclose(high.data, 0.0, atol=1e-6)

    def test_indivisible_dims_error_mentions_padding(self):
        with pytest.raises(ShapeError, match="reflect_pad"):
            lp_analyze(feature_map(np.zeros((1, 7, 8))))

    def test_too_small_error(self):
        with pytest.raises(ShapeError):
            lp_analyze(feature_map(np.zeros((1, 2, 2))), LpConfig(factor=4))


class TestSynthesis:
    def test_roundtrip_random(self):
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(20):
            x = feature_map(rng.standard_normal((3, 32, 32)))
            low, high = lp_analyze(x)
            back = lp_synthesize(low, high)
            worst = max(worst, float(np.abs(back.data - x.data).max()))
        assert worst < 1e-6

    def test_roundtrip_factor_4(self):
        rng = np.random.default_rng(7)
        cfg = LpConfig(factor=4)
        x = feature_map(rng.standard_normal((1, 16, 16)))
        low, high = lp_analyze(x, cfg)
        assert low.shape == (1, 4, 4)
        back = lp_synthesize(low, high, cfg)
        assert np.abs(back.data - x.data).max() < 1e-6

    def test_dc_expansion_exact(self):
        # constant low expands to the same constant: residual structure plus
        # equal polyphase sums of the default kernel
        low = feature_map(np.full((1, 4, 4), 1.3))
        high = feature_map(np.zeros((1, 8, 8)))
        back = lp_synthesize(low, high)
        np.testing.assert_allclose(back.data, 1.3, atol=1e-6)

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ShapeError):
            lp_synthesize(feature_map(np.zeros((1, 4, 4))), feature_map(np.zeros((1, 10, 8))))
        with pytest.raises(ShapeError):
            lp_synthesize(feature_map(np.zeros((2, 4, 4))), feature_map(np.zeros((1, 8, 8))))


class TestLinearity:
    def test_analysis_is_linear(self):
        rng = np.random.default_rng(8)
        x = rng.standard_normal((2, 16, 16))
        y = rng.standard_normal((2, 16, 16))
        a, b = 1.7, -0.6
        low_c, high_c = lp_analyze(feature_map(a * x + b * y))
        low_x, high_x = lp_analyze(feature_map(x))
        low_y, high_y = lp_analyze(feature_map(y))
        np.testing.assert_allclose(low_c.data, a * low_x.data + b * low_y.data, atol=1e-5)
        np.testing.assert_allclose(high_c.data, a * high_x.data + b * high_y.data, atol=1e-5)


class TestConfig:
    def test_kernel_must_sum_to_one(self):
        with pytest.raises(ShapeError):
            LpConfig(analysis_filter=(0.5, 0.6, 0.5))

    def test_kernel_must_be_odd(self):
        with pytest.raises(ShapeError):
            LpConfig(analysis_filter=(0.5, 0.5))

    def test_factor_must_be_at_least_two(self):
        with pytest.raises(ShapeError):
            LpConfig(factor=1)

    def test_default_kernel_dc_gain(self):
        assert abs(sum(BURT_ADELSON) - 1.0) < 1e-6


class TestReflectPad:
    def test_pads_to_multiple(self):
        fm = reflect_pad(feature_map(np.arange(6.0).reshape(1, 2, 3)), 4)
        assert fm.shape == (1, 4, 4)
        # bottom/right content mirrors the source
        np.testing.assert_array_equal(fm.data[0, :2, :3], np.arange(6.0).reshape(2, 3))
        assert fm.data[0, 2, 0] == fm.data[0, 1, 0]
        assert fm.data[0, 0, 3] == fm.data[0, 0, 2]

    def test_noop_when_divisible(self):
        x = feature_map(np.ones((1, 4, 4)))
        assert reflect_pad(x, 2).shape == (1, 4, 4)

    def test_pad_feeds_analysis(self):
        x = reflect_pad(feature_map(np.ones((1, 5, 7))), 2)
        low, high = lp_analyze(x)
        assert low.shape == (1, 3, 4)
