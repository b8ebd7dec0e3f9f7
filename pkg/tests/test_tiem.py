import numpy as np
import pytest

from texturekit import (
    NumericError,
    ShapeError,
    WeightSet,
    build_stat_feature,
    count_levels,
    default_weight_set,
    denoise,
    equalize,
    feature_map,
    quantize,
    self_similarity,
    tiem_forward,
)
from texturekit.tiem import _mlp, _softmax_columns


def cosine_oracle(region):
    """Nested-loop cosine of each pixel vector against the channel mean."""
    c, h, w = region.shape
    g = region.mean(axis=(1, 2))
    out = np.zeros(h * w)
    for i in range(h):
        for j in range(w):
            v = region[:, i, j]
            nv = np.linalg.norm(v)
            ng = np.linalg.norm(g)
            out[i * w + j] = 0.0 if nv == 0 else float(v @ g / (nv * ng))
    return out, g


def dyadic_region(seed=0, shape=(4, 6, 6)):
    """Values k/128: exactly representable, and so are 0.5x/2x/10x."""
    rng = np.random.default_rng(seed)
    return feature_map(rng.integers(-64, 65, size=shape) / 128.0)


class TestSelfSimilarity:
    def test_matches_cosine_oracle(self):
        rng = np.random.default_rng(1)
        region = rng.standard_normal((3, 5, 7))
        sim, g = self_similarity(feature_map(region))
        want_sim, want_g = cosine_oracle(region.astype(np.float32).astype(np.float64))
        np.testing.assert_allclose(sim, want_sim, atol=1e-12)
        np.testing.assert_allclose(g, want_g, atol=1e-12)

    def test_range(self):
        rng = np.random.default_rng(2)
        sim, _ = self_similarity(feature_map(rng.standard_normal((4, 8, 8))))
        assert sim.min() >= -1.0 - 1e-12
        assert sim.max() <= 1.0 + 1e-12

    def test_pixel_equal_to_mean_scores_one(self):
        region = np.ones((2, 3, 3))
        region[:, 1, 1] = [3.0, 3.0]  # parallel to the mean vector
        sim, _ = self_similarity(feature_map(region))
        assert sim[4] == pytest.approx(1.0, abs=1e-12)

    def test_zero_pixel_gets_zero(self):
        region = np.ones((2, 2, 2))
        region[:, 0, 0] = 0.0
        sim, _ = self_similarity(feature_map(region))
        assert sim[0] == 0.0

    def test_g_is_unnormalized_mean(self):
        region = np.full((2, 2, 2), 8.0)
        region[1] = 2.0
        _, g = self_similarity(feature_map(region))
        np.testing.assert_array_equal(g, [8.0, 2.0])

    def test_zero_region_rejected(self):
        with pytest.raises(NumericError):
            self_similarity(feature_map(np.zeros((2, 3, 3))))

    def test_zero_mean_rejected(self):
        # pixels cancel: mean vector is exactly zero
        region = np.zeros((1, 2, 2))
        region[0, 0, 0] = 1.0
        region[0, 1, 1] = -1.0
        with pytest.raises(NumericError):
            self_similarity(feature_map(region))


class TestQuantize:
    def test_levels_are_ascending_fractions(self):
        levels, _ = quantize(np.array([0.0, 0.3, 1.0]), num_levels=4)
        np.testing.assert_array_equal(levels, [0.25, 0.5, 0.75, 1.0])

    def test_exactly_one_nonzero_per_pixel(self):
        rng = np.random.default_rng(3)
        _, enc = quantize(rng.random(500), num_levels=128)
        assert np.array_equal((enc != 0).sum(axis=0), np.ones(500, dtype=int))

    def test_argmax_matches_linear_scan_oracle(self):
        rng = np.random.default_rng(4)
        s = rng.random(400)
        levels, enc = quantize(s, num_levels=128)
        got = enc.argmax(axis=0)
        # oracle: rescale, then pick the unique window (L-0.5/N, L+0.5/N]
        n = 128
        scaled = 1.0 / n + (1.0 - 1.0 / n) * (s - s.min()) / (s.max() - s.min())
        for i, v in enumerate(scaled):
            hits = [
                k for k, ln in enumerate(levels)
                if ln - 0.5 / n < v <= ln + 0.5 / n
            ]
            assert hits == [got[i]]

    def test_extremes_land_on_first_and_last_level(self):
        levels, enc = quantize(np.array([0.2, 0.5, 0.9]), num_levels=8)
        assert enc[:, 0].argmax() == 0
        assert enc[:, 2].argmax() == 7
        # exact hits score a full weight of 1
        assert enc[0, 0] == pytest.approx(1.0, abs=1e-15)
        assert enc[7, 2] == pytest.approx(1.0, abs=1e-15)

    def test_weight_band(self):
        rng = np.random.default_rng(5)
        _, enc = quantize(rng.random(300), num_levels=16)
        w = enc[enc != 0]
        assert w.min() >= 1.0 - 0.5 / 16 - 1e-12
        assert w.max() <= 1.0 + 1e-12

    def test_constant_similarity_rejected(self):
        with pytest.raises(NumericError):
            quantize(np.full(10, 0.5))

    def test_empty_rejected(self):
        with pytest.raises(ShapeError):
            quantize(np.array([]))

    def test_too_few_levels_rejected(self):
        with pytest.raises(ShapeError):
            quantize(np.array([0.0, 1.0]), num_levels=1)


class TestCounting:
    def test_accumulates_window_weights(self):
        # two pixels share a window: its count is the sum of both weights
        s = np.array([0.0, 0.02, 1.0])
        levels, enc = quantize(s, num_levels=4)
        counts = count_levels(enc)
        manual = enc.sum(axis=1) / enc.sum()
        np.testing.assert_allclose(counts, manual, atol=1e-15)
        assert counts.sum() == pytest.approx(1.0, abs=1e-12)

    def test_normalization_against_oracle(self):
        rng = np.random.default_rng(6)
        _, enc = quantize(rng.random(200), num_levels=32)
        counts = count_levels(enc)
        oracle = np.zeros(32)
        for i in range(200):
            k = enc[:, i].argmax()
            oracle[k] += enc[k, i]
        oracle /= oracle.sum()
        np.testing.assert_allclose(counts, oracle, atol=1e-9)

    def test_all_zero_rejected(self):
        with pytest.raises(NumericError):
            count_levels(np.zeros((4, 5)))


class TestDenoise:
    def test_hand_case(self):
        got = denoise(np.array([0.7, 0.1, 0.1, 0.1]), threshold=0.5)
        np.testing.assert_allclose(got, [0.4375, 0.1875, 0.1875, 0.1875], atol=1e-15)

    def test_mass_conserved(self):
        rng = np.random.default_rng(7)
        for theta in (0.5, 0.9, 1.0):
            c = rng.random(64)
            c /= c.sum()
            assert denoise(c, theta).sum() == pytest.approx(1.0, abs=1e-12)

    def test_cap_plus_redistribution_bound(self):
        rng = np.random.default_rng(8)
        c = rng.random(32)
        c /= c.sum()
        for theta in (0.5, 0.9):
            out = denoise(c, theta)
            cap = theta * c.max()
            excess = np.sum(np.maximum(c - cap, 0.0))
            assert out.max() <= cap + excess / c.size + 1e-12

    def test_threshold_one_is_identity(self):
        c = np.array([0.5, 0.25, 0.25])
        np.testing.assert_array_equal(denoise(c, 1.0), c)

    def test_uniform_is_fixed_point(self):
        c = np.full(16, 1 / 16)
        for theta in (0.3, 0.5, 0.9, 1.0):
            np.testing.assert_allclose(denoise(c, theta), c, atol=1e-15)

    def test_bad_threshold_rejected(self):
        with pytest.raises(NumericError):
            denoise(np.array([1.0]), 0.0)
        with pytest.raises(NumericError):
            denoise(np.array([1.0]), 1.5)

    def test_negative_counts_rejected(self):
        with pytest.raises(NumericError):
            denoise(np.array([0.5, -0.1]), 0.9)


class TestStatFeature:
    def test_shape_and_mean_tail(self):
        c = 4
        ws = default_weight_set(channels=c)
        levels = np.arange(1, 9) / 8
        counts = np.full(8, 1 / 8)
        g = np.arange(c, dtype=np.float64)
        d = build_stat_feature(levels, counts, g, ws)
        assert d.shape == (8, 16 + c)
        np.testing.assert_array_equal(d[:, 16:], np.broadcast_to(g, (8, c)))

    def test_zero_weights_give_bias_rows(self):
        entries = {
            "tiem.mlp.w1": feature_map(np.zeros((1, 16, 2))),
            "tiem.mlp.b1": feature_map(np.zeros((1, 1, 16))),
            "tiem.mlp.w2": feature_map(np.zeros((1, 16, 16))),
            "tiem.mlp.b2": feature_map(np.full((1, 1, 16), 2.0)),
        }
        ws = WeightSet(entries=entries)
        d = build_stat_feature(np.array([0.5, 1.0]), np.array([0.4, 0.6]), np.array([7.0]), ws)
        np.testing.assert_array_equal(d[:, :16], np.full((2, 16), 2.0))
        np.testing.assert_array_equal(d[:, 16], [7.0, 7.0])

    def test_mlp_matches_manual_forward(self):
        ws = default_weight_set(channels=3)
        x = np.array([[0.25, 0.5], [1.0, 0.125]])
        got = _mlp(x, ws, "tiem.mlp")
        w1 = ws.matrix("tiem.mlp.w1").astype(np.float64)
        b1 = ws.vector("tiem.mlp.b1").astype(np.float64)
        w2 = ws.matrix("tiem.mlp.w2").astype(np.float64)
        b2 = ws.vector("tiem.mlp.b2").astype(np.float64)
        h = x @ w1.T + b1
        h = np.where(h >= 0, h, 0.01 * h)
        np.testing.assert_allclose(got, h @ w2.T + b2, atol=1e-12)

    def test_length_mismatch_rejected(self):
        ws = default_weight_set(channels=2)
        with pytest.raises(ShapeError):
            build_stat_feature(np.array([0.5, 1.0]), np.array([1.0]), np.zeros(2), ws)


class TestEqualize:
    def test_graph_columns_sum_to_one(self):
        region = dyadic_region(seed=9)
        ws = default_weight_set(channels=4)
        _, _, feat = tiem_forward(region, ws, num_levels=16)
        np.testing.assert_allclose(feat.graph.sum(axis=0), 1.0, atol=1e-12)

    def test_zero_stat_gives_uniform_graph(self):
        ws = default_weight_set(channels=1)
        stat = np.zeros((4, 17))
        enc = np.zeros((4, 6))
        enc[0] = 1.0
        graph, levels2, reproj = equalize(stat, enc, ws, (2, 3))
        np.testing.assert_allclose(graph, 0.25, atol=1e-15)
        np.testing.assert_allclose(levels2, 0.0, atol=1e-15)

    def test_softmax_columns_oracle(self):
        rng = np.random.default_rng(10)
        m = rng.standard_normal((5, 5)) * 3
        got = _softmax_columns(m)
        want = np.exp(m) / np.exp(m).sum(axis=0, keepdims=True)
        np.testing.assert_allclose(got, want, atol=1e-12)

    def test_reprojection_is_levels_through_encoding(self):
        # one-hot encoding: pixel i carries column argmax's L' row scaled
        # by the stored weight
        region = dyadic_region(seed=11, shape=(2, 3, 4))
        ws = default_weight_set(channels=2)
        q, _, feat = tiem_forward(region, ws, num_levels=8)
        r = feat.reprojection.data
        assert r.shape == (64, 3, 4)
        for i in range(12):
            k = q.encoding[:, i].argmax()
            want = feat.levels2[k] * q.encoding[k, i]
            np.testing.assert_allclose(
                r[:, i // 4, i % 4], want.astype(np.float32), atol=1e-5
            )

    def test_encoding_pixel_count_must_match_grid(self):
        ws = default_weight_set(channels=1)
        stat = np.zeros((4, 17))
        enc = np.zeros((4, 5))
        with pytest.raises(ShapeError):
            equalize(stat, enc, ws, (2, 3))


class TestForward:
    def test_state_shapes(self):
        region = dyadic_region(seed=12, shape=(3, 5, 4))
        ws = default_weight_set(channels=3)
        q, cm, feat = tiem_forward(region, ws, num_levels=32)
        assert q.levels.shape == (32,)
        assert q.encoding.shape == (32, 20)
        assert q.similarity.shape == (20,)
        assert q.global_avg.shape == (3,)
        assert cm.counts.shape == (32,)
        assert cm.denoised.shape == (32,)
        assert cm.threshold == 0.9
        assert feat.stat.shape == (32, 16 + 3)
        assert feat.graph.shape == (32, 32)
        assert feat.levels2.shape == (32, 64)
        assert feat.reprojection.shape == (64, 5, 4)

    @pytest.mark.parametrize("c", [0.5, 2.0, 10.0])
    def test_positive_rescale_leaves_statistics_bit_identical(self, c):
        region = dyadic_region(seed=13)
        ws = default_weight_set(channels=4)
        q1, cm1, _ = tiem_forward(region, ws, num_levels=128)
        q2, cm2, _ = tiem_forward(feature_map(region.data * c), ws, num_levels=128)
        assert np.array_equal(q1.similarity, q2.similarity)
        assert np.array_equal(q1.encoding, q2.encoding)
        assert np.array_equal(cm1.counts, cm2.counts)
        assert np.array_equal(cm1.denoised, cm2.denoised)
        # the mean vector itself scales with the input
        np.testing.assert_allclose(q2.global_avg, c * q1.global_avg, rtol=1e-6)

    def test_two_tone_region(self):
        # two distinct pixel vectors -> two distinct similarities -> mass
        # splits across exactly two quantization windows before denoising
        region = np.zeros((2, 2, 2))
        region[:, 0, 0] = region[:, 0, 1] = [1.0, 0.0]
        region[:, 1, 0] = region[:, 1, 1] = [1.0, 1.0]
        q, cm, _ = tiem_forward(feature_map(region), default_weight_set(channels=2), num_levels=128)
        occupied = np.flatnonzero(cm.counts)
        assert occupied.size == 2
        assert occupied[0] == 0 and occupied[-1] == 127
        np.testing.assert_allclose(cm.counts[occupied], 0.5, atol=1e-12)
