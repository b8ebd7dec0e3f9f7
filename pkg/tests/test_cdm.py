import numpy as np
import pytest

from texturekit import (
    CdmConfig,
    DfbConfig,
    LpConfig,
    ShapeError,
    cdm_forward,
    dfb_decompose,
    feature_map,
    lp_analyze,
    structural_loss,
)


class TestShapes:
    def test_default_level_grids(self):
        # 32x32 input, factor 2: level 1 at 16x16 with 16 wedges,
        # level 2 at 8x8 with 8 wedges
        x = feature_map(np.random.default_rng(0).standard_normal((3, 32, 32)))
        feat = cdm_forward(x)
        assert len(feat.levels) == 2
        assert feat.levels[0].shape == (16, 3, 16, 16)
        assert feat.levels[1].shape == (8, 3, 8, 8)

    def test_flattened_length(self):
        x = feature_map(np.ones((1, 32, 32)))
        feat = cdm_forward(x)
        assert feat.flattened().size == 16 * 16 * 16 + 8 * 8 * 8

    def test_indivisible_rejected(self):
        cfg = CdmConfig(num_levels=1, dfb_levels=(1,))
        with pytest.raises(ShapeError):
            cdm_forward(feature_map(np.ones((1, 9, 8))), cfg)

    def test_too_small_for_wedges_rejected(self):
        cfg = CdmConfig(num_levels=1, dfb_levels=(4,))
        with pytest.raises(ShapeError):
            cdm_forward(feature_map(np.ones((1, 16, 16))), cfg)

    def test_level_count_must_match(self):
        with pytest.raises(ShapeError):
            CdmConfig(num_levels=2, dfb_levels=(3,))


class TestComposition:
    """The cascade is exactly pyramid -> decimate highpass -> wedge split."""

    def test_single_level_equals_stagewise_oracle(self):
        rng = np.random.default_rng(1)
        x = feature_map(rng.standard_normal((2, 32, 32)))
        cfg = CdmConfig(num_levels=1, dfb_levels=(3,), transition_width=0.1)

        low, high = lp_analyze(x, cfg.lp)
        band = feature_map(high.data[:, ::2, ::2])
        expected = np.stack(
            [b.data for b in dfb_decompose(band, DfbConfig(3, 0.1))]
        )

        feat = cdm_forward(x, cfg)
        np.testing.assert_array_equal(feat.levels[0], expected)

    def test_second_level_runs_on_first_lowpass(self):
        rng = np.random.default_rng(2)
        x = feature_map(rng.standard_normal((1, 32, 32)))
        cfg = CdmConfig(num_levels=2, dfb_levels=(3, 3))

        low, _ = lp_analyze(x, cfg.lp)
        tail = cdm_forward(low, CdmConfig(num_levels=1, dfb_levels=(3,)))

        feat = cdm_forward(x, cfg)
        np.testing.assert_array_equal(feat.levels[1], tail.levels[0])

    def test_constant_input_gives_zero_stacks(self):
        # a flat map has no highpass content at any level
        feat = cdm_forward(feature_map(np.full((1, 32, 32), 2.5)))
        for stack in feat.levels:
            np.testing.assert_allclose(stack, 0.0, atol=1e-6)

    def test_subband_sums_recover_decimated_highpass(self):
        rng = np.random.default_rng(3)
        x = feature_map(rng.standard_normal((1, 32, 32)))
        cfg = CdmConfig(num_levels=1, dfb_levels=(3,))
        low, high = lp_analyze(x, cfg.lp)
        feat = cdm_forward(x, cfg)
        np.testing.assert_allclose(
            feat.levels[0].sum(axis=0), high.data[:, ::2, ::2], atol=1e-5
        )


class TestStructuralLoss:
    def test_self_distance_zero(self):
        x = feature_map(np.random.default_rng(4).standard_normal((1, 32, 32)))
        feat = cdm_forward(x)
        assert structural_loss(feat, feat) == 0.0

    def test_uniform_offset_oracle(self):
        # shifting every coefficient of a level-n stack by delta adds
        # (2^m * C * delta^2) to that level's normalized term
        rng = np.random.default_rng(5)
        x = cdm_forward(feature_map(rng.standard_normal((3, 32, 32))))
        delta = 0.25
        shifted = type(x)(
            levels=tuple(stack + delta for stack in x.levels)
        )
        expected = np.mean([16 * 3 * delta**2, 8 * 3 * delta**2])
        assert structural_loss(x, shifted) == pytest.approx(expected, rel=1e-9)

    def test_symmetry(self):
        rng = np.random.default_rng(6)
        a = cdm_forward(feature_map(rng.standard_normal((1, 32, 32))))
        b = cdm_forward(feature_map(rng.standard_normal((1, 32, 32))))
        assert structural_loss(a, b) == pytest.approx(structural_loss(b, a))

    def test_level_count_mismatch_rejected(self):
        x = feature_map(np.ones((1, 32, 32)))
        two = cdm_forward(x)
        one = cdm_forward(x, CdmConfig(num_levels=1, dfb_levels=(4,)))
        with pytest.raises(ShapeError):
            structural_loss(two, one)

    def test_shape_mismatch_rejected(self):
        a = cdm_forward(feature_map(np.ones((1, 32, 32))))
        b = cdm_forward(feature_map(np.ones((2, 32, 32))))
        with pytest.raises(ShapeError):
            structural_loss(a, b)
