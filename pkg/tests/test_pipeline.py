import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import lig
from lig import FitConfig, GaussianCloud, Level, LogConfig, LogModel
from lig.pipeline import denormalize_residual

from conftest import natural_image


class TestAllocatePoints:
    def test_reference_allocation_35m(self):
        assert lig.allocate_points(35_000_000, 0.125) == (4_375_000, 30_625_000)

    def test_reference_allocation_45m(self):
        assert lig.allocate_points(45_000_000, 0.125) == (5_625_000, 39_375_000)

    def test_rounding_and_clamp(self):
        assert lig.allocate_points(8, 0.125) == (1, 7)

    def test_small_ratio_clamps_to_one(self):
        assert lig.allocate_points(100, 0.001) == (1, 99)

    def test_rejects_tiny_total(self):
        with pytest.raises(ValueError):
            lig.allocate_points(1, 0.125)

    @given(st.integers(2, 10**9), st.floats(0.001, 0.999))
    @settings(max_examples=200)
    def test_conserves_total(self, total, r):
        n0, n1 = lig.allocate_points(total, r)
        assert n0 + n1 == total
        assert n0 >= 1 and n1 >= 1


class TestDownsample:
    def test_constant_image(self):
        img = np.full((8, 12, 3), 0.4)
        out = lig.downsample(img, 4)
        assert out.shape == (2, 3, 3)
        np.testing.assert_allclose(out, 0.4)

    def test_2x2_block_mean(self):
        img = np.array([0.0, 0.0, 1.0, 1.0]).reshape(2, 2, 1)
        np.testing.assert_allclose(lig.downsample(img, 2), [[[0.5]]])

    def test_5x5_ramp_partial_edge_blocks(self):
        ramp = np.arange(25, dtype=float).reshape(5, 5, 1)
        out = lig.downsample(ramp, 2)
        assert out.shape == (3, 3, 1)
        # hand-computed block means, edge blocks averaging 1 or 2 pixels
        expect = np.array([
            [np.mean([0, 1, 5, 6]), np.mean([2, 3, 7, 8]), np.mean([4, 9])],
            [np.mean([10, 11, 15, 16]), np.mean([12, 13, 17, 18]), np.mean([14, 19])],
            [np.mean([20, 21]), np.mean([22, 23]), np.mean([24])],
        ])[:, :, None]
        np.testing.assert_allclose(out, expect)

    def test_preserves_global_mean_when_divisible(self):
        rng = np.random.default_rng(2)
        img = rng.uniform(0, 1, (16, 24, 3))
        out = lig.downsample(img, 4)
        assert out.mean() == pytest.approx(img.mean(), abs=1e-12)

    def test_rejects_factor_one(self):
        with pytest.raises(ValueError):
            lig.downsample(np.zeros((4, 4, 1)), 1)


class TestUpsample:
    def test_constant_maps_to_constant(self):
        img = np.full((3, 5, 2), 0.7)
        out = lig.upsample(img, 13, 9)
        assert out.shape == (9, 13, 2)
        np.testing.assert_allclose(out, 0.7)

    def test_half_pixel_bilinear_weights(self):
        img = np.array([0.0, 1.0]).reshape(1, 2, 1)
        out = lig.upsample(img, 4, 1)
        np.testing.assert_allclose(out.ravel(), [0.0, 0.25, 0.75, 1.0])

    def test_down_then_up_identity_on_constant(self):
        img = np.full((8, 8, 1), 0.3)
        out = lig.upsample(lig.downsample(img, 2), 8, 8)
        np.testing.assert_allclose(out, 0.3)

    def test_rejects_shrinking(self):
        with pytest.raises(ValueError):
            lig.upsample(np.zeros((4, 4, 1)), 2, 2)


class TestNormalizeResidual:
    def test_spans_unit_interval(self):
        rng = np.random.default_rng(0)
        res = rng.uniform(-0.3, 0.5, (6, 6, 3))
        res.flat[0] = -0.3
        res.flat[-1] = 0.5
        out, lo, hi = lig.normalize_residual(res)
        assert (lo, hi) == (-0.3, 0.5)
        assert out.min() == 0.0 and out.max() == 1.0

    def test_degenerate_all_zero(self):
        out, lo, hi = lig.normalize_residual(np.zeros((4, 4, 1)))
        assert not out.any()
        assert lo == hi == 0.0

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            lig.normalize_residual(np.array([[[np.inf]]]))

    @given(st.integers(0, 10**6))
    @settings(max_examples=50)
    def test_round_trip(self, seed):
        rng = np.random.default_rng(seed)
        res = rng.normal(0, 0.4, (5, 7, 3))
        out, lo, hi = lig.normalize_residual(res)
        if hi > lo:
            np.testing.assert_allclose(denormalize_residual(out, lo, hi), res,
                                       atol=1e-6)


class TestPsnr:
    def test_identical_images_sentinel(self):
        img = np.full((4, 4, 3), 0.2)
        assert lig.psnr(img, img.copy()) == np.inf

    def test_20db_at_mse_001(self):
        a = np.zeros((10, 10, 1))
        b = np.full((10, 10, 1), 0.1)
        assert lig.psnr(a, b) == pytest.approx(20.0)

    def test_40db_at_mse_1e4(self):
        a = np.zeros((10, 10, 1))
        b = np.full((10, 10, 1), 0.01)
        assert lig.psnr(a, b) == pytest.approx(40.0)

    def test_clamps_reconstruction_side(self):
        a = np.full((2, 2, 1), 1.5)  # clamps to 1.0
        b = np.full((2, 2, 1), 0.9)
        assert lig.psnr(a, b) == pytest.approx(10 * np.log10(1 / 0.01))

    def test_mismatch_raises(self):
        with pytest.raises(ValueError):
            lig.psnr(np.zeros((2, 2, 1)), np.zeros((2, 3, 1)))


class TestReconstruct:
    def test_empty_fine_level_reduces_to_upsampled_coarse(self):
        rng = np.random.default_rng(1)
        cloud0 = GaussianCloud(rng.uniform(0, 8, (5, 2)),
                               np.tile([2.0, 0.0, 2.0], (5, 1)),
                               rng.normal(0, 1, (5, 3)))
        model = LogModel(16, 16, 3,
                         [Level(cloud0, 8, 8), Level(GaussianCloud.empty(3), 16, 16)],
                         0.0, 0.0)
        cfg = FitConfig()
        expect = lig.upsample(lig.render(cloud0, 8, 8, cfg), 16, 16)
        np.testing.assert_array_equal(lig.reconstruct(model, cfg), expect)

    def test_all_empty_gives_zero_image(self):
        model = LogModel(8, 8, 3,
                         [Level(GaussianCloud.empty(3), 2, 2),
                          Level(GaussianCloud.empty(3), 8, 8)],
                         0.0, 0.0)
        assert not lig.reconstruct(model).any()

    def test_single_level_is_plain_render(self):
        rng = np.random.default_rng(3)
        cloud = GaussianCloud(rng.uniform(0, 16, (4, 2)),
                              np.tile([2.0, 0.0, 2.0], (4, 1)),
                              rng.normal(0, 1, (4, 3)))
        model = LogModel(16, 16, 3, [Level(cloud, 16, 16)], 0.0, 1.0)
        cfg = FitConfig()
        np.testing.assert_array_equal(lig.reconstruct(model, cfg),
                                      lig.render(cloud, 16, 16, cfg))


class TestFitLog:
    def test_constant_image_degenerate_residual_path(self):
        img = np.full((32, 32, 3), 0.5, dtype=np.float32)
        cfg = LogConfig(total_points=64, fit=FitConfig(iters=2000, seed=1))
        model = lig.fit_log(img, cfg)
        recon = lig.reconstruct(model, cfg.fit)
        assert np.all(np.isfinite(recon))
        np.testing.assert_allclose(recon, 0.5, atol=1e-3)

    def test_defaults(self):
        cfg = LogConfig(total_points=100)
        assert cfg.ratio_r == 0.125
        assert cfg.down_factor == 4
        assert cfg.fit.iters == 30000

    def test_level_resolutions(self):
        img = natural_image(64, seed=5)
        cfg = LogConfig(total_points=32, down_factor=4,
                        fit=FitConfig(iters=5, seed=2))
        model = lig.fit_log(img, cfg)
        assert (model.levels[0].width, model.levels[0].height) == (16, 16)
        assert (model.levels[1].width, model.levels[1].height) == (64, 64)
        assert model.levels[0].cloud.n == 4
        assert model.levels[1].cloud.n == 28
        assert model.res_min <= model.res_max

    def test_reconstruct_is_finite(self):
        img = natural_image(32, seed=9)
        cfg = LogConfig(total_points=32, down_factor=2,
                        fit=FitConfig(iters=20, seed=3))
        model = lig.fit_log(img, cfg)
        assert np.all(np.isfinite(lig.reconstruct(model, cfg.fit)))
