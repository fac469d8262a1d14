import math

import numpy as np
import pytest
import torch
from hypothesis import given, settings
from hypothesis import strategies as st

from csidiff.data import SceneState, render_scene
from csidiff.metrics import (
    FrozenFeatures,
    MetricReport,
    crop_box,
    crop_pairs,
    evaluate_pairs,
    fid_from_moments,
    frechet_distance,
    moments,
    rmse,
    ssim,
)

C1 = (0.01 * 255.0) ** 2


def scene_image(px=0.5, py=0.5, theta=1.0, size=64):
    image, _, _ = render_scene(SceneState(px, py, theta), size, 20.0, 9.0)
    return image.astype(np.float32)


def blur(image: np.ndarray, factor: int) -> np.ndarray:
    t = torch.from_numpy(image).permute(2, 0, 1)[None]
    small = torch.nn.functional.interpolate(t, scale_factor=1 / factor, mode="bilinear", align_corners=False)
    back = torch.nn.functional.interpolate(small, size=t.shape[-2:], mode="bilinear", align_corners=False)
    return back[0].permute(1, 2, 0).numpy()


# ---------------------------------------------------------------------------
# RMSE
# ---------------------------------------------------------------------------

class TestRmse:
    def test_identical_zero(self):
        img = scene_image()
        assert rmse(img, img) == 0.0

    def test_black_vs_white(self):
        a = np.zeros((16, 16, 3), dtype=np.float32)
        b = np.ones((16, 16, 3), dtype=np.float32)
        assert rmse(a, b) == pytest.approx(255.0)

    def test_constant_offset(self):
        a = np.zeros((16, 16, 3), dtype=np.float32)
        b = np.full((16, 16, 3), 0.5, dtype=np.float32)
        assert rmse(a, b) == pytest.approx(127.5)

    def test_symmetry(self):
        a, b = scene_image(0.3, 0.3), scene_image(0.7, 0.7)
        assert rmse(a, b) == pytest.approx(rmse(b, a))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError, match="mismatch"):
            rmse(np.zeros((8, 8, 3)), np.zeros((8, 9, 3)))


# ---------------------------------------------------------------------------
# SSIM
# ---------------------------------------------------------------------------

class TestSsim:
    def test_self_similarity_is_one(self):
        img = scene_image()
        assert ssim(img, img) == pytest.approx(1.0, abs=1e-9)

    def test_constant_images_closed_form(self):
        # zero variance everywhere: second factor is exactly 1, first reduces
        # to (2uv + C1) / (u^2 + v^2 + C1) on the 0..255 scale
        a = np.zeros((32, 32, 3), dtype=np.float32)
        b = np.ones((32, 32, 3), dtype=np.float32)
        want = C1 / (255.0**2 + C1)
        assert ssim(a, b) == pytest.approx(want, rel=1e-9)

    def test_constant_images_general_closed_form(self):
        a = np.full((32, 32, 3), 0.25, dtype=np.float32)
        b = np.full((32, 32, 3), 0.75, dtype=np.float32)
        u, v = 0.25 * 255, 0.75 * 255
        want = (2 * u * v + C1) / (u * u + v * v + C1)
        assert ssim(a, b) == pytest.approx(want, rel=1e-9)

    def test_symmetry(self):
        a, b = scene_image(0.3, 0.4), scene_image(0.6, 0.5)
        assert ssim(a, b) == pytest.approx(ssim(b, a), rel=1e-12)

    def test_bounded_above_by_one(self):
        rng = np.random.default_rng(0)
        for _ in range(5):
            a = rng.uniform(0, 1, (24, 24, 3)).astype(np.float32)
            b = rng.uniform(0, 1, (24, 24, 3)).astype(np.float32)
            assert ssim(a, b) <= 1.0

    def test_blur_ordering(self):
        img = scene_image()
        light, heavy = blur(img, 2), blur(img, 8)
        assert ssim(img, light) > ssim(img, heavy)
        assert rmse(img, light) < rmse(img, heavy)

    def test_minimum_size(self):
        with pytest.raises(ValueError, match="11"):
            ssim(np.zeros((8, 8, 3)), np.zeros((8, 8, 3)))


# ---------------------------------------------------------------------------
# Frechet distance
# ---------------------------------------------------------------------------

def newton_schulz_sqrt(matrix: np.ndarray, iterations: int = 40) -> np.ndarray:
    """Independent square-root route for cross-checking the eigh path."""
    norm = np.linalg.norm(matrix)
    y = matrix / norm
    z = np.eye(matrix.shape[0])
    for _ in range(iterations):
        t = 0.5 * (3.0 * np.eye(matrix.shape[0]) - z @ y)
        y = y @ t
        z = t @ z
    return y * math.sqrt(norm)


def fid_via_newton_schulz(mu_a, cov_a, mu_b, cov_b) -> float:
    diff = np.asarray(mu_a, dtype=np.float64) - np.asarray(mu_b, dtype=np.float64)
    root_a = newton_schulz_sqrt(np.asarray(cov_a, dtype=np.float64))
    cross = newton_schulz_sqrt(root_a @ cov_b @ root_a)
    return float(diff @ diff + np.trace(cov_a) + np.trace(cov_b) - 2.0 * np.trace(cross))


def random_psd(k, seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(k, k + 2))
    return a @ a.T / (k + 2)


class TestFid:
    def test_univariate_exact(self):
        # means 0 and 1, variances 1 and 4: 1 + (1 + 4 - 2 * 2) = 2
        assert fid_from_moments([0.0], [[1.0]], [1.0], [[4.0]]) == pytest.approx(2.0, abs=1e-12)

    def test_identical_moments_zero(self):
        cov = random_psd(6, 0)
        mu = np.arange(6.0)
        assert fid_from_moments(mu, cov, mu, cov) == pytest.approx(0.0, abs=1e-9)

    def test_mean_only_shift(self):
        cov = np.eye(3)
        got = fid_from_moments([0, 0, 0], cov, [1.0, 2.0, 2.0], cov)
        assert got == pytest.approx(9.0, rel=1e-12)

    @pytest.mark.parametrize("seed", [1, 2, 3])
    def test_against_newton_schulz_route(self, seed):
        k = 8
        mu_a = np.random.default_rng(seed).normal(size=k)
        mu_b = np.random.default_rng(seed + 10).normal(size=k)
        cov_a = random_psd(k, seed + 20)
        cov_b = random_psd(k, seed + 30)
        got = fid_from_moments(mu_a, cov_a, mu_b, cov_b)
        want = fid_via_newton_schulz(mu_a, cov_a, mu_b, cov_b)
        assert got == pytest.approx(want, rel=1e-6, abs=1e-8)

    def test_symmetry(self):
        mu_a, cov_a = np.zeros(5), random_psd(5, 4)
        mu_b, cov_b = np.ones(5), random_psd(5, 5)
        a = fid_from_moments(mu_a, cov_a, mu_b, cov_b)
        b = fid_from_moments(mu_b, cov_b, mu_a, cov_a)
        assert a == pytest.approx(b, rel=1e-9)

    def test_orthogonal_invariance(self):
        rng = np.random.default_rng(6)
        q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
        mu_a, cov_a = rng.normal(size=5), random_psd(5, 7)
        mu_b, cov_b = rng.normal(size=5), random_psd(5, 8)
        base = fid_from_moments(mu_a, cov_a, mu_b, cov_b)
        rotated = fid_from_moments(q @ mu_a, q @ cov_a @ q.T, q @ mu_b, q @ cov_b @ q.T)
        assert rotated == pytest.approx(base, rel=1e-8)

    def test_sample_route_matches_analytic(self):
        rng = np.random.default_rng(9)
        a = rng.normal(0.0, 1.0, size=(4000, 4))
        b = rng.normal(0.0, 1.0, size=(4000, 4))
        b[:, 0] += 1.0
        got = frechet_distance(a, b)
        assert got == pytest.approx(1.0, abs=0.15)

    def test_self_distance_zero(self):
        feats = np.random.default_rng(10).normal(size=(100, 8))
        assert frechet_distance(feats, feats) == pytest.approx(0.0, abs=1e-9)

    def test_ridge_when_samples_scarce(self):
        rng = np.random.default_rng(11)
        a = rng.normal(size=(5, 64))
        b = rng.normal(size=(5, 64))
        value = frechet_distance(a, b)
        assert math.isfinite(value) and value >= 0.0

    def test_rejects_indefinite_covariance(self):
        bad = np.diag([1.0, -0.5])
        with pytest.raises(ValueError, match="positive semi-definite"):
            fid_from_moments([0, 0], bad, [0, 0], np.eye(2))

    def test_moments_unbiased(self):
        x = np.array([[0.0], [2.0]])
        mu, cov = moments(x)
        assert mu[0] == 1.0
        assert cov[0, 0] == pytest.approx(2.0)  # unbiased: ((0-1)^2+(2-1)^2)/(2-1)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(0, 10_000))
    def test_nonnegative_property(self, seed):
        rng = np.random.default_rng(seed)
        k = int(rng.integers(1, 6))
        got = fid_from_moments(
            rng.normal(size=k), random_psd(k, seed), rng.normal(size=k), random_psd(k, seed + 1)
        )
        assert got >= 0.0


# ---------------------------------------------------------------------------
# frozen features
# ---------------------------------------------------------------------------

class TestFeatures:
    def test_shape_and_determinism(self):
        images = np.stack([scene_image(0.3, 0.3), scene_image(0.7, 0.6)])
        f = FrozenFeatures()
        a = f.extract(images)
        assert a.shape == (2, 64) and a.dtype == np.float32
        assert np.array_equal(a, f.extract(images))

    def test_fresh_instances_agree(self):
        images = scene_image()[None]
        a = FrozenFeatures()
        b = FrozenFeatures()
        assert np.array_equal(a.extract(images), b.extract(images))
        assert a.identity_hash() == b.identity_hash()

    def test_sensitive_to_blur(self):
        img = scene_image()
        f = FrozenFeatures()
        sharp = f.extract(img[None])
        soft = f.extract(blur(img, 8)[None])
        assert np.linalg.norm(sharp - soft) > 0.0

    def test_batching_invariant(self):
        rng = np.random.default_rng(1)
        images = rng.uniform(0, 1, (7, 32, 32, 3)).astype(np.float32)
        f = FrozenFeatures()
        np.testing.assert_array_equal(f.extract(images, batch_size=3), f.extract(images, batch_size=7))

    def test_blur_dominates_sampling_noise(self):
        # degraded distributions must score far above same-distribution FID,
        # otherwise route comparisons drown in estimator noise
        rng = np.random.default_rng(5)
        images = np.stack(
            [scene_image(px, py, theta) for px, py, theta in rng.uniform(0.2, 0.8, (160, 3))]
        )
        blurred = np.stack([blur(img, 8) for img in images])
        f = FrozenFeatures()
        feats = f.extract(images)
        fid_blur = frechet_distance(feats, f.extract(blurred))
        fid_halves = frechet_distance(feats[:80], feats[80:])
        assert fid_blur > 10 * fid_halves


# ---------------------------------------------------------------------------
# crops
# ---------------------------------------------------------------------------

class TestCrops:
    def test_full_image_box_is_identity(self):
        img = scene_image()
        out = crop_box(img, (0, 0, 64, 64), out_size=64)
        np.testing.assert_array_equal(out, img)

    def test_crop_resized(self):
        img = scene_image()
        out = crop_box(img, (10, 20, 20, 12), out_size=64)
        assert out.shape == (64, 64, 3)

    def test_out_of_bounds_box(self):
        with pytest.raises(ValueError, match="box"):
            crop_box(scene_image(), (60, 60, 10, 10))

    def test_skip_counting(self):
        refs = np.stack([scene_image(0.3, 0.3), scene_image(0.5, 0.5), scene_image(0.7, 0.7)])
        gens = refs.copy()
        boxes = [(0, 0, 32, 32), None, (8, 8, 40, 40)]
        ref_c, gen_c, skipped = crop_pairs(refs, gens, boxes)
        assert len(ref_c) == 2 and skipped == 1

    def test_all_skipped_errors(self):
        refs = scene_image()[None]
        with pytest.raises(ValueError, match="skipped"):
            crop_pairs(refs, refs, [None])

    def test_evaluate_pairs_perfect_match(self):
        refs = np.stack([scene_image(0.3, 0.3), scene_image(0.6, 0.6)])
        report = evaluate_pairs(refs, refs.copy(), FrozenFeatures())
        assert report.rmse == 0.0
        assert report.ssim == pytest.approx(1.0, abs=1e-9)
        assert report.fid == pytest.approx(0.0, abs=1e-6)
        assert report.n == 2

    def test_csv_round(self):
        report = MetricReport(rmse=12.5, ssim=0.75, fid=30.0, n=10, skipped=2)
        row = report.csv_row()
        assert row.split(",")[0] == "10"
        assert MetricReport.csv_header().count(",") == row.count(",")
