import math

import numpy as np
import pytest

from trlg.metrics import entropy, eq_measure, mse, npcr, psnr, quality_report, security_metrics, ssim, uaci


def test_psnr_constant_offset():
    a = np.full((64, 64), 100, np.uint8)
    assert psnr(a, a + 3) == pytest.approx(38.588, abs=1e-3)
    assert psnr(a, a) == math.inf
    assert mse(a, a + 3) == 9.0


def test_psnr_shape_mismatch():
    with pytest.raises(ValueError):
        psnr(np.zeros((4, 4)), np.zeros((4, 5)))


def test_ssim_bounds(lena_gray):
    x = lena_gray[:128, :128]
    assert ssim(x, x) == 1.0
    assert ssim(x, 255 - x) < 0.3
    noisy = np.clip(x.astype(int) + np.random.default_rng(0).integers(-5, 6, x.shape), 0, 255)
    assert 0.5 < ssim(x, noisy) < 1.0


def test_ssim_matches_reference(lena_gray):
    # value computed with the standard Gaussian SSIM (sigma 1.5, 11x11, valid crop)
    skimage = pytest.importorskip("skimage.metrics")
    x = lena_gray[:128, :128]
    y = np.clip(x.astype(int) + 7 * (np.indices(x.shape).sum(0) % 3 - 1), 0, 255).astype(np.uint8)
    ref = skimage.structural_similarity(x, y, gaussian_weights=True, sigma=1.5,
                                        use_sample_covariance=False, data_range=255)
    assert ssim(x, y) == pytest.approx(ref, abs=5e-3)


def test_color_report(lena):
    b = lena.copy()
    b[..., 0] ^= 1
    q = quality_report(lena, b)
    assert len(q.plane_psnr) == 3 and q.plane_psnr[1] == math.inf
    assert q.ssim_volumetric > 0.99


def test_entropy():
    assert entropy(np.arange(256, dtype=np.uint8)) == pytest.approx(8.0)
    assert entropy(np.zeros(100, np.uint8)) == 0.0


def test_npcr_uaci():
    a = np.zeros(100, np.uint8)
    b = np.full(100, 255, np.uint8)
    assert npcr(a, b) == 1.0 and uaci(a, b) == 1.0
    assert npcr(a, a) == 0.0
    assert eq_measure(a, a) == 0.0


def test_security_metrics():
    rng = np.random.default_rng(3)
    before = rng.integers(0, 256, 4096, dtype=np.uint8)
    after = rng.integers(0, 256, 4096, dtype=np.uint8)
    s = security_metrics(before, after)
    assert s.entropy > 7.9
    assert 0.99 < s.npcr <= 1.0
    assert 0.30 < s.uaci < 0.37
