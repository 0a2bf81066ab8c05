import numpy as np

from trlg.halftone import floyd_halftone, inverse_halftone, inverse_halftone_masked
from trlg.imagecore import luminance, resize
from trlg.metrics import psnr


def test_constant_extremes():
    assert not floyd_halftone(np.zeros((16, 16), np.uint8)).any()
    assert floyd_halftone(np.full((16, 16), 255, np.uint8)).all()


def test_mid_gray_density():
    bits = floyd_halftone(np.full((64, 64), 128, np.uint8))
    assert set(np.unique(bits).tolist()) <= {0, 1}
    assert 0.48 <= bits.mean() <= 0.53


def test_density_tracks_level():
    for level in (32, 96, 200):
        bits = floyd_halftone(np.full((64, 64), level, np.uint8))
        assert abs(bits.mean() - level / 255) < 0.03


def test_first_pixel_threshold():
    assert floyd_halftone(np.array([[127, 0]], np.uint8))[0, 0] == 0
    assert floyd_halftone(np.array([[128, 0]], np.uint8))[0, 0] == 1


def test_inverse_quality(lena):
    half = resize(luminance(lena), 0.5)
    rec = inverse_halftone(floyd_halftone(half))
    assert rec.dtype == np.uint8 and rec.shape == half.shape
    assert psnr(half, rec) >= 24.0


def test_masked_inverse():
    bits = floyd_halftone(np.full((32, 32), 100, np.uint8))
    valid = np.ones_like(bits, dtype=bool)
    full = inverse_halftone_masked(bits, valid)
    # corners see a quarter of the kernel, below the support floor
    assert np.isnan(full[0, 0])
    assert np.all(np.isfinite(full[1:-1, 1:-1]))
    valid[:, 16:] = False
    part = inverse_halftone_masked(bits, valid)
    assert np.isnan(part[:, 20:]).all()
    assert np.isfinite(part[1:-1, 1:14]).all()
    # normalised estimate stays near the true level where support exists
    assert abs(np.nanmean(part[4:-4, 4:14]) - 100) < 10
