import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis.extra.numpy import arrays

from trlg.errors import DimensionError
from trlg.lwt import WaveletBands, dequantize, forward_haar, inverse_haar, quantize


def test_constant_block():
    b = forward_haar(np.full((2, 2), 10, np.uint8))
    assert (int(b.ll[0, 0]), int(b.lh[0, 0]), int(b.hl[0, 0]), int(b.hh[0, 0])) == (10, 0, 0, 0)


def test_constant_plane_has_no_details():
    b = forward_haar(np.full((8, 8), 200, np.uint8))
    assert np.all(b.ll == 200)
    assert not b.lh.any() and not b.hl.any() and not b.hh.any()


def test_ll_is_floored_mean():
    rng = np.random.default_rng(0)
    p = rng.integers(0, 256, (16, 16))
    b = forward_haar(p)
    # nested floored pair means
    lo = (p[:, 0::2] + p[:, 1::2]) // 2
    assert np.array_equal(b.ll, (lo[0::2] + lo[1::2]) // 2)


@settings(max_examples=50, deadline=None)
@given(arrays(np.uint8, (6, 8)))
def test_perfect_reconstruction(p):
    b = forward_haar(p)
    assert np.array_equal(inverse_haar(b), p)
    assert b.ll.min() >= 0 and b.ll.max() <= 255
    assert np.abs(b.lh).max() <= 255 and np.abs(b.hh).max() <= 510


def test_odd_dimensions_rejected():
    with pytest.raises(DimensionError):
        forward_haar(np.zeros((3, 4)))
    z = np.zeros((2, 2), dtype=np.int64)
    with pytest.raises(DimensionError):
        inverse_haar(WaveletBands(z, z, z, np.zeros((1, 2), dtype=np.int64)))


def test_quantize_values():
    assert quantize(7) == 3
    assert quantize(-7) == -3
    assert quantize(0) == 0
    assert dequantize(3) == 6
    assert dequantize(-3) == -6
    assert quantize(np.array([5, -5, 1])).tolist() == [2, -2, 0]
