"""Floyd-Steinberg halftoning and a Gaussian inverse halftone."""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .imagecore import to_uint8

THRESHOLD = 128
INVERSE_SIGMA = 1.5
INVERSE_SIZE = 7


def floyd_halftone(p: np.ndarray) -> np.ndarray:
    """Raster-scan error diffusion; returns a uint8 array of 0/1 bits.

    Taps that fall outside the plane are dropped without renormalising.
    """
    p = np.asarray(p)
    h, w = p.shape
    buf = [row.astype(float).tolist() for row in p]
    bits = np.zeros((h, w), dtype=np.uint8)
    for i in range(h):
        cur = buf[i]
        nxt = buf[i + 1] if i + 1 < h else None
        out = [0] * w
        for j in range(w):
            old = cur[j]
            if old >= THRESHOLD:
                out[j] = 1
                err = old - 255.0
            else:
                err = old
            if err == 0.0:
                continue
            if j + 1 < w:
                cur[j + 1] += err * 7 / 16
            if nxt is not None:
                if j > 0:
                    nxt[j - 1] += err * 3 / 16
                nxt[j] += err * 5 / 16
                if j + 1 < w:
                    nxt[j + 1] += err * 1 / 16
        bits[i] = out
    return bits


def _gaussian_kernel() -> np.ndarray:
    r = INVERSE_SIZE // 2
    x = np.arange(-r, r + 1, dtype=np.float64)
    g = np.exp(-(x * x) / (2 * INVERSE_SIGMA**2))
    k = np.outer(g, g)
    return k / k.sum()


def inverse_halftone(bits: np.ndarray) -> np.ndarray:
    """Continuous-tone estimate of a binary plane, as a uint8 plane."""
    scaled = np.asarray(bits, dtype=np.float64) * 255.0
    out = ndimage.correlate(scaled, _gaussian_kernel(), mode="nearest")
    return to_uint8(out)


MIN_SUPPORT = 0.5


def inverse_halftone_masked(bits: np.ndarray, valid: np.ndarray, min_support: float = MIN_SUPPORT) -> np.ndarray:
    """Inverse halftone using only the ``valid`` bits (normalised convolution).

    Returns float64; pixels whose valid kernel weight is at most
    ``min_support`` (the full kernel weighs 1) are NaN.
    """
    k = _gaussian_kernel()
    m = np.asarray(valid, dtype=np.float64)
    scaled = np.asarray(bits, dtype=np.float64) * 255.0
    num = ndimage.correlate(scaled * m, k, mode="constant")
    den = ndimage.correlate(m, k, mode="constant")
    out = np.full(m.shape, np.nan)
    ok = den > min_support
    out[ok] = np.clip(num[ok] / den[ok], 0.0, 255.0)
    return out
