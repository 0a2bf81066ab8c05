"""One-level integer Haar lifting (S-transform) and coefficient quantization.

Lifting along a pair ``(e, o)``: ``d = o - e``, ``s = e + floor(d / 2)``; rows
first, then columns.  ``ll`` therefore holds the floored 2x2 mean in [0, 255]
for 8-bit input, ``lh``/``hl`` lie in [-255, 255] and ``hh`` in [-510, 510].
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError


@dataclass(frozen=True)
class WaveletBands:
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray

    @property
    def shape(self):
        return self.ll.shape


def _lift(e, o):
    d = o - e
    return e + (d >> 1), d


def _unlift(s, d):
    e = s - (d >> 1)
    return e, e + d


def forward_haar(p: np.ndarray) -> WaveletBands:
    p = np.asarray(p)
    if p.ndim != 2 or p.shape[0] % 2 or p.shape[1] % 2:
        raise DimensionError(f"forward_haar needs even dimensions, got {p.shape}")
    x = p.astype(np.int64)
    lo, hi = _lift(x[:, 0::2], x[:, 1::2])
    ll, lh = _lift(lo[0::2], lo[1::2])
    hl, hh = _lift(hi[0::2], hi[1::2])
    return WaveletBands(ll, lh, hl, hh)


def inverse_haar(b: WaveletBands) -> np.ndarray:
    shapes = {np.shape(b.ll), np.shape(b.lh), np.shape(b.hl), np.shape(b.hh)}
    if len(shapes) != 1:
        raise DimensionError("wavelet bands differ in shape")
    ll, lh, hl, hh = (np.asarray(a, dtype=np.int64) for a in (b.ll, b.lh, b.hl, b.hh))
    h, w = ll.shape
    lo = np.empty((2 * h, w), dtype=np.int64)
    hi = np.empty((2 * h, w), dtype=np.int64)
    lo[0::2], lo[1::2] = _unlift(ll, lh)
    hi[0::2], hi[1::2] = _unlift(hl, hh)
    out = np.empty((2 * h, 2 * w), dtype=np.int64)
    out[:, 0::2], out[:, 1::2] = _unlift(lo, hi)
    return out


def quantize(c, mu: int = 2):
    """``sign(c) * floor(|c| / mu)`` (truncation toward zero)."""
    c = np.asarray(c, dtype=np.int64)
    q = np.sign(c) * (np.abs(c) // mu)
    return q if q.ndim else int(q)


def dequantize(c, mu: int = 2):
    c = np.asarray(c, dtype=np.int64)
    q = c * mu
    return q if q.ndim else int(q)
