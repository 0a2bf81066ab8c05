"""Image quality (PSNR, SSIM) and watermark-stream security statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

PEAK = 255.0
SSIM_SIGMA = 1.5
SSIM_RADIUS = 5
K1 = 0.01
K2 = 0.03


def _check_same(a, b):
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return a.astype(np.float64), b.astype(np.float64)


def mse(a, b) -> float:
    a, b = _check_same(a, b)
    return float(np.mean((a - b) ** 2))


def psnr_from_mse(m: float) -> float:
    if m == 0:
        return math.inf
    return 10.0 * math.log10(PEAK * PEAK / m)


def psnr(a, b) -> float:
    """PSNR in dB over all samples; ``inf`` for identical inputs."""
    return psnr_from_mse(mse(a, b))


def _ssim_plane(a: np.ndarray, b: np.ndarray) -> float:
    c1 = (K1 * PEAK) ** 2
    c2 = (K2 * PEAK) ** 2
    tr = SSIM_RADIUS / SSIM_SIGMA

    def filt(x):
        return ndimage.gaussian_filter(x, SSIM_SIGMA, truncate=tr, mode="constant")

    mu_a = filt(a)
    mu_b = filt(b)
    saa = filt(a * a) - mu_a * mu_a
    sbb = filt(b * b) - mu_b * mu_b
    sab = filt(a * b) - mu_a * mu_b
    num = (2 * mu_a * mu_b + c1) * (2 * sab + c2)
    den = (mu_a * mu_a + mu_b * mu_b + c1) * (saa + sbb + c2)
    r = SSIM_RADIUS
    s = (num / den)[r:-r, r:-r]
    if s.size == 0:
        raise ValueError("image is smaller than the SSIM window")
    return float(s.mean())


def _ssim_volume(a: np.ndarray, b: np.ndarray) -> float:
    # 3-D Gaussian window over rows, columns and planes, replicated borders,
    # averaged over the whole map (the N-D convention of common toolboxes)
    c1 = (K1 * PEAK) ** 2
    c2 = (K2 * PEAK) ** 2
    tr = SSIM_RADIUS / SSIM_SIGMA

    def filt(x):
        return ndimage.gaussian_filter(x, SSIM_SIGMA, truncate=tr, mode="nearest")

    mu_a, mu_b = filt(a), filt(b)
    saa = filt(a * a) - mu_a * mu_a
    sbb = filt(b * b) - mu_b * mu_b
    sab = filt(a * b) - mu_a * mu_b
    s = ((2 * mu_a * mu_b + c1) * (2 * sab + c2)) / ((mu_a**2 + mu_b**2 + c1) * (saa + sbb + c2))
    return float(s.mean())


def ssim(a, b, volumetric: bool = False) -> float:
    """Mean SSIM (11x11 Gaussian window, valid positions); colour averages planes.

    ``volumetric=True`` treats an RGB image as one 3-D volume instead.
    """
    a, b = _check_same(a, b)
    if np.array_equal(a, b):
        return 1.0
    if volumetric:
        return _ssim_volume(a, b)
    if a.ndim == 2:
        return _ssim_plane(a, b)
    return float(np.mean([_ssim_plane(a[..., c], b[..., c]) for c in range(a.shape[2])]))


@dataclass(frozen=True)
class QualityReport:
    psnr: float
    ssim: float
    plane_psnr: tuple
    plane_ssim: tuple
    ssim_volumetric: float


def quality_report(a, b) -> QualityReport:
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim == 2:
        pp = (psnr(a, b),)
        ps = (ssim(a, b),)
    else:
        pp = tuple(psnr(a[..., c], b[..., c]) for c in range(a.shape[2]))
        ps = tuple(ssim(a[..., c], b[..., c]) for c in range(a.shape[2]))
    return QualityReport(psnr(a, b), ssim(a, b), pp, ps, ssim(a, b, volumetric=True))


def entropy(data) -> float:
    d = np.asarray(data, dtype=np.uint8).ravel()
    if d.size == 0:
        return 0.0
    p = np.bincount(d, minlength=256) / d.size
    p = p[p > 0]
    return float(-(p * np.log2(p)).sum())


def npcr(a, b) -> float:
    a, b = _check_same(a, b)
    return float(np.mean(a != b)) if a.size else 0.0


def uaci(a, b) -> float:
    a, b = _check_same(a, b)
    return float(np.mean(np.abs(a - b)) / PEAK) if a.size else 0.0


def eq_measure(a, b) -> float:
    """Sum of absolute histogram differences divided by 256."""
    ha = np.bincount(np.asarray(a, dtype=np.uint8).ravel(), minlength=256)
    hb = np.bincount(np.asarray(b, dtype=np.uint8).ravel(), minlength=256)
    return float(np.abs(ha - hb).sum() / 256.0)


@dataclass(frozen=True)
class SecurityReport:
    entropy: float
    std: float
    mae: float
    npcr: float
    uaci: float
    eq: float


def security_metrics(before, after, variant_a=None, variant_b=None) -> SecurityReport:
    """Statistics of an encrypted byte stream.

    ``before``/``after`` are the stream before and after an encryption stage
    (MAE and EQ compare them).  NPCR and UACI compare ``variant_a`` with
    ``variant_b``, two encryptions the caller produced with slightly different
    keys; they default to ``before``/``after``.
    """
    before = np.asarray(before, dtype=np.uint8).ravel()
    after = np.asarray(after, dtype=np.uint8).ravel()
    if before.shape != after.shape:
        raise ValueError("byte streams differ in length")
    va = before if variant_a is None else np.asarray(variant_a, dtype=np.uint8).ravel()
    vb = after if variant_b is None else np.asarray(variant_b, dtype=np.uint8).ravel()
    if va.shape != vb.shape:
        raise ValueError("variant streams differ in length")
    diff = np.abs(before.astype(np.int64) - after.astype(np.int64))
    return SecurityReport(
        entropy=entropy(after),
        std=float(after.astype(np.float64).std()),
        mae=float(diff.mean()) if diff.size else 0.0,
        npcr=npcr(va, vb),
        uaci=uaci(va, vb),
        eq=eq_measure(before, after),
    )
