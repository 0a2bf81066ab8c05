"""Image arrays, colour conversion, bicubic resizing and lossless file I/O.

Images are plain numpy ``uint8`` arrays: ``(H, W)`` for grayscale, ``(H, W, 3)``
for RGB.  Planes are always handled as 2-D arrays.
"""

from __future__ import annotations

from pathlib import Path
from typing import NamedTuple

import numpy as np
from PIL import Image

from .errors import DimensionError, ImageFormatError

BICUBIC_A = -0.5


class YuvImage(NamedTuple):
    y: np.ndarray
    u: np.ndarray
    v: np.ndarray


def planes(img: np.ndarray) -> list[np.ndarray]:
    if img.ndim == 2:
        return [img]
    return [img[..., c] for c in range(img.shape[2])]


def stack_planes(ps) -> np.ndarray:
    ps = list(ps)
    if len(ps) == 1:
        return ps[0]
    return np.stack(ps, axis=-1)


def to_uint8(a) -> np.ndarray:
    """Round half up and clamp to [0, 255]."""
    return np.clip(np.floor(np.asarray(a, dtype=np.float64) + 0.5), 0, 255).astype(np.uint8)


def rgb_to_yuv(img: np.ndarray) -> YuvImage:
    if img.ndim != 3 or img.shape[2] != 3:
        raise ValueError("rgb_to_yuv needs an (H, W, 3) image")
    r, g, b = (img[..., c].astype(np.float64) for c in range(3))
    y = 0.299 * r + 0.587 * g + 0.114 * b
    u = -0.168736 * r - 0.331264 * g + 0.5 * b + 128.0
    v = 0.5 * r - 0.418688 * g - 0.081312 * b + 128.0
    return YuvImage(to_uint8(y), to_uint8(u), to_uint8(v))


def yuv_to_rgb(yuv: YuvImage) -> np.ndarray:
    y, u, v = (np.asarray(p, dtype=np.float64) for p in yuv)
    u = u - 128.0
    v = v - 128.0
    r = y + 1.402 * v
    g = y - 0.344136 * u - 0.714136 * v
    b = y + 1.772 * u
    return np.stack([to_uint8(r), to_uint8(g), to_uint8(b)], axis=-1)


def luminance(img: np.ndarray) -> np.ndarray:
    return img if img.ndim == 2 else rgb_to_yuv(img).y


def _cubic(x: np.ndarray) -> np.ndarray:
    a = BICUBIC_A
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    return np.where(
        ax <= 1,
        (a + 2) * ax3 - (a + 3) * ax2 + 1,
        np.where(ax < 2, a * ax3 - 5 * a * ax2 + 8 * a * ax - 4 * a, 0.0),
    )


def _weights(n_in: int, n_out: int):
    # Same construction as Matlab's imresize: the kernel is stretched by
    # 1/scale when shrinking (antialiasing) and borders mirror the input.
    scale = n_out / n_in
    kw = 4.0 if scale >= 1 else 4.0 / scale
    out = np.arange(1, n_out + 1, dtype=np.float64)
    u = out / scale + 0.5 * (1 - 1 / scale)
    left = np.floor(u - kw / 2)
    taps = int(np.ceil(kw)) + 2
    idx = left[:, None] + np.arange(taps)[None, :]
    dist = u[:, None] - idx
    w = scale * _cubic(dist * scale) if scale < 1 else _cubic(dist)
    w = w / w.sum(axis=1, keepdims=True)
    idx = idx - 1
    period = 2 * n_in
    idx = np.mod(idx, period)
    idx = np.where(idx >= n_in, period - 1 - idx, idx).astype(np.int64)
    return w, idx


def resize_float(a: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Separable bicubic resize of a 2-D float array (no rounding/clamping)."""
    a = np.asarray(a, dtype=np.float64)
    h, w = shape
    if a.shape[0] != h:
        wr, ir = _weights(a.shape[0], h)
        a = np.einsum("ok,okw->ow", wr, a[ir])
    if a.shape[1] != w:
        wc, ic = _weights(a.shape[1], w)
        a = np.einsum("ok,hok->ho", wc, a[:, ic])
    return a


def resize(p: np.ndarray, factor: float) -> np.ndarray:
    """Bicubic resize of a plane by ``factor``; output rounded and clamped to uint8."""
    h, w = p.shape[:2]
    nh, nw = h * factor, w * factor
    if nh != int(nh) or nw != int(nw) or nh < 1 or nw < 1:
        raise DimensionError(f"resizing {h}x{w} by {factor} gives a non-integer size")
    return to_uint8(resize_float(p, (int(nh), int(nw))))


def pad_to_multiple(p: np.ndarray, m: int) -> tuple[np.ndarray, tuple[int, int]]:
    """Edge-replicate on the bottom/right up to a multiple of ``m``.

    Returns the padded array and ``(pad_rows, pad_cols)``.
    """
    if m < 1:
        raise ValueError("m must be >= 1")
    h, w = p.shape[:2]
    pr = (-h) % m
    pc = (-w) % m
    if pr == 0 and pc == 0:
        return p.copy(), (0, 0)
    widths = [(0, pr), (0, pc)] + [(0, 0)] * (p.ndim - 2)
    return np.pad(p, widths, mode="edge"), (pr, pc)


def crop_padding(p: np.ndarray, pad: tuple[int, int]) -> np.ndarray:
    pr, pc = pad
    h, w = p.shape[:2]
    return p[: h - pr, : w - pc]


def check_multiple(img: np.ndarray, m: int) -> None:
    h, w = img.shape[:2]
    if h % m or w % m:
        raise DimensionError(f"image is {h}x{w}; both dimensions must be divisible by {m}")


_SUPPORTED = {".png", ".pgm", ".ppm", ".pnm"}


def load_image(path, multiple: int = 4, pad: bool = False) -> np.ndarray:
    path = Path(path)
    if path.suffix.lower() not in _SUPPORTED:
        raise ImageFormatError(f"{path}: only PNG and binary PGM/PPM are supported")
    try:
        im = Image.open(path)
        im.load()
    except (OSError, ValueError) as exc:
        raise ImageFormatError(f"{path}: cannot read image ({exc})") from None
    if im.mode == "L":
        a = np.asarray(im, dtype=np.uint8)
    elif im.mode == "RGB":
        a = np.asarray(im, dtype=np.uint8)
    elif im.mode in ("1", "P"):
        a = np.asarray(im.convert("RGB" if im.mode == "P" else "L"), dtype=np.uint8)
    else:
        raise ImageFormatError(f"{path}: unsupported mode {im.mode!r} (8-bit gray or RGB only)")
    if pad:
        a, _ = pad_to_multiple(a, multiple)
    else:
        check_multiple(a, multiple)
    return np.ascontiguousarray(a)


def save_image(path, img: np.ndarray) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix not in _SUPPORTED:
        raise ImageFormatError(f"{path}: only PNG and binary PGM/PPM are supported")
    img = np.asarray(img)
    if img.dtype != np.uint8:
        raise ImageFormatError("only 8-bit images can be written")
    if suffix == ".pgm" and img.ndim != 2:
        raise ImageFormatError("PGM holds grayscale images only")
    if suffix == ".ppm" and img.ndim != 3:
        raise ImageFormatError("PPM holds RGB images only")
    Image.fromarray(img).save(path)
