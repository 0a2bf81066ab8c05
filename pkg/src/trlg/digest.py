"""Primary (wavelet) and secondary (halftone) self-recovery digests.

The primary digest describes every 4x4 host block with one record: a texture
flag, the four quantized Haar coefficients of the block's 2x2 footprint in
the half-size luminance, and 7-bit U/V samples of the quarter-size chroma.

Record layout, most significant bit first (20 bits gray, 34 bits colour)::

    texture (flag 1): LL[6:2]  sLH LH[5:2]  sHL HL[5:2]  sHH HH[5:3]
    flat    (flag 0): LL[6:0]  sLH LH[4:2]  sHL HL[4:2]  sHH HH[4:2]
    colour only:      U[6:0]   V[6:0]
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import sparse
from scipy.sparse import linalg as splinalg

from .halftone import floyd_halftone
from .imagecore import (
    YuvImage,
    check_multiple,
    planes,
    resize,
    resize_float,
    rgb_to_yuv,
    stack_planes,
    to_uint8,
)
from .lwt import WaveletBands, dequantize, forward_haar, inverse_haar, quantize

MU = 2
GRAY_BITS = 20
COLOR_BITS = 34
TILE = 128

# (mask, rounding offset, saturation ceiling) for the magnitude of each band
_TEXTURE = {"ll": (124, 2, 127), "lh": (60, 2, 63), "hl": (60, 2, 63), "hh": (56, 4, 63)}
_FLAT = {"ll": (127, 0, 127), "lh": (28, 2, 31), "hl": (28, 2, 31), "hh": (28, 2, 31)}

# (field, signed, first bit, last bit) per class; bits are taken MSB first
_LAYOUT_TEXTURE = (("ll", False, 6, 2), ("lh", True, 5, 2), ("hl", True, 5, 2), ("hh", True, 5, 3))
_LAYOUT_FLAT = (("ll", False, 6, 0), ("lh", True, 4, 2), ("hl", True, 4, 2), ("hh", True, 4, 2))


@dataclass(frozen=True)
class PrimaryDigest:
    """Per-block digest fields, each an (M/4, N/4) integer grid.

    ``ll`` .. ``hh`` hold the masked, quantized coefficients with their sign;
    ``u``/``v`` the 7-bit chroma, or ``None`` for grayscale hosts.
    """

    gamma: np.ndarray
    ll: np.ndarray
    lh: np.ndarray
    hl: np.ndarray
    hh: np.ndarray
    u: np.ndarray | None = None
    v: np.ndarray | None = None

    @property
    def shape(self):
        return self.gamma.shape

    @property
    def is_color(self) -> bool:
        return self.u is not None

    @property
    def bits_per_block(self) -> int:
        return COLOR_BITS if self.is_color else GRAY_BITS

    def fields(self) -> dict:
        out = {"gamma": self.gamma, "ll": self.ll, "lh": self.lh, "hl": self.hl, "hh": self.hh}
        if self.is_color:
            out["u"] = self.u
            out["v"] = self.v
        return out

    def map_fields(self, fn) -> PrimaryDigest:
        """Apply ``fn`` to every field grid (used by the block reorderings)."""
        return replace(self, **{k: fn(a) for k, a in self.fields().items()})

    def __eq__(self, other):
        if not isinstance(other, PrimaryDigest) or self.is_color != other.is_color:
            return NotImplemented
        a, b = self.fields(), other.fields()
        return all(np.array_equal(a[k], b[k]) for k in a)


@dataclass(frozen=True)
class SecondaryDigest:
    """One binary halftone plane of size (M/2, N/2) per host plane."""

    bits: tuple

    @property
    def planes(self) -> int:
        return len(self.bits)


def block_std_map(y: np.ndarray) -> np.ndarray:
    """Population standard deviation of every 4x4 block."""
    y = np.asarray(y, dtype=np.float64)
    check_multiple(y, 4)
    h, w = y.shape
    b = y.reshape(h // 4, 4, w // 4, 4)
    return b.std(axis=(1, 3))


def expand_thresholds(thresholds, shape, tile_blocks: int = TILE // 4) -> np.ndarray:
    """Tile a per-128x128 threshold grid (or scalar) over the block grid."""
    t = np.asarray(thresholds, dtype=np.float64)
    if t.ndim == 0:
        return np.full(shape, float(t))
    if t.shape == tuple(shape):
        return t
    full = np.repeat(np.repeat(t, tile_blocks, axis=0), tile_blocks, axis=1)
    if full.shape[0] < shape[0] or full.shape[1] < shape[1]:
        raise ValueError(f"threshold grid {t.shape} does not cover block grid {shape}")
    return full[: shape[0], : shape[1]]


def classify_texture(std_map, thresholds) -> np.ndarray:
    std_map = np.asarray(std_map, dtype=np.float64)
    t = expand_thresholds(thresholds, std_map.shape)
    return (t < std_map).astype(np.uint8)


def _mask_band(c: np.ndarray, spec) -> np.ndarray:
    mask, theta, ceil = spec
    mag = np.minimum(np.abs(c) + theta, ceil) & mask
    return np.where(c < 0, -mag, mag)


def mask_coefficients(bands: WaveletBands, gamma: np.ndarray) -> dict:
    """Round and mask quantized bands per texture class."""
    tex = gamma.astype(bool)
    out = {}
    for name in ("ll", "lh", "hl", "hh"):
        c = np.asarray(getattr(bands, name), dtype=np.int64)
        out[name] = np.where(tex, _mask_band(c, _TEXTURE[name]), _mask_band(c, _FLAT[name]))
    return out


def luminance_bands(y: np.ndarray) -> WaveletBands:
    """Quantized Haar bands of the half-size luminance."""
    half = resize(y, 0.5)
    b = forward_haar(half)
    return WaveletBands(*(quantize(a, MU) for a in (b.ll, b.lh, b.hl, b.hh)))


def generate_primary(host, thresholds, y_bands: WaveletBands | None = None) -> PrimaryDigest:
    """Primary digest of ``host`` (gray plane, RGB image or :class:`YuvImage`)."""
    if isinstance(host, YuvImage):
        yuv = host
    elif np.ndim(host) == 3:
        yuv = rgb_to_yuv(np.asarray(host))
    else:
        yuv = None
    y = yuv.y if yuv is not None else np.asarray(host)
    check_multiple(y, 4)
    gamma = classify_texture(block_std_map(y), thresholds)
    bands = y_bands if y_bands is not None else luminance_bands(y)
    m = mask_coefficients(bands, gamma)
    u = v = None
    if yuv is not None:
        u = (resize(yuv.u, 0.25).astype(np.int64) & 254) >> 1
        v = (resize(yuv.v, 0.25).astype(np.int64) & 254) >> 1
    return PrimaryDigest(gamma, m["ll"], m["lh"], m["hl"], m["hh"], u, v)


def _field_bits(values: np.ndarray, hi: int, lo: int) -> np.ndarray:
    shifts = np.arange(hi, lo - 1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.uint8)


def pack_primary(d: PrimaryDigest) -> np.ndarray:
    """Pack every record; returns uint8 bits of shape (M/4, N/4, 20 or 34)."""
    tex = d.gamma.astype(bool)
    out = np.zeros(d.shape + (d.bits_per_block,), dtype=np.uint8)
    out[..., 0] = d.gamma
    f = d.fields()
    for layout, sel in ((_LAYOUT_TEXTURE, tex), (_LAYOUT_FLAT, ~tex)):
        pos = 1
        chunks = []
        for name, signed, hi, lo in layout:
            c = np.asarray(f[name], dtype=np.int64)[sel]
            mag = np.abs(c)
            if signed:
                chunks.append(((c < 0) & (mag > 0)).astype(np.uint8)[..., None])
            chunks.append(_field_bits(mag, hi, lo))
        block = np.concatenate(chunks, axis=-1)
        out[sel, pos : pos + block.shape[-1]] = block
    if d.is_color:
        out[..., 20:27] = _field_bits(np.asarray(d.u, dtype=np.int64), 6, 0)
        out[..., 27:34] = _field_bits(np.asarray(d.v, dtype=np.int64), 6, 0)
    return out


def _bits_value(bits: np.ndarray, hi: int, lo: int) -> np.ndarray:
    weights = (1 << np.arange(hi, lo - 1, -1)).astype(np.int64)
    return bits.astype(np.int64) @ weights


def unpack_primary(bits) -> PrimaryDigest:
    """Inverse of :func:`pack_primary`; dropped low bits come back as zeros."""
    bits = np.asarray(bits, dtype=np.uint8)
    n = bits.shape[-1]
    if n not in (GRAY_BITS, COLOR_BITS):
        raise ValueError(f"primary record must be {GRAY_BITS} or {COLOR_BITS} bits, got {n}")
    gamma = bits[..., 0].copy()
    tex = gamma.astype(bool)
    vals = {k: np.zeros(gamma.shape, dtype=np.int64) for k in ("ll", "lh", "hl", "hh")}
    for layout, sel in ((_LAYOUT_TEXTURE, tex), (_LAYOUT_FLAT, ~tex)):
        b = bits[sel]
        pos = 1
        for name, signed, hi, lo in layout:
            neg = None
            if signed:
                neg = b[..., pos].astype(bool)
                pos += 1
            width = hi - lo + 1
            mag = _bits_value(b[..., pos : pos + width], hi, lo)
            pos += width
            vals[name][sel] = np.where(neg, -mag, mag) if signed else mag
    u = v = None
    if n == COLOR_BITS:
        u = _bits_value(bits[..., 20:27], 6, 0)
        v = _bits_value(bits[..., 27:34], 6, 0)
    return PrimaryDigest(gamma, vals["ll"], vals["lh"], vals["hl"], vals["hh"], u, v)


def pack_primary_bits(d: PrimaryDigest, block) -> np.ndarray:
    """Bit string of the record at block ``(i, j)``."""
    i, j = block
    one = d.map_fields(lambda a: np.asarray(a)[i : i + 1, j : j + 1])
    return pack_primary(one)[0, 0]


def unpack_primary_bits(bits) -> PrimaryDigest:
    """Decode a single 20/34-bit record into a 1x1 digest."""
    bits = np.asarray(bits, dtype=np.uint8)
    if bits.ndim != 1:
        raise ValueError("expected a single bit string")
    return unpack_primary(bits[None, None, :])


def generate_secondary(img) -> SecondaryDigest:
    """Half-size Floyd-Steinberg halftone of every host plane."""
    img = np.asarray(img)
    check_multiple(img, 4)
    return SecondaryDigest(tuple(floyd_halftone(resize(p, 0.5)) for p in planes(img)))


def reconstruct_luminance(d: PrimaryDigest) -> np.ndarray:
    """Half-size luminance from the digest bands, float64 clamped to [0, 255]."""
    bands = WaveletBands(*(dequantize(np.asarray(a), MU) for a in (d.ll, d.lh, d.hl, d.hh)))
    return np.clip(inverse_haar(bands), 0, 255).astype(np.float64)


def neighbor_fill(values: np.ndarray, known: np.ndarray):
    """Fill unknown samples from known ones by 4-neighbour averaging.

    Returns the fixed point of repeatedly replacing every unknown sample by the
    mean of its in-image 4-neighbours (known samples held fixed), i.e. the
    discrete harmonic interpolant, solved directly with one sparse
    factorisation.  ``values`` may carry trailing channel axes.  Returns
    ``(filled, known)``; with no known sample at all nothing is filled.
    """
    out = np.array(values, dtype=np.float64)
    known = np.array(known, dtype=bool)
    if not known.any() or known.all():
        return out, known
    h, w = known.shape
    flat = out.reshape(h * w, -1)
    unk = np.flatnonzero(~known.ravel())
    index = np.full(h * w, -1, dtype=np.int64)
    index[unk] = np.arange(unk.size)
    r, c = np.divmod(unk, w)
    deg = np.zeros(unk.size)
    rhs = np.zeros((unk.size, flat.shape[1]))
    rows, cols = [], []
    for dr, dc in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        rr, cc = r + dr, c + dc
        inside = (rr >= 0) & (rr < h) & (cc >= 0) & (cc < w)
        deg += inside
        nb = rr[inside] * w + cc[inside]
        me = np.flatnonzero(inside)
        j = index[nb]
        free = j >= 0
        rows.append(me[free])
        cols.append(j[free])
        np.add.at(rhs, me[~free], flat[nb[~free]])
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    a = sparse.csc_matrix(
        (np.concatenate([deg, -np.ones(rows.size)]),
         (np.concatenate([np.arange(unk.size), rows]), np.concatenate([np.arange(unk.size), cols]))),
        shape=(unk.size, unk.size),
    )
    sol = splinalg.splu(a).solve(rhs)
    flat[unk] = sol
    return flat.reshape(out.shape), np.ones_like(known)


@dataclass(frozen=True)
class Reconstruction:
    """Half-size reconstruction: ``image`` float64 (H/2, W/2[, 3]) and ``known`` mask."""

    image: np.ndarray
    known: np.ndarray


def reconstruct_primary(d: PrimaryDigest, valid=None) -> Reconstruction:
    """Half-size image from the digest records flagged in ``valid`` (M/4, N/4).

    Luminance is only trusted on the 2x2 cells of valid records; chroma of
    invalid records is interpolated from valid neighbours before upscaling.
    With no valid record at all the whole result is unknown.
    """
    valid = np.ones(d.shape, dtype=bool) if valid is None else np.asarray(valid, dtype=bool)
    known = np.repeat(np.repeat(valid, 2, axis=0), 2, axis=1)
    y = reconstruct_luminance(d)
    if not valid.any():
        shape = y.shape + ((3,) if d.is_color else ())
        return Reconstruction(np.zeros(shape), known)
    if not d.is_color:
        return Reconstruction(np.where(known, y, 0.0), known)
    chroma = []
    for c in (d.u, d.v):
        filled, _ = neighbor_fill(np.asarray(c, dtype=np.float64) * 2.0, valid)
        chroma.append(np.clip(resize_float(filled, y.shape), 0, 255))
    rgb = _yuv_to_rgb_float(y, chroma[0], chroma[1])
    rgb[~known] = 0.0
    return Reconstruction(rgb, known)


def _yuv_to_rgb_float(y, u, v) -> np.ndarray:
    u = u - 128.0
    v = v - 128.0
    r = y + 1.402 * v
    g = y - 0.344136 * u - 0.714136 * v
    b = y + 1.772 * u
    return np.clip(np.stack([r, g, b], axis=-1), 0, 255)


def primary_preview(d: PrimaryDigest) -> np.ndarray:
    """Full-size uint8 rendering of a complete digest (for inspection)."""
    img = to_uint8(reconstruct_primary(d).image)
    return stack_planes(resize(p, 2.0) for p in planes(img))
