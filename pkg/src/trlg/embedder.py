"""Watermark assembly, content binding, encryption and LSB-matching embedding.

Every 2x2 block of every plane carries one 8-bit word, MSB first::

    plane 1:      phi[5]  s1  s2  auth
    planes 2, 3:  phi[6]  s1  s2

``phi`` is that block's slice of the primary records, ``s1``/``s2`` the
block's bits of the two reordered halftone copies.  The four samples of a
block hold the word two bits each, top-left sample first.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import digest as dg
from . import scramble
from .auth import compute_auth_grid
from .chaos import CcsKey, KeyChain, ccs_sequence, derive_integers, simple_mapping
from .detmath import atan
from .errors import DimensionError, KeyValidationError
from .gaopt import GaConfig, optimize_key7, optimize_thresholds
from .imagecore import pad_to_multiple, planes, rgb_to_yuv, stack_planes

MULTIPLE = 16
PLANE_PHI = (5, 6, 6)


# -- layout ------------------------------------------------------------------


def _sub_to_grid(a: np.ndarray) -> np.ndarray:
    """(G, G, 4, k) per-sub-block data -> (2G, 2G, k), sub-blocks row-major."""
    g0, g1, _, k = a.shape
    return a.reshape(g0, g1, 2, 2, k).transpose(0, 2, 1, 3, 4).reshape(2 * g0, 2 * g1, k)


def _grid_to_sub(a: np.ndarray) -> np.ndarray:
    h, w, k = a.shape
    return a.reshape(h // 2, 2, w // 2, 2, k).transpose(0, 2, 1, 3, 4).reshape(h // 2, w // 2, 4, k)


def records_to_phi(bits1: np.ndarray, bits2: np.ndarray | None = None) -> np.ndarray:
    """Spread primary records over their four 2x2 sub-blocks.

    Colour joins both 34-bit copies (68 bits): bits 0-19 go to plane 1 (5 per
    sub-block), 20-43 to plane 2 and 44-67 to plane 3 (6 each).  Gray carries
    a single 20-bit copy.  Returns (M/2, N/2, 17 or 5).
    """
    bits1 = np.asarray(bits1, dtype=np.uint8)
    g0, g1, n = bits1.shape
    if bits2 is None:
        if n != dg.GRAY_BITS:
            raise ValueError("a single primary copy must use 20-bit records")
        return _sub_to_grid(bits1.reshape(g0, g1, 4, 5))
    dbar = np.concatenate([bits1, np.asarray(bits2, dtype=np.uint8)], axis=-1)
    if dbar.shape[-1] != 2 * dg.COLOR_BITS:
        raise ValueError("colour records must be 34 bits each")
    parts = [
        dbar[..., 0:20].reshape(g0, g1, 4, 5),
        dbar[..., 20:44].reshape(g0, g1, 4, 6),
        dbar[..., 44:68].reshape(g0, g1, 4, 6),
    ]
    return _sub_to_grid(np.concatenate(parts, axis=-1))


def phi_to_records(phi: np.ndarray):
    """Inverse of :func:`records_to_phi`; returns ``(bits1, bits2 or None)``."""
    sub = _grid_to_sub(np.asarray(phi, dtype=np.uint8))
    g0, g1 = sub.shape[:2]
    if sub.shape[-1] == 5:
        return sub.reshape(g0, g1, 20), None
    d1 = sub[..., 0:5].reshape(g0, g1, 20)
    d2 = sub[..., 5:11].reshape(g0, g1, 24)
    d3 = sub[..., 11:17].reshape(g0, g1, 24)
    dbar = np.concatenate([d1, d2, d3], axis=-1)
    return dbar[..., :34], dbar[..., 34:]


def _to_byte(bits: np.ndarray) -> np.ndarray:
    return (bits.astype(np.uint16) @ (1 << np.arange(7, -1, -1, dtype=np.uint16))).astype(np.uint8)


def _from_byte(v: np.ndarray) -> np.ndarray:
    return ((np.asarray(v, dtype=np.uint8)[..., None] >> np.arange(7, -1, -1)) & 1).astype(np.uint8)


def assemble_watermark(phi, sec1, sec2, auth) -> np.ndarray:
    """Watermark words Psi, shape (planes, M/2, N/2) uint8."""
    phi = np.asarray(phi, dtype=np.uint8)
    nplanes = 3 if phi.shape[-1] == 17 else 1
    if len(sec1) != nplanes or len(sec2) != nplanes:
        raise ValueError("secondary copies do not match the plane count")
    out = []
    start = 0
    for k in range(nplanes):
        width = PLANE_PHI[k]
        parts = [phi[..., start : start + width], np.asarray(sec1[k], np.uint8)[..., None],
                 np.asarray(sec2[k], np.uint8)[..., None]]
        if k == 0:
            parts.append(np.asarray(auth, np.uint8)[..., None])
        start += width
        out.append(_to_byte(np.concatenate(parts, axis=-1)))
    return np.stack(out)


def disassemble_watermark(psi):
    """Split words into ``(phi, sec1 planes, sec2 planes, auth)``."""
    psi = np.asarray(psi, dtype=np.uint8)
    nplanes = psi.shape[0]
    phis, s1, s2 = [], [], []
    auth = None
    for k in range(nplanes):
        b = _from_byte(psi[k])
        width = PLANE_PHI[k]
        phis.append(b[..., :width])
        s1.append(b[..., width])
        s2.append(b[..., width + 1])
        if k == 0:
            auth = b[..., 7]
    return np.concatenate(phis, axis=-1), s1, s2, auth


# -- content hash -----------------------------------------------------------


@dataclass(frozen=True)
class ContentHash:
    """Four relation bytes per 4x4 block."""

    r1: np.ndarray
    r2: np.ndarray
    r3: np.ndarray
    r4: np.ndarray

    @property
    def combined(self) -> np.ndarray:
        return (self.r1 ^ self.r2 ^ self.r3 ^ self.r4).astype(np.uint8)


def relation_byte(num: int, den: int) -> int:
    """``floor(atan(num/den) * 1e14) mod 256`` with the zero-denominator rules."""
    if den == 0:
        if num == 0:
            return 0
        x = math.inf if num > 0 else -math.inf
    else:
        x = num / den
    return math.floor(atan(x) * 1e14) % 256


_REL_SPAN = 63


def _relation_table() -> np.ndarray:
    # h values are multiples of 4, so differences divided by 4 lie in [-63, 63]
    r = range(-_REL_SPAN, _REL_SPAN + 1)
    t = np.array([[relation_byte(n, d) for d in r] for n in r], dtype=np.uint8)
    t.flags.writeable = False
    return t


_REL_TABLE = None


def _relations(num: np.ndarray, den: np.ndarray) -> np.ndarray:
    global _REL_TABLE
    if _REL_TABLE is None:
        _REL_TABLE = _relation_table()
    return _REL_TABLE[num // 4 + _REL_SPAN, den // 4 + _REL_SPAN]


def dc_byte(total: int) -> int:
    """``floor(DC * 1e14) mod 256`` with DC = total / 2 of the orthonormal 2x2 DCT."""
    return (int(total) * 10**14 // 2) % 256


def candidate_positions(shape, key3: CcsKey, key4: CcsKey, nplanes: int):
    """Candidate pixel (0..3, raster order in the 2x2 block) and plane per block."""
    h, w = shape
    n = (h // 2) * (w // 2)
    pix = derive_integers(ccs_sequence(key3, n), 4, 1).reshape(h // 2, w // 2) - 1
    if nplanes == 1:
        plane = np.zeros_like(pix)
    else:
        plane = derive_integers(ccs_sequence(key4, n), 3, 1).reshape(h // 2, w // 2) - 1
    return pix, plane


def candidate_mask(shape, key3: CcsKey, key4: CcsKey, nplanes: int) -> np.ndarray:
    """Boolean (planes, M, N) mask of the samples that take plain LSB replacement."""
    pix, plane = candidate_positions(shape, key3, key4, nplanes)
    h, w = shape
    m = np.zeros((nplanes, h, w), dtype=bool)
    bi, bj = np.indices(pix.shape)
    m[plane, 2 * bi + pix // 2, 2 * bj + pix % 2] = True
    return m


def content_hash(img, key3: CcsKey, key4: CcsKey) -> ContentHash:
    img = np.asarray(img)
    ps = planes(img)
    h, w = ps[0].shape
    pix, plane = candidate_positions((h, w), key3, key4, len(ps))
    stack = np.stack(ps).astype(np.int64)
    bi, bj = np.indices(pix.shape)
    hc = stack[plane, 2 * bi + pix // 2, 2 * bj + pix % 2] & 252
    h1, h2 = hc[0::2, 0::2], hc[0::2, 1::2]
    h3, h4 = hc[1::2, 0::2], hc[1::2, 1::2]
    r1 = _relations(h1 - h4, h2 - h3)
    r2 = _relations(h1 - h3, h2 - h4)
    r3 = _relations(h1 - h2, h3 - h4)
    total = h1 + h2 + h3 + h4
    # total * 1e14 / 2 overflows int64; reduce exactly: 1e14 / 2 = 5e13
    r4 = ((total % 256) * (5 * 10**13 % 256) % 256).astype(np.uint8)
    return ContentHash(r1, r2, r3, r4)


def bind_to_content(psi, chash: ContentHash) -> np.ndarray:
    """XOR every word with its enclosing 4x4 block's hash byte (an involution)."""
    psi = np.asarray(psi, dtype=np.uint8)
    r = np.repeat(np.repeat(chash.combined, 2, axis=0), 2, axis=1)
    return psi ^ r[None]


unbind_from_content = bind_to_content


# -- encryption and permutation -------------------------------------------------


def _perm_tables():
    base = simple_mapping(13, 8)
    fwd = np.zeros((8, 256), dtype=np.uint8)
    inv = np.zeros((8, 256), dtype=np.uint8)
    vals = np.arange(256, dtype=np.uint8)
    bits = _from_byte(vals)
    for p in range(8):
        perm = np.roll(base, p)
        fwd[p] = _to_byte(bits[:, perm])
        out = np.empty_like(bits)
        out[:, perm] = bits
        inv[p] = _to_byte(out)
    fwd.flags.writeable = False
    inv.flags.writeable = False
    return fwd, inv


_FWD, _INV = _perm_tables()


def permute_bits(v, p) -> np.ndarray:
    """``f(v, p)``: bit ``i`` (MSB first) of the output is bit ``perm_p[i]`` of ``v``."""
    return _FWD[np.asarray(p) - 1, np.asarray(v, dtype=np.uint8)]


def depermute_bits(v, p) -> np.ndarray:
    return _INV[np.asarray(p) - 1, np.asarray(v, dtype=np.uint8)]


def secret_streams(shape, key5: CcsKey, key6: CcsKey):
    """Per-block XOR value s' in [0, 255] and permutation index s'' in [1, 8]."""
    h2, w2 = shape
    n = h2 * w2
    s1 = derive_integers(ccs_sequence(key5, n), 256).reshape(h2, w2).astype(np.uint8)
    s2 = derive_integers(ccs_sequence(key6, n), 8, 1).reshape(h2, w2)
    return s1, s2


def encrypt_permute(psi1, key5: CcsKey, key6: CcsKey) -> np.ndarray:
    psi1 = np.asarray(psi1, dtype=np.uint8)
    sv, sp = secret_streams(psi1.shape[1:], key5, key6)
    return permute_bits(psi1 ^ sv[None], sp[None])


def decrypt_depermute(psi2, key5: CcsKey, key6: CcsKey) -> np.ndarray:
    psi2 = np.asarray(psi2, dtype=np.uint8)
    sv, sp = secret_streams(psi2.shape[1:], key5, key6)
    return depermute_bits(psi2, sp[None]) ^ sv[None]


def apply_key7(psi2, key7: bytes) -> np.ndarray:
    psi2 = np.asarray(psi2, dtype=np.uint8)
    if len(key7) != psi2.shape[0]:
        raise KeyValidationError(f"key7 has {len(key7) * 8} bits, the watermark needs {psi2.shape[0] * 8}")
    k = np.frombuffer(bytes(key7), dtype=np.uint8)
    return psi2 ^ k[:, None, None]


# -- modified LSB matching ------------------------------------------------------


def lsb_match_embed(block, word: int, is_candidate=None) -> np.ndarray:
    """Embed one 8-bit word into four samples (MSB pair into the first sample).

    Reference scalar version of :func:`embed_plane`.
    """
    block = [int(v) for v in np.asarray(block).ravel()]
    if len(block) != 4:
        raise ValueError("a block has four samples")
    cand = [False] * 4 if is_candidate is None else [bool(c) for c in np.asarray(is_candidate).ravel()]
    init_std = float(np.std(block))
    out = list(block)
    for i in range(4):
        f = -1 if init_std < float(np.std(out)) else 1
        omega = (int(word) >> (6 - 2 * i)) & 3
        b = block[i]
        new = None
        if not cand[i]:
            for j in range(4):
                for v in (b + j * f, b - j * f):
                    if 0 <= v <= 255 and (v & 3) == omega:
                        new = v
                        break
                if new is not None:
                    break
        out[i] = new if new is not None else (b & ~3) | omega
    return np.array(out, dtype=np.uint8)


def _std4(x: np.ndarray) -> np.ndarray:
    m = x.mean(axis=-1, keepdims=True)
    return np.sqrt(((x - m) ** 2).mean(axis=-1))


def embed_plane(plane, words, candidates=None) -> np.ndarray:
    """Vectorized :func:`lsb_match_embed` over every 2x2 block of a plane."""
    plane = np.asarray(plane)
    h, w = plane.shape
    blk = plane.reshape(h // 2, 2, w // 2, 2).transpose(0, 2, 1, 3).reshape(-1, 4).astype(np.int64)
    wd = np.asarray(words, dtype=np.int64).ravel()
    if candidates is None:
        cand = np.zeros_like(blk, dtype=bool)
    else:
        cand = np.asarray(candidates).reshape(h // 2, 2, w // 2, 2).transpose(0, 2, 1, 3).reshape(-1, 4)
    init_std = _std4(blk.astype(np.float64))
    out = blk.copy()
    for i in range(4):
        f = np.where(init_std < _std4(out.astype(np.float64)), -1, 1)
        omega = (wd >> (6 - 2 * i)) & 3
        b = blk[:, i]
        new = (b & ~3) | omega
        done = cand[:, i].copy()
        for j in range(4):
            for sgn in (1, -1):
                v = b + sgn * j * f
                ok = ~done & (v >= 0) & (v <= 255) & ((v & 3) == omega)
                new = np.where(ok, v, new)
                done |= ok
        out[:, i] = new
    return out.reshape(h // 2, w // 2, 2, 2).transpose(0, 2, 1, 3).reshape(h, w).astype(np.uint8)


def extract_words(img) -> np.ndarray:
    """Read the 8-bit word of every 2x2 block of every plane."""
    out = []
    for p in planes(np.asarray(img)):
        s = (p.astype(np.uint8) & 3)
        out.append((s[0::2, 0::2] << 6) | (s[0::2, 1::2] << 4) | (s[1::2, 0::2] << 2) | s[1::2, 1::2])
    return np.stack(out).astype(np.uint8)


# -- full pipeline -----------------------------------------------------------------


@dataclass
class EmbedResult:
    image: np.ndarray
    keys: KeyChain
    thresholds: np.ndarray
    psi: np.ndarray
    psi_bound: np.ndarray
    psi_encrypted: np.ndarray
    psi_final: np.ndarray
    digest: dg.PrimaryDigest = field(repr=False)
    secondary: dg.SecondaryDigest = field(repr=False)
    pad: tuple = (0, 0)


def check_dimensions(img) -> None:
    h, w = np.asarray(img).shape[:2]
    if h % MULTIPLE or w % MULTIPLE:
        raise DimensionError(
            f"image is {h}x{w}; the watermark layout needs both dimensions divisible by {MULTIPLE} "
            "(pad the image first)"
        )


def prepare_host(img, pad: bool = False):
    img = np.asarray(img)
    if pad:
        return pad_to_multiple(img, MULTIPLE)
    check_dimensions(img)
    return img, (0, 0)


def carried_secondary(sec: dg.SecondaryDigest):
    return (
        [scramble.partner_block_1(p) for p in sec.bits],
        [scramble.partner_block_2(p) for p in sec.bits],
    )


def build_watermark(host, keys: KeyChain, thresholds):
    """Digests -> reordered copies -> auth -> words Psi (before binding)."""
    host = np.asarray(host)
    color = host.ndim == 3
    d = dg.generate_primary(rgb_to_yuv(host) if color else host, thresholds)
    sec = dg.generate_secondary(host)
    copy1 = scramble.shuffle_digest(d, keys.key1).map_fields(scramble.shift_aside)
    bits1 = dg.pack_primary(copy1)
    if color:
        copy2 = scramble.shuffle_digest(d, keys.key2).map_fields(scramble.mirror_aside)
        phi = records_to_phi(bits1, dg.pack_primary(copy2))
    else:
        phi = records_to_phi(bits1)
    s1, s2 = carried_secondary(sec)
    auth = compute_auth_grid(phi, s1, s2)
    return assemble_watermark(phi, s1, s2, auth), d, sec


def embed(host, keys: KeyChain, ga_cfg: GaConfig | None = None, threshold_cfg: GaConfig | None = None,
          thresholds=None, threads: int = 1, key7: bytes | None = None) -> EmbedResult:
    """Watermark ``host`` (uint8 gray or RGB, dimensions divisible by 16).

    ``key7`` skips the key search when given; otherwise it is found by the GA
    and returned in ``result.keys``.
    """
    host = np.asarray(host)
    if host.dtype != np.uint8:
        raise ValueError("host must be uint8")
    check_dimensions(host)
    ps = planes(host)
    y = rgb_to_yuv(host).y if host.ndim == 3 else host
    if thresholds is None:
        tcfg = (threshold_cfg or GaConfig()).with_(threads=threads)
        thresholds = optimize_thresholds(y, tcfg)
    psi, d, sec = build_watermark(host, keys, thresholds)
    chash = content_hash(host, keys.key3, keys.key4)
    psi1 = bind_to_content(psi, chash)
    psi2 = encrypt_permute(psi1, keys.key5, keys.key6)
    cand = candidate_mask(ps[0].shape, keys.key3, keys.key4, len(ps))

    def plane_embed(k, p, words):
        return embed_plane(p, words, cand[k])

    if key7 is None:
        kcfg = (ga_cfg or GaConfig()).with_(threads=threads)
        key7 = optimize_key7(host, list(psi2), plane_embed, kcfg)
    psi3 = apply_key7(psi2, key7)
    out = stack_planes(plane_embed(k, p, psi3[k]) for k, p in enumerate(ps))
    return EmbedResult(out, keys.with_key7(key7), np.asarray(thresholds), psi, psi1, psi2, psi3, d, sec)
