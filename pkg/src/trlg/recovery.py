"""Watermark extraction, tamper localisation and self-recovery."""

from __future__ import annotations

from dataclasses import dataclass
from enum import IntEnum

import numpy as np
from scipy import ndimage

from . import digest as dg
from . import embedder as em
from . import scramble
from .auth import compute_auth_grid
from .chaos import KeyChain
from .halftone import inverse_halftone_masked
from .imagecore import planes, resize_float, stack_planes, to_uint8

CLOSING_SIZE = 5


class Source(IntEnum):
    UNTOUCHED = 0
    PRIMARY1 = 1
    PRIMARY2 = 2
    SECONDARY1 = 3
    SECONDARY2 = 4
    NEIGHBOR = 5


# colours of the recovery-map rendering, indexed by Source
SOURCE_COLORS = np.array(
    [[0, 0, 0], [255, 0, 0], [0, 255, 0], [0, 0, 255], [255, 255, 255], [0, 255, 255]],
    dtype=np.uint8,
)


@dataclass
class Extraction:
    psi_final: np.ndarray
    psi_encrypted: np.ndarray
    psi_bound: np.ndarray
    psi: np.ndarray


def extract_watermark(img, keys: KeyChain) -> Extraction:
    img = np.asarray(img)
    em.check_dimensions(img)
    nplanes = len(planes(img))
    key7 = keys.require_key7(nplanes)
    psi3 = em.extract_words(img)
    psi2 = em.apply_key7(psi3, key7)
    psi1 = em.decrypt_depermute(psi2, keys.key5, keys.key6)
    chash = em.content_hash(img, keys.key3, keys.key4)
    psi = em.unbind_from_content(psi1, chash)
    return Extraction(psi3, psi2, psi1, psi)


def close_map(raw: np.ndarray, size: int = CLOSING_SIZE) -> np.ndarray:
    """Binary closing with a square element; the border is replicated so that
    regions touching the image edge are not eroded."""
    raw = np.asarray(raw, dtype=bool)
    r = size // 2
    padded = np.pad(raw, r, mode="edge")
    closed = ndimage.binary_closing(padded, structure=np.ones((size, size), bool), border_value=0)
    return (closed[r:-r, r:-r] | raw).astype(np.uint8)


def auth_mismatch(psi: np.ndarray) -> np.ndarray:
    phi, s1, s2, auth = em.disassemble_watermark(psi)
    return (compute_auth_grid(phi, s1, s2) != auth).astype(np.uint8)


@dataclass
class TamperResult:
    tamper: np.ndarray
    raw: np.ndarray
    extraction: Extraction


def promote_to_hash_blocks(raw: np.ndarray) -> np.ndarray:
    """Flag all four 2x2 blocks of a 4x4 block when any of them fails.

    The four share one content hash, so a change anywhere in the 4x4 block
    garbles every word unbound with it.
    """
    h, w = raw.shape
    any4 = np.asarray(raw, bool).reshape(h // 2, 2, w // 2, 2).any(axis=(1, 3))
    return np.repeat(np.repeat(any4, 2, axis=0), 2, axis=1).astype(np.uint8)


def authenticate(img, keys: KeyChain, closing: bool = True) -> TamperResult:
    """Tamper map at 2x2-block resolution (1 = invalid).

    ``raw`` is the per-block auth mismatch; ``tamper`` adds hash-block
    promotion and, optionally, the 5x5 closing.
    """
    ex = extract_watermark(img, keys)
    raw = auth_mismatch(ex.psi)
    tamper = promote_to_hash_blocks(raw)
    if closing:
        tamper = close_map(tamper)
    return TamperResult(tamper, raw, ex)


@dataclass
class Digests:
    primary: dg.PrimaryDigest
    primary_source: np.ndarray  # per record: 0 none, 1 copy 1, 2 copy 2
    secondary: list  # halftone planes at (M/2, N/2)
    secondary_source: np.ndarray  # per 2x2 block: 0 none, 1 copy 1, 2 copy 2


def _record_validity(tamper: np.ndarray) -> np.ndarray:
    h, w = tamper.shape
    return ~tamper.astype(bool).reshape(h // 2, 2, w // 2, 2).any(axis=(1, 3))


def _restore_copy(bits, which: int, keys: KeyChain, valid):
    d = dg.unpack_primary(bits)
    if which == 1:
        d = d.map_fields(scramble.inverse_shift_aside)
        valid = scramble.inverse_shift_aside(valid)
        key = keys.key1
    else:
        d = d.map_fields(scramble.inverse_mirror_aside)
        valid = scramble.inverse_mirror_aside(valid)
        key = keys.key2
    return scramble.unshuffle_digest(d, key), scramble.unshuffle_grid(valid, key)


def reconstruct_digests(psi: np.ndarray, tamper: np.ndarray, keys: KeyChain) -> Digests:
    phi, s1, s2, _ = em.disassemble_watermark(psi)
    bits1, bits2 = em.phi_to_records(phi)
    carrier_ok = _record_validity(tamper)
    d1, v1 = _restore_copy(bits1, 1, keys, carrier_ok)
    merged, src = d1, np.where(v1, 1, 0)
    if bits2 is not None:
        d2, v2 = _restore_copy(bits2, 2, keys, carrier_ok)
        take2 = ~v1 & v2
        f1, f2 = d1.fields(), d2.fields()
        merged = dg.PrimaryDigest(**{k: np.where(take2, f2[k], f1[k]) for k in f1})
        src = np.where(v1, 1, np.where(v2, 2, 0))
    ok = ~tamper.astype(bool)
    sv1 = scramble.inverse_partner_block_1(ok)
    sv2 = scramble.inverse_partner_block_2(ok)
    sec = []
    for a, b in zip(s1, s2):
        h1 = scramble.inverse_partner_block_1(a)
        h2 = scramble.inverse_partner_block_2(b)
        sec.append(np.where(sv1, h1, h2).astype(np.uint8))
    ssrc = np.where(sv1, 1, np.where(sv2, 2, 0))
    return Digests(merged, src.astype(np.uint8), sec, ssrc.astype(np.uint8))


@dataclass
class RecoveryResult:
    image: np.ndarray
    tamper: np.ndarray
    raw_tamper: np.ndarray
    recovery_map: np.ndarray
    digests: Digests | None = None


def _half_secondary(dgs: Digests):
    valid = dgs.secondary_source > 0
    if not valid.any():
        return None, valid
    est = [inverse_halftone_masked(b, valid) for b in dgs.secondary]
    return np.stack(est, axis=-1) if len(est) > 1 else est[0], valid


def _masked_downscale(ps, valid: np.ndarray, shape) -> np.ndarray:
    # keep tampered samples out of the antialiasing kernel of valid neighbours
    w = valid.astype(np.float64)
    den = resize_float(w, shape)
    safe = np.where(np.abs(den) > 1e-6, den, 1.0)
    out = []
    for p in ps:
        plain = resize_float(p, shape)
        norm = resize_float(np.where(valid, p, 0.0), shape) / safe
        out.append(np.where(den > 0.5, norm, plain))
    return np.clip(np.stack(out, axis=-1), 0, 255)


def recover(img, keys: KeyChain, closing: bool = True) -> RecoveryResult:
    """Localise tampering and rebuild the invalid 2x2 blocks."""
    img = np.asarray(img)
    tr = authenticate(img, keys, closing)
    phi = tr.tamper.astype(bool)
    rmap = np.zeros(phi.shape, dtype=np.uint8)
    if not phi.any():
        return RecoveryResult(img.copy(), tr.tamper, tr.raw, rmap)
    dgs = reconstruct_digests(tr.extraction.psi, tr.tamper, keys)
    prim = dg.reconstruct_primary(dgs.primary, dgs.primary_source > 0)
    sec, sec_valid = _half_secondary(dgs)

    color = img.ndim == 3
    half_shape = phi.shape
    full_shape = img.shape[:2]
    mask = np.repeat(np.repeat(phi, 2, axis=0), 2, axis=1)
    down = _masked_downscale(planes(img), ~mask, half_shape)
    ps = prim.image if color else prim.image[..., None]
    ss = None if sec is None else (sec if color else sec[..., None])

    out = np.zeros(half_shape + (down.shape[-1],))
    known = np.zeros(half_shape, dtype=bool)
    # untouched blocks use the received content
    out[~phi] = down[~phi]
    known |= ~phi
    use_p = phi & prim.known
    out[use_p] = ps[use_p]
    known |= use_p
    rsrc = np.repeat(np.repeat(dgs.primary_source, 2, axis=0), 2, axis=1)
    rmap[use_p] = np.where(rsrc[use_p] == 2, Source.PRIMARY2, Source.PRIMARY1)
    if ss is not None:
        finite = np.isfinite(ss).all(axis=-1)
        use_s = phi & ~known & finite
        out[use_s] = ss[use_s]
        known |= use_s
        code = np.where(dgs.secondary_source == 2, Source.SECONDARY2, Source.SECONDARY1)
        code = np.where(sec_valid, code, Source.NEIGHBOR)
        rmap[use_s] = code[use_s]
    holes = phi & ~known
    rmap[holes] = Source.NEIGHBOR
    half, _ = dg.neighbor_fill(out, known)

    result = []
    for c, p in enumerate(planes(img)):
        up = to_uint8(resize_float(half[..., c], full_shape))
        result.append(np.where(mask, up, p).astype(np.uint8))
    return RecoveryResult(stack_planes(result), tr.tamper, tr.raw, rmap, dgs)


def render_tamper_map(tamper: np.ndarray) -> np.ndarray:
    return (np.asarray(tamper, dtype=bool) * 255).astype(np.uint8)


def render_recovery_map(rmap: np.ndarray) -> np.ndarray:
    return SOURCE_COLORS[np.asarray(rmap, dtype=np.intp)]


__all__ = [
    "Source",
    "extract_watermark",
    "authenticate",
    "close_map",
    "promote_to_hash_blocks",
    "reconstruct_digests",
    "recover",
    "render_tamper_map",
    "render_recovery_map",
]
