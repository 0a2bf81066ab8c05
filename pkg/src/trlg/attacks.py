"""Tamper simulators: splice, copy-move, collage, vector quantisation, protocol."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import TrlgError

KINDS = ("splice", "copy_move", "collage", "vector_quantization", "protocol")
REGIONS = ("center", "left_to_right", "up_to_bottom", "rect")
_NEEDS_DONOR = ("collage", "vector_quantization", "protocol")
GRID = 2  # mask resolution
SHIFT_STEP = 4  # moved content keeps whole watermark blocks


class AttackError(TrlgError, ValueError):
    pass


@dataclass(frozen=True)
class AttackSpec:
    kind: str = "splice"
    rate: float = 0.1
    region: str = "center"
    rect: tuple | None = None  # (top, left, bottom, right) for region="rect"
    rng_seed: int = 0

    def __post_init__(self):
        if self.kind not in KINDS:
            raise AttackError(f"unknown attack kind {self.kind!r}; expected one of {KINDS}")
        if self.region not in REGIONS:
            raise AttackError(f"unknown region {self.region!r}; expected one of {REGIONS}")
        if not 0.0 <= self.rate <= 1.0:
            raise AttackError(f"rate must lie in [0, 1], got {self.rate}")
        if self.region == "rect" and (self.rect is None or len(self.rect) != 4):
            raise AttackError("region 'rect' needs rect=(top, left, bottom, right)")


@dataclass
class AttackResult:
    image: np.ndarray
    mask: np.ndarray  # 2x2-block grid, 1 where a block was modified
    region: tuple = field(default=(0, 0, 0, 0))  # (top, left, bottom, right) in pixels


def _up(x: float) -> int:
    return int(math.ceil(x / GRID - 1e-9)) * GRID


def _down(x: float) -> int:
    return int(math.floor(x / GRID + 1e-9)) * GRID


def region_rect(shape, spec: AttackSpec) -> tuple[int, int, int, int]:
    """Attacked rectangle, snapped outward to the 2x2 grid."""
    h, w = shape[:2]
    r = spec.rate
    if spec.region == "rect":
        t, l, b, rr = spec.rect
        if not (0 <= t <= b <= h and 0 <= l <= rr <= w):
            raise AttackError(f"rectangle {spec.rect} is outside the {h}x{w} image")
        return _down(t), _down(l), min(_up(b), h), min(_up(rr), w)
    if r == 0:
        return 0, 0, 0, 0
    if spec.region == "left_to_right":
        return 0, 0, h, min(_up(w * r), w)
    if spec.region == "up_to_bottom":
        return 0, 0, min(_up(h * r), h), w
    s = math.sqrt(r)
    rh, rw = min(_up(h * s), h), min(_up(w * s), w)
    top, left = _down((h - rh) / 2), _down((w - rw) / 2)
    return top, left, top + rh, left + rw


def changed_blocks(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    diff = np.asarray(a) != np.asarray(b)
    if diff.ndim == 3:
        diff = diff.any(axis=2)
    h, w = diff.shape
    return diff.reshape(h // GRID, GRID, w // GRID, GRID).any(axis=(1, 3)).astype(np.uint8)


def _offset(shape, rect, rng) -> tuple[int, int]:
    # a displacement, in whole 4x4 blocks, that moves the region well away
    h, w = shape[:2]
    t, l, b, r = rect
    dy = rng.integers(h // 4, 3 * h // 4 + 1) // SHIFT_STEP * SHIFT_STEP
    dx = rng.integers(w // 4, 3 * w // 4 + 1) // SHIFT_STEP * SHIFT_STEP
    return int(dy) % h, int(dx) % w


def apply_attack(img, spec: AttackSpec, donor=None) -> AttackResult:
    img = np.asarray(img)
    if img.shape[0] % GRID or img.shape[1] % GRID:
        raise AttackError("image dimensions must be even")
    if spec.kind in _NEEDS_DONOR:
        if donor is None:
            raise AttackError(f"{spec.kind} attack needs a donor image")
    if donor is not None:
        donor = np.asarray(donor)
        if donor.shape != img.shape or donor.dtype != img.dtype:
            raise AttackError(f"donor {donor.shape} does not match image {img.shape}")
    rng = np.random.default_rng(spec.rng_seed)
    rect = region_rect(img.shape, spec)
    t, l, b, r = rect
    out = img.copy()
    if b > t and r > l:
        sl = (slice(t, b), slice(l, r))
        if spec.kind == "splice":
            if donor is not None:
                out[sl] = donor[sl]
            else:
                out[sl] = rng.integers(0, 256, size=out[sl].shape, dtype=np.uint8)
        elif spec.kind == "collage":
            out[sl] = donor[sl]
        elif spec.kind in ("copy_move", "vector_quantization"):
            src = img if spec.kind == "copy_move" else donor
            dy, dx = _offset(img.shape, rect, rng)
            moved = np.roll(src, (dy, dx), axis=(0, 1))
            out[sl] = moved[sl]
        else:  # protocol: donor MSBs, own 2 LSB planes
            out[sl] = (donor[sl] & 0xFC) | (img[sl] & 0x03)
    return AttackResult(out, changed_blocks(img, out), rect)
