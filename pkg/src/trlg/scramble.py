"""Digest dispersal: chaotic shuffles and fixed block reorderings.

Grid coordinates are split as ``r = a*H/2 + b*H/4 + e`` (half ``a``, quarter
within the half ``b``, offset ``e``) and likewise ``c = a'*W/2 + b'*W/4 + e'``.
Every fixed reordering is a separable involution built from these pieces:

============== ====================================== ===============================
map            rows                                   columns
============== ====================================== ===============================
shift_aside    flip ``a``                             flip ``a'`` and ``b'``
mirror_aside   flip ``a`` and ``b``                   flip ``b'``, reverse ``e'``
partner 1      reverse inside each half               flip ``a'`` and ``b'``
partner 2      flip ``a`` and ``b``                   flip ``b'``
============== ====================================== ===============================

The chaotic shuffles permute records only inside each of the 16 sub-quadrants,
so a record's copies always land in the quarters chosen by the fixed maps:
copy 1 diagonally opposite, copy 2 and the second halftone copy in the
vertically opposite quarter and the first halftone copy in the horizontally
opposite one.
"""

from __future__ import annotations

import numpy as np

from .chaos import CcsKey, ccs_sequence
from .errors import DimensionError


def _check(shape, m: int = 4):
    h, w = shape[:2]
    if h % m or w % m:
        raise DimensionError(f"grid {h}x{w} must have both dimensions divisible by {m}")


def _parts(n: int):
    r = np.arange(n)
    half, quarter = n // 2, n // 4
    return r // half, (r // quarter) % 2, r % quarter, r % half


def _axis_map(n: int, kind: str) -> np.ndarray:
    a, b, e, loc = _parts(n)
    h, q = n // 2, n // 4
    if kind == "flip_a":
        return (1 - a) * h + loc
    if kind == "flip_ab":
        return (1 - a) * h + (1 - b) * q + e
    if kind == "flip_b":
        return a * h + (1 - b) * q + e
    if kind == "flip_b_rev_e":
        return a * h + (1 - b) * q + (q - 1 - e)
    if kind == "rev_half":
        return a * h + (h - 1 - loc)
    raise ValueError(kind)


_MAPS = {
    "shift_aside": ("flip_a", "flip_ab"),
    "mirror_aside": ("flip_ab", "flip_b_rev_e"),
    "partner_block_1": ("rev_half", "flip_ab"),
    "partner_block_2": ("flip_ab", "flip_b"),
}


def position_map(name: str, shape) -> tuple[np.ndarray, np.ndarray]:
    """Row and column index maps of a fixed reordering: ``out[rm[i], cm[j]] = in[i, j]``."""
    _check(shape)
    rk, ck = _MAPS[name]
    return _axis_map(shape[0], rk), _axis_map(shape[1], ck)


def _apply(name: str, grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid)
    rm, cm = position_map(name, grid.shape)
    out = np.empty_like(grid)
    out[np.ix_(rm, cm)] = grid
    return out


def shift_aside(grid):
    return _apply("shift_aside", grid)


def mirror_aside(grid):
    return _apply("mirror_aside", grid)


def partner_block_1(grid):
    return _apply("partner_block_1", grid)


def partner_block_2(grid):
    return _apply("partner_block_2", grid)


# all four are involutions
inverse_shift_aside = shift_aside
inverse_mirror_aside = mirror_aside
inverse_partner_block_1 = partner_block_1
inverse_partner_block_2 = partner_block_2


SHUFFLE_SPLIT = 4  # shuffles stay inside each of SPLIT x SPLIT regions


def region_ids(shape, split: int = SHUFFLE_SPLIT) -> np.ndarray:
    """Shuffle-region index (row-major) of every grid position."""
    h, w = shape[:2]
    _check((h, w))
    ri = np.arange(h) // (h // split)
    ci = np.arange(w) // (w // split)
    return (ri[:, None] * split + ci[None, :]).ravel()


def shuffle_order(shape, key: CcsKey) -> np.ndarray:
    """Source index of every slot: ``shuffled.flat[i] = grid.flat[order[i]]``.

    Inside each sub-quadrant the k-th slot in raster order receives the
    position holding the k-th smallest chaotic value (ties by position).
    """
    h, w = shape[:2]
    seq = ccs_sequence(key, h * w)
    region = region_ids((h, w))
    by_value = np.lexsort((np.arange(h * w), seq, region))
    slots = np.argsort(region, kind="stable")
    order = np.empty(h * w, dtype=np.int64)
    order[slots] = by_value
    return order


def shuffle_grid(grid, key: CcsKey, order=None):
    grid = np.asarray(grid)
    order = shuffle_order(grid.shape, key) if order is None else order
    flat = grid.reshape(-1, *grid.shape[2:])
    return flat[order].reshape(grid.shape)


def unshuffle_grid(grid, key: CcsKey, order=None):
    grid = np.asarray(grid)
    order = shuffle_order(grid.shape, key) if order is None else order
    flat = grid.reshape(-1, *grid.shape[2:])
    out = np.empty_like(flat)
    out[order] = flat
    return out.reshape(grid.shape)


def shuffle_digest(d, key: CcsKey):
    """Shuffle every field of a :class:`~trlg.digest.PrimaryDigest` with one permutation."""
    order = shuffle_order(d.shape, key)
    return d.map_fields(lambda a: shuffle_grid(a, key, order))


def unshuffle_digest(d, key: CcsKey):
    order = shuffle_order(d.shape, key)
    return d.map_fields(lambda a: unshuffle_grid(a, key, order))


def primary_carriers(shape, key1: CcsKey, key2: CcsKey):
    """Flat carrier index of both primary copies for every source record."""
    h, w = shape
    n = h * w
    out = []
    for key, name in ((key1, "shift_aside"), (key2, "mirror_aside")):
        idx = np.arange(n).reshape(h, w)
        placed = _apply(name, shuffle_grid(idx, key))
        car = np.empty(n, dtype=np.int64)
        car[placed.ravel()] = np.arange(n)
        out.append(car.reshape(h, w))
    return out[0], out[1]


def quarter_of(r, c, shape) -> np.ndarray:
    h, w = shape
    return (np.asarray(r) // (h // 2)) * 2 + np.asarray(c) // (w // 2)
