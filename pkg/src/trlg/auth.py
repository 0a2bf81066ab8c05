"""Per-2x2-block authentication bit.

For a block payload ``phi`` (the 17 primary bits a 2x2 block carries over
three planes, 5 for gray) the bit is ``delta ^ xi``:

* ``delta`` = parity of ``phi`` xor the parity of the binary string formed by
  ``gamma_i = zeta_i ^ zeta_{i-1}``, where ``zeta`` lists the 1-based positions
  of the set bits of ``phi`` and ``zeta_0 = 0``;
* ``xi`` folds every halftone bit of both secondary copies by xor.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

PHI_LENGTHS = (5, 17)


def _gamma_parity(bits) -> int:
    zeta = [i + 1 for i, b in enumerate(bits) if b]
    prev = 0
    ones = 0
    for z in zeta:
        g = z ^ prev
        ones += bin(g).count("1")
        prev = z
    return ones & 1


def compute_auth_bit(phi_bits, s1, s2) -> int:
    """Reference (scalar) evaluation for one block."""
    phi = [int(b) for b in np.asarray(phi_bits, dtype=np.uint8).ravel()]
    if len(phi) not in PHI_LENGTHS:
        raise ValueError(f"phi must hold {PHI_LENGTHS[0]} or {PHI_LENGTHS[1]} bits, got {len(phi)}")
    delta = (sum(phi) & 1) ^ _gamma_parity(phi)
    xi = 0
    for b in np.concatenate([np.atleast_1d(s1), np.atleast_1d(s2)]).astype(np.uint8):
        xi ^= int(b) & 1
    return delta ^ xi


@lru_cache(maxsize=2)
def delta_table(n: int) -> np.ndarray:
    """``delta`` for every n-bit payload, indexed by its MSB-first value.

    The gamma parities telescope: only the last set index survives, so the
    term equals the popcount parity of the highest 1-based set position.
    """
    v = np.arange(1 << n, dtype=np.int64)
    pop = np.zeros_like(v)
    last = np.zeros_like(v)
    for i in range(n):
        bit = (v >> (n - 1 - i)) & 1
        pop += bit
        last = np.where(bit == 1, i + 1, last)
    lastpop = np.zeros_like(v)
    t = last.copy()
    while t.any():
        lastpop += t & 1
        t >>= 1
    table = ((pop & 1) ^ (lastpop & 1)).astype(np.uint8)
    table.flags.writeable = False
    return table


def bits_to_values(bits: np.ndarray) -> np.ndarray:
    """MSB-first integer value along the last axis."""
    bits = np.asarray(bits, dtype=np.int64)
    n = bits.shape[-1]
    return bits @ (1 << np.arange(n - 1, -1, -1, dtype=np.int64))


def compute_auth_grid(phi: np.ndarray, sec1, sec2) -> np.ndarray:
    """Authentication bits for a grid of blocks.

    ``phi`` has shape (M/2, N/2, 17 or 5); ``sec1``/``sec2`` are sequences of
    (M/2, N/2) halftone planes as carried by each block.
    """
    phi = np.asarray(phi, dtype=np.uint8)
    n = phi.shape[-1]
    if n not in PHI_LENGTHS:
        raise ValueError(f"phi must hold {PHI_LENGTHS[0]} or {PHI_LENGTHS[1]} bits, got {n}")
    delta = delta_table(n)[bits_to_values(phi)]
    xi = np.zeros(phi.shape[:-1], dtype=np.uint8)
    for p in list(sec1) + list(sec2):
        xi ^= np.asarray(p, dtype=np.uint8) & 1
    return delta ^ xi
