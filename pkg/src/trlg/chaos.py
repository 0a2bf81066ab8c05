"""Chaotic key streams: Logistic and Chebyshev-Chebyshev (CCS) maps.

CCS iterates ``x <- frac(cos((mu + 1) * arccos(x)) * 2**k)`` using the
deterministic kernels in :mod:`trlg.detmath`.  Every consumer turns the real
stream into integers with ``floor(x * 1e14) mod m`` (:func:`derive_integers`)
or into a permutation by stable argsort (:func:`permutation_from_sequence`).
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from functools import lru_cache
from pathlib import Path

import numpy as np

from . import detmath
from .errors import KeyValidationError

BURN_IN = 1000
FIXED_POINT_WINDOW = 64
KEY_NAMES = ("key1", "key2", "key3", "key4", "key5", "key6")


def logistic_next(x: float, mu: float) -> float:
    if not 0.0 <= x <= 1.0:
        raise ValueError(f"logistic state {x} outside [0, 1]")
    if not 0.0 < mu <= 4.0:
        raise ValueError(f"logistic control {mu} outside (0, 4]")
    return mu * x * (1.0 - x)


@dataclass(frozen=True)
class CcsKey:
    x0: float
    mu: float
    k: int

    def __post_init__(self):
        if not -1.0 < self.x0 < 1.0:
            raise KeyValidationError(f"x0={self.x0!r} must lie strictly inside (-1, 1)")
        if not 0.0 < self.mu <= 10.0:
            raise KeyValidationError(f"mu={self.mu!r} must lie in (0, 10]")
        if isinstance(self.k, bool) or int(self.k) != self.k or not 8 <= self.k <= 20:
            raise KeyValidationError(f"k={self.k!r} must be an integer in [8, 20]")
        object.__setattr__(self, "k", int(self.k))


def ccs_step(x: float, mu: float, k: int) -> float:
    g = detmath.cos((mu + 1.0) * detmath.acos(x))
    t = g * float(2**k)
    return t - math.floor(t)


@lru_cache(maxsize=64)
def _ccs_cached(x0: float, mu: float, k: int, n: int, burn_in: int) -> np.ndarray:
    x = x0
    for i in range(burn_in):
        nxt = ccs_step(x, mu, k)
        if i < FIXED_POINT_WINDOW and nxt == x:
            raise KeyValidationError(f"CCS orbit of x0={x0!r} hits a fixed point at step {i}")
        x = nxt
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        nxt = ccs_step(x, mu, k)
        if burn_in + i < FIXED_POINT_WINDOW and nxt == x:
            raise KeyValidationError(f"CCS orbit of x0={x0!r} hits a fixed point")
        x = nxt
        out[i] = x
    out.flags.writeable = False
    return out


def ccs_sequence(key: CcsKey, n: int, burn_in: int = BURN_IN) -> np.ndarray:
    """Return ``n`` CCS outputs in [0, 1) after discarding ``burn_in`` iterates.

    The returned array is shared between callers and is read-only.
    """
    if n < 1:
        raise ValueError("sequence length must be >= 1")
    return _ccs_cached(float(key.x0), float(key.mu), int(key.k), int(n), int(burn_in))


def permutation_from_sequence(seq) -> np.ndarray:
    """0-based ascending argsort; ties keep their original order."""
    seq = np.asarray(seq, dtype=np.float64)
    if seq.size == 0:
        raise ValueError("empty sequence")
    return np.argsort(seq, kind="stable")


def derive_integers(seq, modulus: int, offset: int = 0) -> np.ndarray:
    """``(floor(x * 1e14) mod modulus) + offset`` elementwise, in exact integers."""
    if modulus < 1:
        raise ValueError("modulus must be >= 1")
    scaled = np.floor(np.asarray(seq, dtype=np.float64) * 1e14).astype(np.int64)
    return np.mod(scaled, modulus) + offset


def simple_mapping(k: int = 13, n: int = 8) -> np.ndarray:
    """0-based bijection from ``chi_i = (chi_{i-1} * k mod n) + 1`` with ``chi_0 = n``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    chi = n
    out = []
    for _ in range(n):
        chi = (chi * k) % n + 1
        out.append(chi - 1)
    perm = np.array(out, dtype=np.int64)
    if len(set(out)) != n:
        raise KeyValidationError(f"mapping (k={k}, n={n}) is not a bijection")
    return perm


@dataclass(frozen=True)
class KeyChain:
    key1: CcsKey
    key2: CcsKey
    key3: CcsKey
    key4: CcsKey
    key5: CcsKey
    key6: CcsKey
    key7: bytes | None = field(default=None)

    def with_key7(self, key7: bytes) -> KeyChain:
        return replace(self, key7=bytes(key7))

    def require_key7(self, planes: int) -> bytes:
        if self.key7 is None:
            raise KeyValidationError("key chain has no key7; embed the image first")
        if len(self.key7) != planes:
            raise KeyValidationError(
                f"key7 has {len(self.key7) * 8} bits but the image needs {planes * 8}"
            )
        return self.key7


def generate_keychain(seed: int | None = None) -> KeyChain:
    rng = np.random.default_rng(seed)
    keys = []
    while len(keys) < len(KEY_NAMES):
        x0 = float(rng.uniform(-1.0, 1.0))
        mu = float(rng.uniform(0.0, 10.0))
        k = int(rng.integers(8, 21))
        if not -1.0 < x0 < 1.0 or mu <= 0.0:
            continue
        key = CcsKey(x0, mu, k)
        try:
            ccs_sequence(key, 1)
        except KeyValidationError:
            continue
        keys.append(key)
    return KeyChain(*keys)


def write_keyfile(path, chain: KeyChain) -> None:
    lines = ["# TRLG key file"]
    for name in KEY_NAMES:
        key = getattr(chain, name)
        lines.append(f"{name} = {key.x0:.17g}, {key.mu:.17g}, {key.k:d}")
    if chain.key7 is not None:
        lines.append(f"key7 = {chain.key7.hex()}")
    Path(path).write_text("\n".join(lines) + "\n")


_LINE = re.compile(r"^\s*(\w+)\s*=\s*(.*?)\s*$")


def read_keyfile(path) -> KeyChain:
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        m = _LINE.match(line)
        if not m:
            raise KeyValidationError(f"{path}:{lineno}: expected 'name = value'")
        values[m.group(1)] = m.group(2)
    keys = []
    for name in KEY_NAMES:
        if name not in values:
            raise KeyValidationError(f"{path}: missing {name}")
        parts = [p.strip() for p in values[name].split(",")]
        if len(parts) != 3:
            raise KeyValidationError(f"{path}: {name} needs 'x0, mu, k'")
        try:
            keys.append(CcsKey(float(parts[0]), float(parts[1]), int(parts[2])))
        except ValueError as exc:
            raise KeyValidationError(f"{path}: bad {name}: {exc}") from None
    key7 = None
    if "key7" in values:
        try:
            key7 = bytes.fromhex(values["key7"])
        except ValueError:
            raise KeyValidationError(f"{path}: key7 is not hexadecimal") from None
        if len(key7) not in (1, 3):
            raise KeyValidationError(f"{path}: key7 must be 8 or 24 bits")
    return KeyChain(*keys, key7=key7)
