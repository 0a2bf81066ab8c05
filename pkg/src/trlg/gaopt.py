"""Binary genetic algorithm and the two TRLG search problems.

The engine uses roulette-wheel selection, single-point crossover, bit-flip
mutation and elitism.  Fitness values are cached per chromosome and may be
evaluated on a thread pool; results are merged by population index, so the
outcome depends only on the seed.
"""

from __future__ import annotations

import csv
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import digest as dg
from .imagecore import pad_to_multiple, planes
from .metrics import PEAK, ssim

THRESHOLD_MAX = 64.0


@dataclass(frozen=True)
class GaConfig:
    population: int = 32
    generations: int = 50
    crossover_rate: float = 0.8
    mutation_rate: float = 0.02
    elitism: int = 2
    rng_seed: int = 0
    chromosome_bits: int = 8
    threads: int = 1

    def __post_init__(self):
        if self.population < 2:
            raise ValueError("population must be >= 2")
        if not (0.0 <= self.crossover_rate <= 1.0 and 0.0 <= self.mutation_rate <= 1.0):
            raise ValueError("rates must lie in [0, 1]")
        if not 0 <= self.elitism < self.population:
            raise ValueError("elitism must be in [0, population)")
        if self.chromosome_bits < 1 or self.generations < 0:
            raise ValueError("bad chromosome length or generation count")

    def with_(self, **kw) -> GaConfig:
        return replace(self, **kw)


@dataclass
class GaResult:
    best: np.ndarray
    fitness: float
    trace: list = field(default_factory=list)  # (generation, best_ever, mean)
    evaluations: int = 0

    def write_trace(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["generation", "best_fitness", "mean_fitness"])
            for row in self.trace:
                w.writerow(row)


def bits_to_int(bits) -> int:
    v = 0
    for b in np.asarray(bits, dtype=np.uint8):
        v = (v << 1) | int(b)
    return v


def int_to_bits(v: int, n: int) -> np.ndarray:
    return np.array([(v >> (n - 1 - i)) & 1 for i in range(n)], dtype=np.uint8)


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("TRLG_THREADS", "1")))
    except ValueError:
        return 1


def _roulette_weights(fit: np.ndarray) -> np.ndarray:
    f = np.array(fit, dtype=np.float64)
    finite = np.isfinite(f)
    if np.any(f == math.inf):
        w = (f == math.inf).astype(np.float64)
    else:
        lo = f[finite].min() if finite.any() else 0.0
        w = np.where(finite, f - lo, 0.0)
        span = w.max()
        # a small floor keeps every finite chromosome selectable
        w = w + (span * 0.01 if span > 0 else 1.0) * finite
    if w.sum() <= 0:
        w = np.ones_like(w)
    return w / w.sum()


def ga_optimize(fitness, cfg: GaConfig, seeds=None, threads: int | None = None) -> GaResult:
    """Maximize ``fitness`` (bit array -> float) over fixed-length chromosomes.

    ``seeds`` are chromosomes injected into the initial population.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    n, pop_size = cfg.chromosome_bits, cfg.population
    pop = rng.integers(0, 2, size=(pop_size, n), dtype=np.uint8)
    for i, s in enumerate(seeds or []):
        if i >= pop_size:
            break
        pop[i] = np.asarray(s, dtype=np.uint8)
    cache: dict[bytes, float] = {}
    threads = cfg.threads if threads is None else threads
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None

    def evaluate(p):
        keys = [row.tobytes() for row in p]
        todo = list(dict.fromkeys(k for k in keys if k not in cache))
        if todo:
            arrs = [np.frombuffer(k, dtype=np.uint8) for k in todo]
            vals = list(pool.map(fitness, arrs)) if pool else [fitness(a) for a in arrs]
            for k, v in zip(todo, vals):
                cache[k] = float(v)
        return np.array([cache[k] for k in keys])

    try:
        fit = evaluate(pop)
        order = np.argsort(-fit, kind="stable")
        best, best_fit = pop[order[0]].copy(), float(fit[order[0]])
        trace = [(0, best_fit, float(np.mean(fit[np.isfinite(fit)])) if np.isfinite(fit).any() else best_fit)]
        for gen in range(1, cfg.generations + 1):
            order = np.argsort(-fit, kind="stable")
            nxt = [pop[i].copy() for i in order[: cfg.elitism]]
            probs = _roulette_weights(fit)
            while len(nxt) < pop_size:
                a, b = rng.choice(pop_size, size=2, p=probs)
                c1, c2 = pop[a].copy(), pop[b].copy()
                if n > 1 and rng.random() < cfg.crossover_rate:
                    cut = int(rng.integers(1, n))
                    c1[cut:], c2[cut:] = pop[b][cut:], pop[a][cut:]
                for c in (c1, c2):
                    flip = rng.random(n) < cfg.mutation_rate
                    c[flip] ^= 1
                    if len(nxt) < pop_size:
                        nxt.append(c)
            pop = np.array(nxt, dtype=np.uint8)
            fit = evaluate(pop)
            i = int(np.argmax(fit))
            if fit[i] > best_fit:
                best, best_fit = pop[i].copy(), float(fit[i])
            finite = fit[np.isfinite(fit)]
            trace.append((gen, best_fit, float(finite.mean()) if finite.size else best_fit))
    finally:
        if pool:
            pool.shutdown()
    return GaResult(best, best_fit, trace, len(cache))


# -- texture thresholds -----------------------------------------------------


def decode_threshold(bits, max_value: float = THRESHOLD_MAX) -> float:
    n = len(bits)
    return bits_to_int(bits) * max_value / (2**n - 1)


class ThresholdProblem:
    """SSIM fitness of one 128x128 tile as a function of its threshold.

    The digest and its reconstruction are compared at digest resolution (the
    half-size luminance).  Blocks only switch between two precomputed
    reconstructions, so each texture pattern costs one SSIM evaluation.
    Inputs that are not a whole number of tiles are edge-padded; the extra
    thresholds are cropped away when the grid is expanded over the blocks.
    """

    def __init__(self, y: np.ndarray, tile: int = dg.TILE):
        y, _ = pad_to_multiple(np.asarray(y), tile)
        self.tile = tile
        self.std = dg.block_std_map(y)
        self.bands = dg.luminance_bands(y)
        self.half = dg.resize(y, 0.5).astype(np.float64)
        shape = self.std.shape
        rec = {}
        for g in (0, 1):
            m = dg.mask_coefficients(self.bands, np.full(shape, g, dtype=np.uint8))
            d = dg.PrimaryDigest(np.full(shape, g, dtype=np.uint8), m["ll"], m["lh"], m["hl"], m["hh"])
            rec[g] = np.floor(dg.reconstruct_luminance(d) + 0.5)
        self.rec = rec
        self._cache: dict = {}

    @property
    def grid_shape(self):
        return (self.std.shape[0] * 4 // self.tile, self.std.shape[1] * 4 // self.tile)

    def tile_fitness(self, ti: int, tj: int, threshold: float) -> float:
        tb = self.tile // 4
        std = self.std[ti * tb : (ti + 1) * tb, tj * tb : (tj + 1) * tb]
        gamma = threshold < std
        key = (ti, tj, gamma.tobytes())
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        th = self.tile // 2
        sl = (slice(ti * th, (ti + 1) * th), slice(tj * th, (tj + 1) * th))
        g2 = np.repeat(np.repeat(gamma, 2, axis=0), 2, axis=1)
        rec = np.where(g2, self.rec[1][sl], self.rec[0][sl])
        val = ssim(self.half[sl], rec)
        self._cache[key] = val
        return val


def optimize_thresholds(y: np.ndarray, cfg: GaConfig | None = None, traces: list | None = None) -> np.ndarray:
    """One GA-selected texture threshold in [0, 64] per 128x128 tile of ``y``."""
    cfg = cfg or GaConfig()
    prob = ThresholdProblem(y)
    gh, gw = prob.grid_shape
    out = np.zeros((gh, gw))
    for ti in range(gh):
        for tj in range(gw):
            c = cfg.with_(rng_seed=cfg.rng_seed + ti * gw + tj)

            def fit(bits, ti=ti, tj=tj):
                return prob.tile_fitness(ti, tj, decode_threshold(bits))

            res = ga_optimize(fit, c)
            out[ti, tj] = decode_threshold(res.best)
            if traces is not None:
                traces.append(((ti, tj), res))
    return out


# -- key 7 ---------------------------------------------------------------------


class Key7Problem:
    """PSNR of the watermarked image as a function of the per-plane key bytes.

    PSNR only depends on the summed squared error, which separates over
    planes; each (plane, key byte) error is computed once on demand.
    """

    def __init__(self, host, words, embed_plane):
        """``embed_plane(plane_index, host_plane, words_plane) -> watermarked plane``."""
        self.host = [np.asarray(p) for p in planes(np.asarray(host))]
        self.words = words
        self.embed_plane = embed_plane
        self.count = sum(p.size for p in self.host)
        self._sse: dict = {}

    def plane_sse(self, k: int, key: int) -> float:
        hit = self._sse.get((k, key))
        if hit is None:
            w = self.embed_plane(k, self.host[k], self.words[k] ^ np.uint8(key))
            d = w.astype(np.int64) - self.host[k].astype(np.int64)
            hit = float((d * d).sum())
            self._sse[(k, key)] = hit
        return hit

    def psnr(self, key: bytes) -> float:
        sse = sum(self.plane_sse(k, b) for k, b in enumerate(key))
        if sse == 0:
            return math.inf
        return 10.0 * math.log10(PEAK * PEAK * self.count / sse)

    def fitness(self, bits) -> float:
        bits = np.asarray(bits, dtype=np.uint8)
        key = bytes(bits_to_int(bits[8 * k : 8 * k + 8]) for k in range(len(self.host)))
        return self.psnr(key)


def optimize_key7(host, words, embed_plane, cfg: GaConfig | None = None, trace: list | None = None) -> bytes:
    """GA-search one XOR byte per plane maximizing PSNR of the embedded image.

    ``words`` is the list of per-plane (M/2, N/2) uint8 watermark grids after
    encryption and permutation; the all-zero key is always in the first
    population.
    """
    prob = Key7Problem(host, words, embed_plane)
    nbits = 8 * len(prob.host)
    cfg = (cfg or GaConfig()).with_(chromosome_bits=nbits)
    res = ga_optimize(prob.fitness, cfg, seeds=[np.zeros(nbits, dtype=np.uint8)])
    if trace is not None:
        trace.append(res)
    return bytes(bits_to_int(res.best[8 * k : 8 * k + 8]) for k in range(len(prob.host)))

