"""The stick-breaking distribution on measures: exact samples, Monte Carlo estimates, and the v_n recursion.

Each node σ of a sample splits its mass with X_{σ0} = u·X_σ, where
u = k / 2^53 and k is keyed by (seed, sampler stream, sample index, heap(σ)).
Single samples are built in exact rationals; Monte Carlo runs use the same
draws in float64, vectorised over blocks of sample indices.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable

import numpy as np

from . import rng
from .bits import minimal_cover
from .errors import DepthExceeded, QuadratureNonConvergent
from .measures import DyadicMeasure
from .randomness import CountLevel, TestFamily

MAX_SAMPLER_DEPTH = 16
CHUNK = 1 << 14


@dataclass(frozen=True)
class SamplerConfig:
    seed: int
    depth: int
    sample_count: int = 1

    def __post_init__(self):
        if not 0 <= self.depth <= MAX_SAMPLER_DEPTH:
            raise DepthExceeded(f"sampler depth must be at most {MAX_SAMPLER_DEPTH}")
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")


def sample_measure(cfg: SamplerConfig, index: int) -> DyadicMeasure:
    """Exact depth-d sample; every X_σ is a dyadic rational."""
    if not 0 <= index < cfg.sample_count:
        raise IndexError("sample index out of range")
    table = {"": Fraction(1)}
    level = [""]
    for _ in range(cfg.depth):
        nxt = []
        for s in level:
            u = rng.keyed_uniform(cfg.seed, rng.STREAM_SAMPLER, index, rng.heap_index(s))
            left = table[s] * u
            table[s + "0"] = left
            table[s + "1"] = table[s] - left
            nxt += [s + "0", s + "1"]
        level = nxt
    return DyadicMeasure(cfg.depth, table)


def _block(cfg: SamplerConfig, start: int, stop: int) -> np.ndarray:
    """Float masses in heap order (column h holds X_σ with heap(σ) = h) for samples [start, stop)."""
    idx = np.arange(start, stop, dtype=np.uint64)[:, None]
    width = 1 << (cfg.depth + 1)
    X = np.zeros((stop - start, width), dtype=np.float64)
    X[:, 1] = 1.0
    for d in range(cfg.depth):
        parents = np.arange(1 << d, 1 << (d + 1), dtype=np.uint64)
        k = rng.keyed_uniform53_np(cfg.seed, rng.STREAM_SAMPLER, idx, parents[None, :])
        u = k.astype(np.float64) / float(rng.TWO53)
        p = parents.astype(np.int64)
        left = X[:, p] * u
        X[:, 2 * p] = left
        X[:, 2 * p + 1] = X[:, p] - left
    return X


def _chunks(n: int) -> list[tuple[int, int]]:
    return [(a, min(a + CHUNK, n)) for a in range(0, n, CHUNK)]


def _per_sample(cfg: SamplerConfig, fn, threads: int = 1) -> np.ndarray:
    """Apply ``fn`` to every block and concatenate; results do not depend on ``threads``."""
    jobs = _chunks(cfg.sample_count)
    if threads <= 1:
        parts = [fn(_block(cfg, a, b)) for a, b in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            parts = list(ex.map(lambda ab: fn(_block(cfg, *ab)), jobs))
    return np.concatenate(parts)


def _set_columns(G: Iterable[str], depth: int) -> list[int]:
    cols = []
    for s in minimal_cover(G):
        if len(s) > depth:
            raise DepthExceeded(f"{s!r} is deeper than the sampler depth {depth}")
        cols.append(rng.heap_index(s))
    return cols


def set_masses(cfg: SamplerConfig, G: Iterable[str], threads: int = 1) -> np.ndarray:
    """μ(G) for every sample in the stream."""
    cols = _set_columns(G, cfg.depth)
    return _per_sample(cfg, lambda X: X[:, cols].sum(axis=1) if cols else np.zeros(len(X)), threads)


def mean_and_se(values: np.ndarray) -> tuple[float, float]:
    """Exactly rounded mean (order independent) and its standard error."""
    n = len(values)
    mean = math.fsum(values.tolist()) / n
    if n < 2:
        return mean, 0.0
    var = math.fsum(((values - mean) ** 2).tolist()) / (n - 1)
    return mean, math.sqrt(var / n)


def mc_expectation(cfg: SamplerConfig, G: Iterable[str], threads: int = 1) -> tuple[float, float]:
    return mean_and_se(set_masses(cfg, G, threads))


def cylinder_means(cfg: SamplerConfig, max_len: int, threads: int = 1) -> dict[str, tuple[float, float]]:
    """(mean, SE) of X_σ for every |σ| ≤ max_len, from one pass over the stream."""
    if max_len > cfg.depth:
        raise DepthExceeded("max_len exceeds the sampler depth")
    width = 1 << (max_len + 1)
    X = _per_sample(cfg, lambda B: B[:, :width], threads)
    out = {}
    for h in range(1, width):
        sigma = bin(h)[3:]
        out[sigma] = mean_and_se(X[:, h])
    return out


@dataclass
class FailingFraction:
    fraction: float
    bound: float
    se: float

    @property
    def violated(self) -> bool:
        return self.fraction > self.bound + 3 * self.se


def failing_fraction(cfg: SamplerConfig, test: TestFamily, m: int, cutoff: int, delta: Fraction,
                     threads: int = 1) -> FailingFraction:
    """Share of sampled μ with μ(G_m^{≤cutoff}) ≥ δ, next to the Markov bound 2^{-m}/δ."""
    if test.kind != "ML":
        raise ValueError("failing_fraction needs a Martin-Löf test")
    level = test.level(m, cutoff)
    if any(isinstance(g, CountLevel) for g in level):
        raise DepthExceeded("count levels are not supported by the sampler")
    masses = set_masses(cfg, [s for s in level if len(s) <= cutoff], threads)
    delta = Fraction(delta)
    d = float(delta)
    if Fraction(d) == delta:
        hits = (masses >= d).astype(np.float64)
    else:
        hits = np.array([Fraction(v) >= delta for v in masses.tolist()], dtype=np.float64)
    frac, se = mean_and_se(hits)
    return FailingFraction(frac, float(Fraction(1, 1 << m) / delta), se)


# ---------------------------------------------------------------------------
# v_n(x) = P(X_σ ≤ x) for |σ| = n


def _cumulative_integral(f: np.ndarray, h: float) -> np.ndarray:
    """∫_0^{s_i} f on a uniform grid, Simpson on even prefixes and a closing 3/8 panel on odd ones."""
    n = len(f)
    out = np.zeros(n)
    if n < 3:
        raise ValueError("need at least two panels")
    out[1] = h / 12 * (5 * f[0] + 8 * f[1] - f[2])
    even = np.zeros(n)
    for i in range(2, n, 2):
        even[i] = even[i - 2] + h / 3 * (f[i - 2] + 4 * f[i - 1] + f[i])
        out[i] = even[i]
    for i in range(3, n, 2):
        out[i] = even[i - 3] + 3 * h / 8 * (f[i - 3] + 3 * f[i - 2] + 3 * f[i - 1] + f[i])
    return out


@lru_cache(maxsize=256)
def _v_on_grid(n: int, x: float, panels: int) -> float:
    """Iterate the recursion in the variable s = −ln y.

    With g_n(s) = v_n(e^{-s}) e^{s} it reads g_1 = 1, g_{n+1}(s) = 1 + ∫_0^s g_n,
    so each step is one cumulative quadrature on the fixed grid over [0, −ln x].
    """
    S = -math.log(x)
    h = S / panels
    g = np.ones(panels + 1)
    for _ in range(n - 1):
        g = 1.0 + _cumulative_integral(g, h)
    return x * g[-1]


@dataclass
class VValue:
    value: float
    error: float
    panels: int


def v_recursion_detail(n: int, x: float, panels: int = 64, tol: float = 1e-6) -> VValue:
    if n < 1:
        raise ValueError("n must be >= 1")
    if panels < 4 or panels & (panels - 1):
        raise ValueError("panels must be a power of two >= 4")
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must lie in [0, 1]")
    if x == 0.0 or x == 1.0 or n == 1:
        return VValue(float(x), 0.0, panels)
    coarse = _v_on_grid(n, x, panels)
    fine = _v_on_grid(n, x, 2 * panels)
    if abs(fine - coarse) > tol:
        raise QuadratureNonConvergent(f"v_{n}({x}) moved by {abs(fine - coarse):.3g} between {panels} and {2 * panels} panels")
    return VValue(fine, abs(fine - coarse), 2 * panels)


def v_recursion(n: int, x: float, panels: int = 64) -> float:
    return v_recursion_detail(n, x, panels).value


def ks_distance_to_v(samples: np.ndarray, n: int, grid: int = 1024) -> float:
    """Kolmogorov–Smirnov distance between the empirical law of ``samples`` and v_n.

    v_n is evaluated by the recursion on a uniform x-grid and interpolated
    linearly; it is monotone and smooth away from 0, so the interpolation
    error is far below sampling noise.
    """
    xg = np.linspace(0.0, 1.0, grid + 1)
    vg = np.array([v_recursion(n, float(x)) for x in xg])
    xs = np.sort(np.clip(samples, 0.0, 1.0))
    m = len(xs)
    cdf = np.interp(xs, xg, vg)
    hi = np.arange(1, m + 1) / m - cdf
    lo = cdf - np.arange(0, m) / m
    return float(max(hi.max(), lo.max()))
