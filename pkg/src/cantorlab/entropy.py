"""Block and empirical entropy, path sampling, ergodicity and shift-invariance diagnostics (base-2 logs)."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb

import numpy as np

from . import rng
from .errors import DepthExceeded, NullCylinder, SupportViolation
from .interval import IntervalValue, as_interval, is_zero, log2_interval, to_float
from .measures import (MAX_DEPTH, Bernoulli, Dirac, Markov, MeasureSpec, Renewal, RenewalCompanion, Uniform,
                       support, support_with_mass)
from .renewal import RenewalConstants, renewal_expectation_terms


def log2_rational(q: Fraction) -> float:
    """log2 of a positive rational of any size: math.log2 works on the integer parts separately."""
    q = Fraction(q)
    if q <= 0:
        raise ValueError("log2 of a non-positive number")
    return math.log2(q.numerator) - math.log2(q.denominator)


def _log2_mass(m) -> float:
    return log2_rational(m) if not hasattr(m, "lo") else log2_rational(m.mid)


def _as_markov(spec: MeasureSpec) -> Markov | None:
    if isinstance(spec, Markov):
        return spec
    if isinstance(spec, Uniform):
        h = Fraction(1, 2)
        return Markov((h, h), ((h, h), (h, h)))
    if isinstance(spec, Bernoulli):
        p = spec.p
        return Markov((p, 1 - p), ((p, 1 - p), (p, 1 - p)))
    return None


def _h(row) -> float:
    return -sum(float(p) * log2_rational(p) for p in row if p)


def block_entropy(spec: MeasureSpec, n: int) -> float:
    """H_n(ρ) = −(1/n) Σ_{|w|=n} ρ[w] log2 ρ[w], with 0 log 0 = 0."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if isinstance(spec, (Uniform, Bernoulli)):
        p = Fraction(1, 2) if isinstance(spec, Uniform) else spec.p
        total = 0.0
        terms = []
        for z in range(n + 1):
            mass = p ** z * (1 - p) ** (n - z)
            if mass:
                terms.append(-comb(n, z) * float(mass) * log2_rational(mass))
        total = math.fsum(terms)
        return total / n
    mk = _as_markov(spec)
    if mk is not None:
        # chain rule: n H_n = H(X_0) + Σ_t Σ_a P(X_{t-1} = a) H(T_a)
        dist = list(mk.initial)
        terms = [_h(dist)]
        rows = [_h(r) for r in mk.transition]
        for _ in range(n - 1):
            terms += [float(dist[a]) * rows[a] for a in (0, 1)]
            dist = [sum(dist[a] * mk.transition[a][b] for a in (0, 1)) for b in (0, 1)]
        return math.fsum(terms) / n
    if n > MAX_DEPTH:
        raise DepthExceeded(f"block entropy at n={n} needs enumeration beyond {MAX_DEPTH}")
    terms = [-to_float(m) * _log2_mass(m) for _, m in support_with_mass(spec, n)]
    return math.fsum(terms) / n


@dataclass
class EntropyReport:
    block_entropies: list  # (n, H_n)
    basis: str = "log2"

    @property
    def estimate(self) -> float:
        """min over computed H_n: an upper bound on the entropy, not its limit."""
        return min(h for _, h in self.block_entropies)


def entropy_report(spec: MeasureSpec, max_n: int) -> EntropyReport:
    return EntropyReport([(n, block_entropy(spec, n)) for n in range(1, max_n + 1)])


def empirical_entropy(spec: MeasureSpec, prefix: str) -> float:
    """h_n^ρ(Z) = −(1/n) log2 ρ[Z↾n] with n = |prefix|."""
    n = len(prefix)
    if n == 0:
        raise ValueError("prefix must be nonempty")
    if isinstance(spec, (Uniform, Bernoulli)):
        p = Fraction(1, 2) if isinstance(spec, Uniform) else spec.p
        z = prefix.count("0")
        if (z and p == 0) or (n - z and p == 1):
            raise NullCylinder(f"ρ[{prefix[:16]}...] = 0")
        total = (z * log2_rational(p) if z else 0.0) + ((n - z) * log2_rational(1 - p) if n - z else 0.0)
        return -total / n
    m = spec.mass(prefix)
    if is_zero(m):
        raise NullCylinder(f"ρ[{prefix}] = 0")
    return -_log2_mass(m) / n


def empirical_entropy_interval(spec: MeasureSpec, prefix: str) -> IntervalValue:
    m = spec.mass(prefix)
    if is_zero(m):
        raise NullCylinder(f"ρ[{prefix}] = 0")
    return -log2_interval(m) / len(prefix)


def _h_interval(rho_x, n: int) -> IntervalValue:
    return -log2_interval(rho_x) / n


def expected_empirical(mu: MeasureSpec, rho: MeasureSpec, n: int, s: float | None = None):
    """(E_μ h_n^ρ, E_μ |h_n^ρ − s|) as intervals; ``s`` defaults to min_{k≤n} H_k(ρ)."""
    if s is None:
        s = min(block_entropy(rho, k) for k in range(1, n + 1))
    s_q = Fraction(s)
    if isinstance(mu, RenewalCompanion) and isinstance(rho, Renewal) and mu.truncation == rho.truncation \
            and not mu.normalized and n >= 3:
        pairs = [(m, r) for _, m, r in renewal_expectation_terms(rho.truncation, n)]
    else:
        pairs = []
        for x, m in support_with_mass(mu, n):
            r = rho.mass(x)
            if is_zero(r):
                raise SupportViolation(f"μ[{x}] > 0 but ρ[{x}] = 0")
            pairs.append((m, r))
    e = IntervalValue.point(0)
    d = IntervalValue.point(0)
    for m, r in pairs:
        h = _h_interval(r, n)
        e = e + as_interval(m) * h
        d = d + as_interval(m) * abs(h - s_q)
    return e, d


@dataclass
class DivergenceRow:
    k: int
    n: int
    expectation: IntervalValue
    lower_target: float  # k^2 / (n b)


@dataclass
class DivergenceReport:
    rows: list
    b: float
    constant: float  # smallest C with E ≥ k²/(n b) − C on every row
    increasing: bool
    max_width: Fraction


def renewal_divergence(truncation: int = 4, ks=range(2, 6)) -> DivergenceReport:
    """E_μ h_n^ρ at n = k + 2 for the unnormalised renewal companion μ."""
    consts = RenewalConstants(truncation)
    b = float(consts.b.mid)
    rows = []
    mu, rho = RenewalCompanion(truncation), Renewal(truncation)
    for k in ks:
        n = k + 2
        e, _ = expected_empirical(mu, rho, n, s=0.0)
        rows.append(DivergenceRow(k, n, e, k * k / (n * b)))
    const = max(r.lower_target - float(r.expectation.lo) for r in rows)
    inc = all(a.expectation.hi < c.expectation.lo for a, c in zip(rows, rows[1:]))
    width = max(r.expectation.width for r in rows)
    return DivergenceReport(rows, b, const, inc, width)


# ---------------------------------------------------------------------------
# sampling paths


def _bernoulli_path(p: Fraction, n: int, seed: int, path: int) -> str:
    k = rng.keyed_uniform53_np(seed, rng.STREAM_PATH, path, np.arange(n, dtype=np.uint64))
    # u < p  ⇔  k < p·2^53  ⇔  k < ceil(p·2^53)
    threshold = -((-p.numerator * rng.TWO53) // p.denominator)
    bits = np.where(k < np.uint64(threshold), "0", "1")
    return "".join(bits.tolist())


def sample_path(spec: MeasureSpec, n: int, seed: int, path: int = 0) -> str:
    """Draw Z↾n bit by bit: bit i is 0 iff keyed u_i < ρ[σ0]/ρ[σ], compared exactly."""
    if isinstance(spec, (Uniform, Bernoulli)):
        return _bernoulli_path(Fraction(1, 2) if isinstance(spec, Uniform) else spec.p, n, seed, path)
    if isinstance(spec, Dirac):
        return spec.seq.prefix(n)
    out = []
    sigma = ""
    for i in range(n):
        q = spec.cond_zero(sigma)
        if q is None:
            whole = spec.mass(sigma)
            if is_zero(whole):
                raise NullCylinder(f"path reached a null cylinder at {sigma!r}")
            q = as_interval(spec.mass(sigma + "0")) / as_interval(whole)
        u = rng.keyed_uniform(seed, rng.STREAM_PATH, path, i)
        if isinstance(q, IntervalValue):
            # the enclosure only matters when u falls inside it; then the midpoint decides
            bit = "0" if u < q.lo or (u < q.hi and u < q.mid) else "1"
        else:
            bit = "0" if u < q else "1"
        sigma += bit
        out.append(bit)
    return "".join(out)


def mean_empirical_entropy(spec: MeasureSpec, n: int, paths: int, seed: int) -> float:
    return math.fsum(empirical_entropy(spec, sample_path(spec, n, seed, j)) for j in range(paths)) / paths


# ---------------------------------------------------------------------------
# ergodicity and shift invariance


def _mat_pow(T, e: int):
    R = ((Fraction(1), Fraction(0)), (Fraction(0), Fraction(1)))
    B = T
    while e:
        if e & 1:
            R = tuple(tuple(sum(R[i][k] * B[k][j] for k in (0, 1)) for j in (0, 1)) for i in (0, 1))
        B = tuple(tuple(sum(B[i][k] * B[k][j] for k in (0, 1)) for j in (0, 1)) for i in (0, 1))
        e >>= 1
    return R


def _merge(u: str, v: str, k: int) -> str | None:
    """The string of length max(|u|, k+|v|) with u at 0 and v at k, if consistent and gap-free."""
    w = list(u) + ["?"] * max(0, k + len(v) - len(u))
    for i, ch in enumerate(v):
        if w[k + i] == "?":
            w[k + i] = ch
        elif w[k + i] != ch:
            return None
    return "".join(w)


def correlation_term(spec: MeasureSpec, u: str, v: str, k: int):
    """ρ([u] ∩ T^{-k}[v])."""
    mk = _as_markov(spec)
    if k >= len(u) and u and mk is not None:
        gap = k - len(u)
        step = _mat_pow(mk.transition, gap + 1)[int(u[-1])][int(v[0])]
        tail = Fraction(1)
        for a, b in zip(v, v[1:]):
            tail *= mk.transition[int(a)][int(b)]
        return mk.mass(u) * step * tail
    length = max(len(u), k + len(v))
    if length > MAX_DEPTH:
        raise DepthExceeded(f"correlation at shift {k} needs depth {length} > {MAX_DEPTH}")
    if k < len(u):
        w = _merge(u, v, k)
        return Fraction(0) if w is None else spec.mass(w)
    # free bits between u and v: enumerate only the live part of the tree
    total = Fraction(0)
    for mid in support(_Localized(spec, u), k - len(u)) if k > len(u) else [""]:
        total = total + spec.mass(u + mid + v)
    return total


@dataclass(frozen=True)
class _Localized(MeasureSpec):
    """Conditional view ρ[u·σ] used only to prune the free middle bits."""

    base: MeasureSpec
    head: str

    def mass(self, sigma):
        return self.base.mass(self.head + sigma)


def ergodicity_probe(spec: MeasureSpec, u: str, v: str, N: int):
    """Cesàro average (1/N) Σ_{k<N} ρ([u] ∩ T^{-k}[v]) and the target ρ[u]ρ[v]."""
    if N < 1:
        raise ValueError("N must be >= 1")
    if _as_markov(spec) is None and len(u) + N + len(v) > MAX_DEPTH:
        raise DepthExceeded(f"|u| + N + |v| = {len(u) + N + len(v)} exceeds the depth ceiling {MAX_DEPTH}")
    terms = [correlation_term(spec, u, v, k) for k in range(N)]
    avg = sum(terms, Fraction(0)) / N
    return avg, spec.mass(u) * spec.mass(v)


@dataclass
class ShiftReport:
    depth: int
    checked: int
    exact: bool  # every identity held with exact rationals
    max_residual: Fraction  # upper bound on |ρ[σ] − ρ[0σ] − ρ[1σ]|
    max_width: Fraction  # widest enclosure involved
    failures: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures


def shift_invariance_check(spec: MeasureSpec, depth: int) -> ShiftReport:
    """Check ρ[σ] = ρ[0σ] + ρ[1σ] for every |σ| ≤ depth − 1."""
    if depth > MAX_DEPTH:
        raise DepthExceeded(f"depth {depth} exceeds {MAX_DEPTH}")
    checked = 0
    exact = True
    worst = Fraction(0)
    widest = Fraction(0)
    failures = []
    level = [""]
    for d in range(depth):
        for s in level:
            lhs = spec.mass(s)
            a0, a1 = spec.mass("0" + s), spec.mass("1" + s)
            rhs = as_interval(a0) + a1 if isinstance(a0, IntervalValue) or isinstance(a1, IntervalValue) else a0 + a1
            checked += 1
            if isinstance(lhs, IntervalValue) or isinstance(rhs, IntervalValue):
                exact = False
                a, b = as_interval(lhs), as_interval(rhs)
                widest = max(widest, a.width, b.width)
                worst = max(worst, abs(a - b).hi)
                if not a.overlaps(b):
                    failures.append(s)
            elif lhs != rhs:
                exact = False
                worst = max(worst, abs(lhs - rhs))
                failures.append(s)
        level = [s + b for s in level for b in "01"]
    return ShiftReport(depth, checked, exact, worst, widest, failures)
