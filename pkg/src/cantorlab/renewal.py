"""Stationary binary renewal process with gap law p_k = 2^{-k^4}/c, and its companion measure.

Notation used below (all sums over k >= 1)::

    c   = sum 2^{-k^4}                 normaliser of the gap law
    S   = sum k 2^{-k^4}               so that b = sum k p_k = S / c
    N_j = sum_{k>=j} 2^{-k^4}          so that T_j = sum_{k>=j} p_k = N_j / c
    W_m = sum_{k>=m} (k-m+1) 2^{-k^4}

After a 1 the process emits k zeros and then a 1 with probability p_k, so
the distance between consecutive 1s is k + 1 and its mean is B = 1 + b.
Stationarity forces rho[Z_0 = 1] = 1/B (not 1/b). The first 1 sits at
position j with probability T_{max(j,1)} / B, which is the usual stationary
law "tail of the inter-arrival distribution over its mean". With
S' = S + c, a cylinder x of length n with ones at i_1 < ... < i_r has

    rho[x] = N_{max(i_1,1)} * prod_t 2^{-g_t^4} * N_{max(1, n-1-i_r)} / (S' c^r)

where g_t = i_{t+1} - i_t - 1 must be >= 1, and rho[0^n] = W_n / S'.
Every constant is an enclosure built from a partial sum plus the tail bound
"at most twice the first omitted term", valid because consecutive terms at
least halve.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .errors import MalformedSpec, TruncationTooSmall
from .interval import IntervalValue, is_zero, pi_squared_over_6

WIDTH_LIMIT = Fraction(1, 1 << 64)


def _term(k: int) -> Fraction:
    return Fraction(1, 1 << (k ** 4))


@lru_cache(maxsize=None)
def _tail_sum(start: int, weight_shift: int | None, truncation: int) -> IntervalValue:
    """sum_{k>=start} w(k) 2^{-k^4}, with w(k) = 1 (weight_shift None) or k - weight_shift."""
    def w(k):
        return 1 if weight_shift is None else k - weight_shift

    last = max(truncation, start)
    s = sum((w(k) * _term(k) for k in range(start, last + 1)), Fraction(0))
    tail = 2 * w(last + 1) * _term(last + 1)
    return IntervalValue(s, s + tail)


@dataclass(frozen=True)
class RenewalConstants:
    truncation: int

    def __post_init__(self):
        if self.truncation < 2:
            raise MalformedSpec("renewal truncation must be >= 2")

    @property
    def c(self) -> IntervalValue:
        return _tail_sum(1, None, self.truncation)

    @property
    def S(self) -> IntervalValue:
        return _tail_sum(1, 0, self.truncation)

    @property
    def b(self) -> IntervalValue:
        """Mean zero-run length sum k p_k."""
        return self.S / self.c

    @property
    def S_prime(self) -> IntervalValue:
        return self.S + self.c

    @property
    def B(self) -> IntervalValue:
        """Mean inter-arrival time 1 + b; rho[1] = 1/B."""
        return self.S_prime / self.c

    def N(self, j: int) -> IntervalValue:
        return _tail_sum(max(j, 1), None, self.truncation)

    def W(self, m: int) -> IntervalValue:
        return _tail_sum(m, m - 1, self.truncation)

    def p(self, k: int) -> IntervalValue:
        return _term(k) / self.c


def renewal_mass(consts: RenewalConstants, x: str):
    n = len(x)
    if n == 0:
        return Fraction(1)
    ones = [i for i, ch in enumerate(x) if ch == "1"]
    if not ones:
        return consts.W(n) / consts.S_prime
    num = consts.N(max(ones[0], 1))
    exact = Fraction(1)
    for a, b in zip(ones, ones[1:]):
        g = b - a - 1
        if g < 1:
            return Fraction(0)
        exact *= _term(g)
    num = num * exact * consts.N(max(1, n - 1 - ones[-1]))
    den = consts.S_prime
    c = consts.c
    for _ in ones:
        den = den * c
    return num / den


def _leading_gap(x: str) -> int | None:
    """k when x extends v_k = 1 0^k 1, otherwise None."""
    if not x.startswith("1"):
        return None
    j = x.find("1", 1)
    if j < 0:
        return None
    k = j - 1
    return k if k >= 1 else None


@lru_cache(maxsize=None)
def zeta2_tail(m: int) -> IntervalValue:
    """sum_{k >= m} k^{-2} for m >= 1."""
    head = sum((Fraction(1, k * k) for k in range(1, m)), Fraction(0))
    return pi_squared_over_6() - head


def companion_mass(consts: RenewalConstants, x: str, normalized: bool = False):
    """The measure d mu = f d rho with f = k^{-2}/p_k on [v_k]; mu[v_k] = k^{-2}/B."""
    b = consts.B
    if x == "":
        val = zeta2_tail(1) / b
    elif x.startswith("1") and "1" not in x[1:]:
        val = zeta2_tail(max(1, len(x) - 1)) / b
    else:
        k = _leading_gap(x)
        if k is None:
            return Fraction(0)
        rho = renewal_mass(consts, x)
        if is_zero(rho):
            return Fraction(0)
        val = Fraction(1, k * k) * consts.c * (1 << (k ** 4)) * rho
    if normalized:
        val = val / (zeta2_tail(1) / b)
    return val


def companion_total(consts: RenewalConstants) -> IntervalValue:
    return zeta2_tail(1) / consts.B


def renewal_expectation_terms(truncation: int, n: int):
    """Length-n cylinders charged by the companion measure, with (mu[x], rho[x]) enclosures.

    These are the extensions of some v_k (k <= n - 2) with rho[x] > 0, plus
    the single prefix 1 0^{n-1} of every longer v_k.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    consts = RenewalConstants(truncation)
    out = []
    for k in range(1, n - 1):
        head = "1" + "0" * k + "1"
        for tail in _renewal_support(consts, head, n - len(head)):
            x = head + tail
            out.append((x, companion_mass(consts, x), renewal_mass(consts, x)))
    x = "1" + "0" * (n - 1)
    out.append((x, companion_mass(consts, x), renewal_mass(consts, x)))
    for x, mu, rho in out:
        for v in (mu, rho):
            if isinstance(v, IntervalValue) and v.width > WIDTH_LIMIT:
                raise TruncationTooSmall(f"width of {x} exceeds 2^-64; raise the truncation")
    out.sort(key=lambda t: t[0])
    return out


def _renewal_support(consts: RenewalConstants, head: str, extra: int):
    tails = [""]
    for _ in range(extra):
        nxt = []
        for t in tails:
            for bit in "01":
                if not is_zero(renewal_mass(consts, head + t + bit)):
                    nxt.append(t + bit)
        tails = nxt
    return tails
