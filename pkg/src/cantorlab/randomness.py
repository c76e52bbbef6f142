"""Finite-resolution Martin-Löf, Solovay and strong Solovay tests evaluated against measures."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Callable, Sequence

from .bits import llex_key, minimal_cover
from .errors import DepthExceeded, MalformedSpec, MassBoundViolated
from .interval import IntervalValue, as_interval, is_zero
from .machine import ComplexityTable, Lab, MachineKind
from .measures import Bernoulli, Convex, Markov, MeasureSpec, Uniform, support
from .inseg import avg_complexity

ENUMERATION_LIMIT = 24


@dataclass(frozen=True)
class CountLevel:
    """All strings of one length whose number of zeros lies in ``zero_counts``."""

    length: int
    zero_counts: frozenset

    def contains(self, x: str) -> bool:
        return len(x) == self.length and x.count("0") in self.zero_counts


Level = list  # of bit strings, or [CountLevel]


@dataclass
class TestFamily:
    """A test known only through its stage-t enumerations G_m^t.

    ``generator(m, t)`` must be a pure function whose output at t is a prefix
    of its output at t + 1. Strings are listed in length-then-lexicographic order.
    """

    name: str
    kind: str  # "ML" or "Solovay"
    generator: Callable[[int, int], Level]
    mass_bound: Callable[[int], Fraction]

    def level(self, m: int, cutoff: int) -> Level:
        return self.generator(m, cutoff)


def _binomial_mass(p0: Fraction, n: int, counts) -> Fraction:
    return sum((comb(n, c) * p0 ** c * (1 - p0) ** (n - c) for c in counts), Fraction(0))


def _markov_count_mass(mk: Markov, lvl: CountLevel) -> Fraction:
    if lvl.length == 0:
        return Fraction(1) if 0 in lvl.zero_counts else Fraction(0)
    # dist[(last bit, zeros so far)]
    dist = {(0, 1): mk.initial[0], (1, 0): mk.initial[1]}
    for _ in range(lvl.length - 1):
        nxt: dict = {}
        for (a, z), p in dist.items():
            for b in (0, 1):
                q = p * mk.transition[a][b]
                if q:
                    key = (b, z + (b == 0))
                    nxt[key] = nxt.get(key, Fraction(0)) + q
        dist = nxt
    return sum((p for (_, z), p in dist.items() if z in lvl.zero_counts), Fraction(0))


def _count_level_mass(spec: MeasureSpec, lvl: CountLevel):
    if isinstance(spec, Uniform):
        return _binomial_mass(Fraction(1, 2), lvl.length, lvl.zero_counts)
    if isinstance(spec, Bernoulli):
        return _binomial_mass(spec.p, lvl.length, lvl.zero_counts)
    if isinstance(spec, Markov):
        return _markov_count_mass(spec, lvl)
    if isinstance(spec, Convex):
        total = Fraction(0)
        for w, m in spec.terms:
            total = total + w * _count_level_mass(m, lvl)
        return total
    if lvl.length > ENUMERATION_LIMIT:
        raise DepthExceeded(f"count level of length {lvl.length} needs enumeration beyond {ENUMERATION_LIMIT}")
    total = Fraction(0)
    for x in support(spec, lvl.length):
        if lvl.contains(x):
            total = total + spec.mass(x)
    return total


def clopen_mass(spec: MeasureSpec, level: Level, n: int | None = None):
    """μ-mass of the open set generated by the level's strings of length ≤ n, covered cylinders removed."""
    counts = [g for g in level if isinstance(g, CountLevel)]
    strings = [g for g in level if isinstance(g, str)]
    if counts and strings:
        raise MalformedSpec("a level mixes explicit strings and count descriptions")
    if counts:
        return sum((_count_level_mass(spec, c) for c in counts if n is None or c.length <= n), Fraction(0))
    if n is not None:
        strings = [s for s in strings if len(s) <= n]
    total = Fraction(0)
    for s in minimal_cover(strings):
        total = total + spec.mass(s)
    return total


def truncated_mass(spec: MeasureSpec, test: TestFamily, m: int, n: int):
    """μ(G_m^{≤n}); exact for exact measures, an enclosure otherwise."""
    return clopen_mass(spec, test.level(m, n), n)


def check_mass_bounds(test: TestFamily, max_level: int, cutoff: int) -> None:
    lam = Uniform()
    total = Fraction(0)
    for m in range(1, max_level + 1):
        mass = truncated_mass(lam, test, m, cutoff)
        total += mass
        if test.kind == "ML" and mass > test.mass_bound(m):
            raise MassBoundViolated(f"{test.name}: level {m} has λ-mass {mass} > {test.mass_bound(m)}")
    if test.kind == "Solovay" and total > test.mass_bound(0):
        raise MassBoundViolated(f"{test.name}: total λ-mass {total} exceeds {test.mass_bound(0)}")


# ---------------------------------------------------------------------------
# verdicts


@dataclass
class Verdict:
    verdict: str  # "fails-at-level-δ", "mass-decayed-below", "inconclusive"
    masses: list
    resolution: dict
    epsilon: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "epsilon": None if self.epsilon is None else str(self.epsilon),
            "masses": [str(as_interval(v).lo) if as_interval(v).is_point else [str(as_interval(v).lo), str(as_interval(v).hi)]
                       for v in self.masses],
            "resolution": self.resolution,
        }


def pass_diagnostic(spec: MeasureSpec, test: TestFamily, max_level: int, cutoff: int,
                    delta: Fraction = Fraction(1, 2)) -> Verdict:
    """Classify μ against the first ``max_level`` levels at resolution ``cutoff``.

    Only the computed levels are inspected, so "mass-decayed-below" is a
    statement at this resolution, never a certificate of passing.
    """
    delta = Fraction(delta)
    if delta <= 0:
        raise ValueError("δ must be positive")
    masses = [truncated_mass(spec, test, m, cutoff) for m in range(1, max_level + 1)]
    stamp = {"test": test.name, "max_level": max_level, "cutoff": cutoff, "delta": str(delta)}
    eps = Fraction(1, 1 << max_level)
    if all(as_interval(v).lo >= delta for v in masses):
        return Verdict("fails-at-level-δ", masses, stamp)
    if min(as_interval(v).hi for v in masses) <= eps:
        return Verdict("mass-decayed-below", masses, stamp, eps)
    return Verdict("inconclusive", masses, stamp)


# ---------------------------------------------------------------------------
# test families


def family_from_strings(name: str, level_strings: Callable[[int], Sequence[str]], kind: str = "ML",
                        bound: Callable[[int], Fraction] | None = None) -> TestFamily:
    """A test whose level m is a fixed finite set, revealed in length order as the cutoff grows."""

    def gen(m, t):
        return sorted((s for s in level_strings(m) if len(s) <= t), key=llex_key)

    return TestFamily(name, kind, gen, bound or (lambda m: Fraction(1, 1 << m)))


def zeros_test() -> TestFamily:
    """G_m = [0^m]."""
    return family_from_strings("zeros", lambda m: ["0" * m])


def _deviating_counts(n: int, den: int) -> frozenset:
    # |c − n/2| > n/den  ⇔  |2·den·c − den·n| > 2n
    return frozenset(c for c in range(n + 1) if abs(2 * den * c - den * n) > 2 * n)


def lln_length(m: int, den: int = 8, limit: int = 1 << 14) -> int:
    """Smallest N with λ(zero count deviates from N/2 by more than N/den) ≤ 2^{-m}."""
    target = Fraction(1, 1 << m)
    for n in range(1, limit + 1):
        if _binomial_mass(Fraction(1, 2), n, _deviating_counts(n, den)) <= target:
            return n
    raise DepthExceeded(f"no length up to {limit} reaches λ-mass 2^-{m}")


def lln_test(den: int = 8) -> TestFamily:
    """Level m: strings of length N_m whose zero count is more than N_m/den away from N_m/2."""
    cache: dict[int, int] = {}

    def gen(m, t):
        if m not in cache:
            cache[m] = lln_length(m, den)
        n = cache[m]
        return [CountLevel(n, _deviating_counts(n, den))] if n <= t else []

    return TestFamily(f"lln-1/{den}", "ML", gen, lambda m: Fraction(1, 1 << m))


def levin_schnorr_family(table: ComplexityTable | Lab, check_levels: int = 0) -> TestFamily:
    """R_b: minimal strings x with K(x) < |x| − b, as far as the table can see.

    Strings missing from the table have K above the budget's program length,
    so for |x| − b beyond that bound the enumeration is complete.
    """
    if isinstance(table, Lab):
        table = table.prefix
    if table.kind != MachineKind.PREFIX_FREE:
        raise ValueError("the Levin-Schnorr family needs a prefix-free table")
    ordered = sorted(table.values, key=llex_key)

    def level_strings(b):
        return minimal_cover(x for x in ordered if table.values[x][0] < len(x) - b)

    fam = family_from_strings("levin-schnorr", level_strings)
    for b in range(1, check_levels + 1):
        mass = truncated_mass(Uniform(), fam, b, max(len(x) for x in ordered))
        if mass > Fraction(1, 1 << b):
            raise MassBoundViolated(f"R_{b} has λ-mass {mass} > 2^-{b}")
    return fam


def dump_levels(test: TestFamily, max_level: int, cutoff: int) -> str:
    """Text fixture: one "level<TAB>string" line per enumerated string."""
    lines = []
    for m in range(1, max_level + 1):
        for g in test.level(m, cutoff):
            if isinstance(g, CountLevel):
                lines.append(f"{m}\tcount:{g.length}:{','.join(map(str, sorted(g.zero_counts)))}")
            else:
                lines.append(f"{m}\t{g}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# strong Solovay tests and dips


@dataclass(frozen=True)
class StrongSolovayTest:
    blocks: tuple  # of (n_r, frozenset of strings of length n_r)

    def __post_init__(self):
        lengths = [n for n, _ in self.blocks]
        if any(a >= b for a, b in zip(lengths, lengths[1:])):
            raise MalformedSpec("block lengths must increase strictly")
        for n, xs in self.blocks:
            if any(len(x) != n for x in xs):
                raise MalformedSpec(f"block at n={n} has a string of another length")
        if self.lambda_mass() > Fraction(1, 2):
            raise MalformedSpec("total λ-mass exceeds 1/2")

    def lambda_mass(self) -> Fraction:
        return sum((Fraction(len(xs), 1 << n) for n, xs in self.blocks), Fraction(0))


def dyadic_exponent(mass: Fraction) -> int:
    """The f with 2^{-f} ≥ mass > 2^{-f-1}, for 0 < mass ≤ 1."""
    mass = Fraction(mass)
    if not 0 < mass <= 1:
        raise ValueError("mass must lie in (0, 1]")
    f = mass.denominator.bit_length() - mass.numerator.bit_length()
    # adjust the bit-length estimate to the exact bracket
    while Fraction(1, 1 << f) < mass:
        f -= 1
    while Fraction(1, 1 << (f + 1)) >= mass:
        f += 1
    return f


@dataclass
class DipRow:
    n: int
    mass: Fraction
    f: int
    c_cond: IntervalValue  # C(μ↾n | n)
    bound: Fraction  # n − δ f(n)

    @property
    def excess(self) -> Fraction:
        return self.c_cond.hi - self.bound


@dataclass
class DipReport:
    rows: list
    delta: Fraction
    f_series_sum: Fraction  # Σ_{n ≤ max n_r} 2^{-f(n)}
    constant: Fraction  # max excess
    fails_at_delta: bool


def dip_report(spec: MeasureSpec, sst: StrongSolovayTest, lab: Lab, delta: Fraction = Fraction(1, 2)) -> DipReport:
    delta = Fraction(delta)
    f: dict[int, int] = {}
    rows = []
    fails = True
    for n, xs in sst.blocks:
        mass = sum((as_interval(spec.mass(x)).lo for x in xs), Fraction(0))
        fails = fails and mass >= delta
        if mass > 0:
            f[n] = dyadic_exponent(mass)
        c_cond = avg_complexity(spec, n, lab, "C|n")
        rows.append(DipRow(n, mass, f.get(n, n), c_cond, n - delta * f.get(n, n)))
    top = max((n for n, _ in sst.blocks), default=0)
    series = sum((Fraction(1, 1 << f.get(m, m)) for m in range(1, top + 1)), Fraction(0))
    const = max((r.excess for r in rows), default=Fraction(0))
    return DipReport(rows, delta, series, const, fails)


def dip_fixture() -> tuple[MeasureSpec, StrongSolovayTest]:
    """¼ each of δ at 0^∞, 1^∞, (01)^∞, (10)^∞, against X_r = {0^{n_r}, 1^{n_r}} with n_r = 4, 6, 8."""
    from .measures import Dirac, EventuallyPeriodic

    q = Fraction(1, 4)
    mu = Convex(tuple((q, Dirac(EventuallyPeriodic("", p))) for p in ("0", "1", "01", "10")))
    sst = StrongSolovayTest(tuple((n, frozenset({"0" * n, "1" * n})) for n in (4, 6, 8)))
    return mu, sst
