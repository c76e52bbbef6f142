"""Average initial-segment complexity of measures and the diagnostics built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import CoverageGap, TailUncertifiable
from .interval import IntervalValue, as_interval
from .machine import ComplexityTable, Lab, MachineKind
from .measures import MAX_DEPTH, MeasureSpec, slow_growth_checkpoint, slow_growth_weight, support_with_mass

KINDS = ("C", "K", "C|n")

# A trend flag is raised when the normalised deficit stays at or below this
# over the top quarter of the computed range.
TREND_THRESHOLD = Fraction(1, 2)


def _lookup(lab: Lab | ComplexityTable, kind: str):
    if isinstance(lab, ComplexityTable):
        expected = MachineKind.PREFIX_FREE if kind == "K" else MachineKind.PLAIN
        if lab.kind != expected:
            raise ValueError(f"kind {kind} needs a {expected.value} table")
        table = lab
    elif kind == "K":
        table = lab.prefix
    elif kind in ("C", "C|n"):
        table = lab.plain
    else:
        raise ValueError(f"unknown complexity kind {kind!r}")
    if kind == "C|n":
        return lambda x: table.cond_value(x, "n")
    return table.value


def avg_complexity(spec: MeasureSpec, n: int, lab: Lab | ComplexityTable, kind: str = "K") -> IntervalValue:
    """Σ_{|x|=n} value(x) μ[x] over the support of μ at length n."""
    if n > MAX_DEPTH:
        raise TailUncertifiable(f"support enumeration at n={n} exceeds the depth ceiling")
    value = _lookup(lab, kind)
    total = IntervalValue.point(0)
    for x, m in support_with_mass(spec, n):
        total = total + as_interval(m) * value(x)
    return total


def length_complexity(lab: Lab, kind: str, n: int) -> int:
    """K(n), C(n) or C(n|n), each read off the string 0^n."""
    return _lookup(lab, kind)("0" * n)


@dataclass
class DeficiencyRow:
    n: int
    k_mu: IntervalValue
    c_mu: IntervalValue
    k_n: int
    c_n: int
    max_k: int

    @property
    def k_triviality(self) -> IntervalValue:
        return self.k_mu - self.k_n

    @property
    def c_triviality(self) -> IntervalValue:
        return self.c_mu - self.c_n

    @property
    def k_growth(self) -> IntervalValue:
        return (self.n + self.k_n) - self.k_mu

    @property
    def c_growth(self) -> IntervalValue:
        return self.n - self.c_mu

    @property
    def triviality_ratio(self) -> Fraction:
        span = self.max_k - self.k_n
        return self.k_triviality.hi / span if span else Fraction(0)

    @property
    def growth_ratio(self) -> Fraction:
        return self.k_growth.hi / self.n if self.n else Fraction(0)


@dataclass
class DeficiencyProfile:
    rows: list[DeficiencyRow]
    triviality_trend: bool = False
    maximal_growth_trend: bool = False

    def max_k_triviality(self) -> Fraction:
        return max(r.k_triviality.hi for r in self.rows)

    def max_k_growth(self) -> Fraction:
        return max(r.k_growth.hi for r in self.rows)


def _top_window(rows: list[DeficiencyRow]) -> list[DeficiencyRow]:
    # small n is dominated by the machine's fixed overhead, so only the top quarter counts
    width = max(2, math.ceil((len(rows) - 1) / 4))
    return [r for r in rows[-width:] if r.n >= 1]


def growth_and_triviality_profile(spec: MeasureSpec, max_n: int, lab: Lab) -> DeficiencyProfile:
    """All four deficits per n, with trend flags.

    A finite range cannot show boundedness, so the flags compare deficits
    against the room the machine leaves at each n: triviality when
    K(μ↾n) − K(n) is at most half of max_{|x|=n} K(x) − K(n), maximal growth
    when n + K(n) − K(μ↾n) is at most n/2, both over the top quarter of the range.
    """
    rows = []
    for n in range(max_n + 1):
        rows.append(DeficiencyRow(
            n=n,
            k_mu=avg_complexity(spec, n, lab, "K"),
            c_mu=avg_complexity(spec, n, lab, "C"),
            k_n=lab.prefix.length_value(n),
            c_n=lab.plain.length_value(n),
            max_k=lab.prefix.max_value(n),
        ))
    upper = _top_window(rows)
    return DeficiencyProfile(
        rows,
        triviality_trend=bool(upper) and all(r.triviality_ratio <= TREND_THRESHOLD for r in upper),
        maximal_growth_trend=bool(upper) and all(r.growth_ratio <= TREND_THRESHOLD for r in upper),
    )


@dataclass
class DimensionRow:
    n: int
    c_rate: IntervalValue
    k_rate: IntervalValue


def dimension_profile(spec: MeasureSpec, max_n: int, lab: Lab) -> list[DimensionRow]:
    out = []
    for n in range(1, max_n + 1):
        out.append(DimensionRow(n, avg_complexity(spec, n, lab, "C") / n, avg_complexity(spec, n, lab, "K") / n))
    return out


@dataclass
class InequalityReport:
    compare_rows: list = field(default_factory=list)  # (label, n, lhs, rhs)
    compare_constant: Fraction = Fraction(0)
    upgrade_rows: list = field(default_factory=list)  # (x, lhs, rhs)
    upgrade_constant: int = 0


def inequality_suite(specs, max_n: int, lab: Lab, upgrade: bool = True) -> InequalityReport:
    """Smallest additive constants for n − C(μ↾n) ≤ 2(n + K(n) − K(μ↾n)) + c and K(x | n, C(n)) ≤ 2(C(x) − C(n)) + c.

    ``specs`` is a list of measures or of (label, measure) pairs.
    """
    rep = InequalityReport()
    worst = None
    for i, item in enumerate(specs):
        label, spec = item if isinstance(item, tuple) else (f"m{i}", item)
        for n in range(max_n + 1):
            lhs = n - avg_complexity(spec, n, lab, "C")
            rhs = 2 * ((n + lab.prefix.length_value(n)) - avg_complexity(spec, n, lab, "K"))
            rep.compare_rows.append((label, n, lhs, rhs))
            gap = lhs.hi - rhs.lo
            worst = gap if worst is None else max(worst, gap)
    rep.compare_constant = worst if worst is not None else Fraction(0)
    if upgrade:
        uw = None
        for x in sorted(lab.plain.values, key=lambda s: (len(s), s)):
            n = len(x)
            if n > max_n:
                break
            try:
                lhs = lab.prefix.cond_value(x, "(n, C(n))")
            except CoverageGap:
                continue
            rhs = 2 * (lab.plain.value(x) - lab.plain.length_value(n))
            rep.upgrade_rows.append((x, lhs, rhs))
            uw = lhs - rhs if uw is None else max(uw, lhs - rhs)
        if uw is None:
            raise CoverageGap("no conditional values for the (n, C(n)) condition")
        rep.upgrade_constant = uw
    return rep


@dataclass
class EnvelopeRow:
    k: int
    n: int
    weight: Fraction  # c_{k+1}
    bound: float  # (1 − c_{k+1}) n + 2 log2 n
    target: float  # n − √n
    holds: bool


def slow_growth_envelope(max_k: int) -> list[EnvelopeRow]:
    """Check (1 − c_{k+1}) n_k + 2 log2 n_k ≤ n_k − √n_k exactly at each checkpoint n_k = 2^{k+4}.

    Rearranged as √n ≤ c_{k+1} n − 2 log2 n; with log2 n = k + 4 the right side
    is rational, so squaring decides the comparison without rounding.
    """
    rows = []
    for k in range(max_k + 1):
        n = slow_growth_checkpoint(k)
        c = slow_growth_weight(k + 1)
        log_n = k + 4
        room = c * n - 2 * log_n
        holds = room >= 0 and room * room >= n
        rows.append(EnvelopeRow(k, n, c, float((1 - c) * n + 2 * log_n), n - math.sqrt(n), holds))
    return rows


def first_envelope_checkpoint(limit: int = 64) -> int | None:
    """Smallest k from which the envelope holds at every later checkpoint up to ``limit``."""
    rows = slow_growth_envelope(limit)
    for i in range(len(rows)):
        if all(r.holds for r in rows[i:]):
            return rows[i].k
    return None
