"""Computable probability measures on Cantor space, evaluated exactly on cylinders.

A measure is an immutable spec object with a ``mass(sigma)`` method returning
``Fraction`` (or :class:`IntervalValue` for the renewal family). Nothing in
this module rounds.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Callable, Union

from . import rng
from .bits import check_bits, deinterleave, strings_of_length
from .errors import (
    DepthExceeded,
    InconsistentReduction,
    LocalizeOnNullCylinder,
    MalformedSpec,
    TailToleranceUnreachable,
)
from .interval import IntervalValue, is_zero
from .renewal import RenewalConstants, companion_mass, renewal_mass

Mass = Union[Fraction, IntervalValue]

MAX_DEPTH = 24


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x)
    return Fraction(x)


# ---------------------------------------------------------------------------
# sequences


@dataclass(frozen=True)
class EventuallyPeriodic:
    preamble: str
    period: str

    def __post_init__(self):
        check_bits(self.preamble)
        check_bits(self.period)
        if not self.period:
            raise MalformedSpec("period must be nonempty")

    def bit(self, i: int) -> str:
        if i < len(self.preamble):
            return self.preamble[i]
        return self.period[(i - len(self.preamble)) % len(self.period)]

    def prefix(self, n: int) -> str:
        return "".join(self.bit(i) for i in range(n))


@dataclass(frozen=True)
class PrefixThenPseudoRandom:
    """A fixed prefix followed by keyed pseudo-random bits.

    Stand-in for a Martin-Löf random sequence: bit ``i`` past the prefix is
    bit ``j % 64`` of ``keyed_u64(seed, STREAM_SEQUENCE, j // 64)`` with
    ``j = i - len(prefix)``. No randomness claim is made.
    """

    prefix_bits: str
    seed: int

    def __post_init__(self):
        check_bits(self.prefix_bits)

    def bit(self, i: int) -> str:
        if i < len(self.prefix_bits):
            return self.prefix_bits[i]
        j = i - len(self.prefix_bits)
        word = rng.keyed_u64(self.seed, rng.STREAM_SEQUENCE, j // 64)
        return "1" if (word >> (j % 64)) & 1 else "0"

    def prefix(self, n: int) -> str:
        return "".join(self.bit(i) for i in range(n))


SequenceSpec = Union[EventuallyPeriodic, PrefixThenPseudoRandom]


def zeros_seq() -> EventuallyPeriodic:
    return EventuallyPeriodic("", "0")


def ones_seq() -> EventuallyPeriodic:
    return EventuallyPeriodic("", "1")


# ---------------------------------------------------------------------------
# truth-table reductions


@dataclass(frozen=True)
class TTReduction:
    """A total reduction given by a use bound and, per output length n, a map
    from strings of length ``use(n)`` to strings of length n.

    Only named reductions are provided so that specs stay serialisable;
    ``params`` carries their integer arguments.
    """

    name: str
    params: tuple = ()

    def use(self, n: int) -> int:
        if self.name in ("identity", "bit_flip"):
            return n
        if self.name == "drop_first":
            return n + self.params[0]
        if self.name == "even_bits":
            return 2 * n
        if self.name == "xor_pairs":
            return 2 * n
        if self.name == "table":
            return _custom_use(self, n)
        raise MalformedSpec(f"unknown reduction {self.name!r}")

    def apply(self, n: int, y: str) -> str:
        if len(y) != self.use(n):
            raise ValueError("input length does not match the use bound")
        if self.name == "identity":
            return y
        if self.name == "bit_flip":
            return y.translate(str.maketrans("01", "10"))
        if self.name == "drop_first":
            return y[self.params[0]:]
        if self.name == "even_bits":
            return y[0::2]
        if self.name == "xor_pairs":
            return "".join("1" if y[2 * i] != y[2 * i + 1] else "0" for i in range(n))
        if self.name == "table":
            return _custom_apply(self, n, y)
        raise MalformedSpec(f"unknown reduction {self.name!r}")


# test hook: arbitrary (possibly inconsistent) tables registered by key
_CUSTOM: dict[str, tuple[Callable[[int], int], Callable[[int, str], str]]] = {}


def register_table_reduction(key: str, use: Callable[[int], int], table: Callable[[int, str], str]) -> TTReduction:
    _CUSTOM[key] = (use, table)
    return TTReduction("table", (key,))


def _custom_use(red: TTReduction, n: int) -> int:
    return _CUSTOM[red.params[0]][0](n)


def _custom_apply(red: TTReduction, n: int, y: str) -> str:
    return _CUSTOM[red.params[0]][1](n, y)


# ---------------------------------------------------------------------------
# measure variants


class MeasureSpec:
    """Base class; subclasses are frozen dataclasses implementing ``mass``."""

    def mass(self, sigma: str) -> Mass:  # pragma: no cover - abstract
        raise NotImplementedError

    def cond_zero(self, sigma: str) -> Fraction | None:
        """P(next bit is 0 | sigma) when cheaper than two mass evaluations."""
        return None


@dataclass(frozen=True)
class Uniform(MeasureSpec):
    def mass(self, sigma):
        return Fraction(1, 1 << len(sigma))

    def cond_zero(self, sigma):
        return Fraction(1, 2)


@dataclass(frozen=True)
class Bernoulli(MeasureSpec):
    """i.i.d. bits; ``p`` is the probability of a 0."""

    p: Fraction

    def __post_init__(self):
        object.__setattr__(self, "p", _frac(self.p))
        if not 0 <= self.p <= 1:
            raise MalformedSpec("Bernoulli p must lie in [0, 1]")

    def mass(self, sigma):
        z = sigma.count("0")
        return self.p ** z * (1 - self.p) ** (len(sigma) - z)

    def cond_zero(self, sigma):
        return self.p


@dataclass(frozen=True)
class Markov(MeasureSpec):
    """First-order chain; ``initial[a]`` = P(bit 0 = a), ``transition[a][b]`` = P(b | a)."""

    initial: tuple
    transition: tuple

    def __post_init__(self):
        ini = tuple(_frac(v) for v in self.initial)
        tr = tuple(tuple(_frac(v) for v in row) for row in self.transition)
        object.__setattr__(self, "initial", ini)
        object.__setattr__(self, "transition", tr)
        if len(ini) != 2 or sum(ini) != 1 or min(ini) < 0:
            raise MalformedSpec("Markov initial law must be a probability vector of length 2")
        if len(tr) != 2 or any(len(r) != 2 or sum(r) != 1 or min(r) < 0 for r in tr):
            raise MalformedSpec("Markov rows must be probability vectors")

    def mass(self, sigma):
        if not sigma:
            return Fraction(1)
        m = self.initial[int(sigma[0])]
        for a, b in zip(sigma, sigma[1:]):
            m *= self.transition[int(a)][int(b)]
        return m

    def cond_zero(self, sigma):
        if not sigma:
            return self.initial[0]
        return self.transition[int(sigma[-1])][0]

    def stationary(self) -> tuple[Fraction, Fraction]:
        a = self.transition[0][1]
        b = self.transition[1][0]
        if a + b == 0:
            return self.initial
        return (b / (a + b), a / (a + b))


@dataclass(frozen=True)
class Dirac(MeasureSpec):
    seq: SequenceSpec

    def mass(self, sigma):
        return Fraction(1) if self.seq.prefix(len(sigma)) == sigma else Fraction(0)

    def cond_zero(self, sigma):
        if self.seq.prefix(len(sigma)) != sigma:
            return None
        return Fraction(1) if self.seq.bit(len(sigma)) == "0" else Fraction(0)


@dataclass(frozen=True)
class Convex(MeasureSpec):
    """Finite convex combination; ``terms`` is a tuple of (weight, measure)."""

    terms: tuple

    def __post_init__(self):
        terms = tuple((w if isinstance(w, IntervalValue) else _frac(w), m) for w, m in self.terms)
        object.__setattr__(self, "terms", terms)
        if not terms:
            raise MalformedSpec("empty convex combination")
        total = Fraction(0)
        for w, _ in terms:
            if (w.lo if isinstance(w, IntervalValue) else w) <= 0:
                raise MalformedSpec("convex weights must be positive")
            total = total + w
        if isinstance(total, IntervalValue):
            if not total.contains(1):
                raise MalformedSpec("convex weights do not sum to 1")
        elif total != 1:
            raise MalformedSpec(f"convex weights sum to {total}, not 1")

    def mass(self, sigma):
        acc = Fraction(0)
        for w, m in self.terms:
            v = m.mass(sigma)
            if not is_zero(v):
                acc = acc + w * v
        return acc


@dataclass(frozen=True)
class Localize(MeasureSpec):
    """nu_at(A) = nu(A ∩ [at]) / nu[at]."""

    child: MeasureSpec
    at: str

    def __post_init__(self):
        check_bits(self.at)
        if is_zero(self.child.mass(self.at)):
            raise LocalizeOnNullCylinder(f"child measure of [{self.at}] is 0")

    def mass(self, sigma):
        if self.at.startswith(sigma):
            return Fraction(1)
        if sigma.startswith(self.at):
            return self.child.mass(sigma) / self.child.mass(self.at)
        return Fraction(0)


@dataclass(frozen=True)
class Product(MeasureSpec):
    """mu x nu transported by A, B -> A ⊕ B (even positions from ``left``)."""

    left: MeasureSpec
    right: MeasureSpec

    def mass(self, sigma):
        a, b = deinterleave(sigma)
        ma = self.left.mass(a)
        if is_zero(ma):
            return Fraction(0)
        return ma * self.right.mass(b)


@dataclass(frozen=True)
class Pushforward(MeasureSpec):
    """Image measure Γ(ν): mass(x) = ν{Y : Γ(Y) ≻ x}.

    Evaluated by depth-first search over the use prefixes y↾use(m), pruning
    every branch whose m-bit output disagrees with x↾m. Prefix consistency of
    the table is checked along the way.
    """

    red: TTReduction
    source: MeasureSpec

    def mass(self, sigma):
        n = len(sigma)
        if n == 0:
            return Fraction(1)
        return self._search(sigma, 1, "", "")

    def _search(self, x: str, m: int, y: str, prev_out: str):
        f = self.red.use(m)
        acc = Fraction(0)
        for ext in strings_of_length(f - len(y)):
            yy = y + ext
            out = self.red.apply(m, yy)
            if not out.startswith(prev_out):
                raise InconsistentReduction(f"table_{m}({yy}) does not extend table_{m-1}")
            if out != x[:m]:
                continue
            if m == len(x):
                v = self.source.mass(yy)
                if not is_zero(v):
                    acc = acc + v
            else:
                acc = acc + self._search(x, m + 1, yy, out)
        return acc


@dataclass(frozen=True)
class SigmaMixture(MeasureSpec):
    """mu = 2 Σ_{r>0} 3^{-r} λ_{σ(r)} with σ(r) = 0^{r-1} 1.

    mass(0^j 1 τ) = 2·3^{-(j+1)}·2^{-|τ|} and mass(0^L) = 3^{-L}, both exact.
    """

    def mass(self, sigma):
        j = sigma.find("1")
        if j < 0:
            return Fraction(1, 3 ** len(sigma))
        rest = len(sigma) - j - 1
        return Fraction(2, 3 ** (j + 1) * (1 << rest))


def slow_growth_weight(k: int) -> Fraction:
    return Fraction(1, (k + 1) * (k + 2))


def slow_growth_checkpoint(k: int) -> int:
    return 1 << (k + 4)


@dataclass(frozen=True)
class SlowGrowth(MeasureSpec):
    """Σ_k c_k δ_{Z_k}, c_k = 1/((k+1)(k+2)), Z_k = 0^{n_k} then pseudo-random, n_k = 2^{k+4}.

    Every atom with n_k >= L starts with 0^L, and Σ_{k>=K} c_k = 1/(K+1), so
    the infinite tail collapses to one exact term on each cylinder.
    """

    seed: int = 0

    def atom(self, k: int) -> PrefixThenPseudoRandom:
        return PrefixThenPseudoRandom("0" * slow_growth_checkpoint(k), rng.keyed_u64(self.seed, rng.STREAM_SLOW_GROWTH, k))

    def atoms_at(self, n: int) -> list[tuple[Fraction, str]]:
        """Exact (weight, prefix) list for length-n prefixes, tail merged."""
        out = []
        k = 0
        while slow_growth_checkpoint(k) < n:
            out.append((slow_growth_weight(k), self.atom(k).prefix(n)))
            k += 1
        out.append((Fraction(1, k + 1), "0" * n))
        return out

    def mass(self, sigma):
        return sum((w for w, x in self.atoms_at(len(sigma)) if x == sigma), Fraction(0))


def trivial_atom(i: int) -> EventuallyPeriodic:
    """R_i = (1^i 0)^∞; R_0 is the all-zeros sequence."""
    return EventuallyPeriodic("", "1" * i + "0")


@dataclass(frozen=True)
class TrivialMixture(MeasureSpec):
    """Σ_i 2^{-i-1} δ_{R_i} with R_i = (1^i 0)^∞.

    For i >= L the prefix R_i↾L is 1^L, and Σ_{i>=L} 2^{-i-1} = 2^{-L},
    so the tail is again one exact term.
    """

    def atoms_at(self, n: int) -> list[tuple[Fraction, str]]:
        out = [(Fraction(1, 1 << (i + 1)), trivial_atom(i).prefix(n)) for i in range(n)]
        out.append((Fraction(1, 1 << n), "1" * n))
        return out

    def mass(self, sigma):
        return sum((w for w, x in self.atoms_at(len(sigma)) if x == sigma), Fraction(0))


@dataclass(frozen=True)
class Renewal(MeasureSpec):
    truncation: int = 4

    @cached_property
    def constants(self) -> RenewalConstants:
        return RenewalConstants(self.truncation)

    def mass(self, sigma):
        return renewal_mass(self.constants, sigma)


@dataclass(frozen=True)
class RenewalCompanion(MeasureSpec):
    """d mu = f d rho for the renewal rho; unnormalised unless ``normalized``."""

    truncation: int = 4
    normalized: bool = False

    @cached_property
    def constants(self) -> RenewalConstants:
        return RenewalConstants(self.truncation)

    def mass(self, sigma):
        return companion_mass(self.constants, sigma, self.normalized)


@dataclass(frozen=True)
class DyadicMeasure(MeasureSpec):
    """Finite-depth cylinder table X_σ with X_ε = 1 and X_σ = X_σ0 + X_σ1."""

    depth: int
    table: dict = field(hash=False, compare=False)

    def mass(self, sigma):
        if len(sigma) > self.depth:
            raise DepthExceeded(f"table has depth {self.depth}")
        return self.table[sigma]

    def __hash__(self):
        return id(self)

    def check(self) -> None:
        if self.table[""] != 1:
            raise MalformedSpec("X_ε must equal 1")
        for s, v in self.table.items():
            if isinstance(v, IntervalValue):
                if v.hi < 0:
                    raise MalformedSpec("negative mass")
                if len(s) < self.depth and not v.overlaps(self.table[s + "0"] + self.table[s + "1"]):
                    raise MalformedSpec(f"additivity fails at {s!r}")
            else:
                if v < 0:
                    raise MalformedSpec("negative mass")
                if len(s) < self.depth and v != self.table[s + "0"] + self.table[s + "1"]:
                    raise MalformedSpec(f"additivity fails at {s!r}")


# ---------------------------------------------------------------------------
# operations


def evaluate(spec: MeasureSpec, sigma: str) -> Mass:
    """μ[σ]: exact for every finitely described variant, an enclosure for the renewal family."""
    return spec.mass(check_bits(sigma))


def product(left: MeasureSpec, right: MeasureSpec) -> Product:
    return Product(left, right)


def pushforward(red: TTReduction, source: MeasureSpec) -> Pushforward:
    return Pushforward(red, source)


def to_table(spec: MeasureSpec, depth: int, tail_tolerance: Fraction = Fraction(1, 1 << 64),
             max_depth: int = MAX_DEPTH) -> DyadicMeasure:
    if depth > max_depth:
        raise DepthExceeded(f"depth {depth} exceeds the configured maximum {max_depth}")
    if tail_tolerance <= 0:
        raise ValueError("tail tolerance must be positive")
    table = {}
    level = [""]
    for d in range(depth + 1):
        for s in level:
            v = spec.mass(s)
            if isinstance(v, IntervalValue) and v.width > tail_tolerance:
                raise TailToleranceUnreachable(f"width at {s!r} is {float(v.width):.3g}")
            table[s] = v
        if d < depth:
            level = [s + b for s in level for b in "01"]
    return DyadicMeasure(depth, table)


def support(spec: MeasureSpec, n: int) -> list[str]:
    """Length-n strings of positive mass, found by pruning null cylinders."""
    level = [""]
    for _ in range(n):
        level = [s + b for s in level for b in "01" if not is_zero(spec.mass(s + b))]
    return level


def support_with_mass(spec: MeasureSpec, n: int) -> list[tuple[str, Mass]]:
    return [(x, spec.mass(x)) for x in support(spec, n)]
