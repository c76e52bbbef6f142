"""Bit strings are plain ``str`` objects over the alphabet {'0', '1'}."""

from __future__ import annotations

from itertools import product
from typing import Iterable, Iterator

EMPTY = ""


def check_bits(s: str) -> str:
    if not isinstance(s, str) or any(c not in "01" for c in s):
        raise ValueError(f"not a bit string: {s!r}")
    return s


def llex_key(s: str) -> tuple[int, str]:
    """Length-then-lexicographic order, used for every deterministic enumeration."""
    return (len(s), s)


def strings_of_length(n: int) -> Iterator[str]:
    for t in product("01", repeat=n):
        yield "".join(t)


def strings_up_to(n: int) -> Iterator[str]:
    for k in range(n + 1):
        yield from strings_of_length(k)


def is_prefix(a: str, b: str) -> bool:
    return b.startswith(a)


def comparable(a: str, b: str) -> bool:
    return a.startswith(b) or b.startswith(a)


def minimal_cover(strings: Iterable[str]) -> list[str]:
    """Drop strings that extend another member; the result is an antichain generating the same open set."""
    out: list[str] = []
    for s in sorted(set(strings), key=llex_key):
        if not any(s.startswith(t) for t in out):
            out.append(s)
    return out


def zeros(n: int) -> str:
    return "0" * n


def interleave(a: str, b: str) -> str:
    """A ⊕ B restricted to finite strings: even positions from ``a``."""
    out = []
    for i in range(max(len(a), len(b))):
        if i < len(a):
            out.append(a[i])
        if i < len(b):
            out.append(b[i])
    return "".join(out)


def deinterleave(x: str) -> tuple[str, str]:
    return x[0::2], x[1::2]
