"""Exact rational scalars, heights, p-adic valuations and norms.

The scalar type throughout the package is ``fractions.Fraction``: always
reduced, denominator >= 1, arbitrary precision.  Points of the rational
plane are plain ``(x, y)`` tuples of Fractions.

Valuations take values in Z extended by +infinity (the valuation of 0);
we use ``math.inf``, which propagates correctly through ``min`` and
order comparisons and never silently turns into an integer.
"""

from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from typing import Callable, Iterable, Iterator

from .errors import ConfigError, PreconditionError

Rational = Fraction
Point = "tuple[Fraction, Fraction]"

#: Valuation of zero.  float('inf') compares and min()s correctly against ints.
INFINITY = math.inf

_RATIONAL_RE = re.compile(r"^-?[0-9]+(/[1-9][0-9]*)?$")


def parse_rational(text: str) -> Fraction:
    """Parse the exact grammar ``-?[0-9]+(/[1-9][0-9]*)?`` (reduced on ingest)."""
    s = text.strip()
    if not _RATIONAL_RE.match(s):
        raise ConfigError(f"not a rational literal: {text!r}")
    return Fraction(s)


def format_rational(r: Fraction) -> str:
    """Inverse of parse_rational: ``m/n``, or ``m`` when the denominator is 1."""
    return str(r)


def parse_point(text: str) -> tuple[Fraction, Fraction]:
    """Parse ``x,y`` with both coordinates in the rational grammar."""
    parts = text.split(",")
    if len(parts) != 2:
        raise ConfigError(f"expected 'x,y': {text!r}")
    return parse_rational(parts[0]), parse_rational(parts[1])


# Deterministic Miller-Rabin witness set: correct for all n < 3.3 * 10^24
# (Sorenson & Webster), far beyond every prime this package touches.
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_LIMIT = 3_317_044_064_679_887_385_961_981


def is_prime(n: int) -> bool:
    """Deterministic primality test for n < 3.3e24."""
    if n < 2:
        return False
    for small in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n == small:
            return True
        if n % small == 0:
            return False
    if n >= _MR_LIMIT:
        raise ValueError(f"{n} exceeds the deterministic witness range")
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class Prime(int):
    """A positive integer certified prime at construction."""

    def __new__(cls, value: int) -> "Prime":
        v = int(value)
        if not is_prime(v):
            raise ConfigError(f"{value} is not prime")
        return super().__new__(cls, v)


def height(r: Fraction) -> int:
    """Height of a reduced rational m/n: max(|m|, n).  height(0) = 1."""
    return max(abs(r.numerator), r.denominator)


def point_height(z: Point) -> int:
    """Height of a plane point: max of the coordinate heights."""
    return max(height(z[0]), height(z[1]))


def int_valuation(n: int, p: int) -> int | float:
    """Largest k with p^k | n, or +inf for n = 0."""
    if n == 0:
        return INFINITY
    if p == 2:
        return ((n & -n).bit_length()) - 1
    v = 0
    n = abs(n)
    while True:
        q, rem = divmod(n, p)
        if rem:
            return v
        v += 1
        n = q


def valuation(r: Fraction, p: int) -> int | float:
    """p-adic order of a rational: v_p(numerator) - v_p(denominator)."""
    if r == 0:
        return INFINITY
    vn = int_valuation(r.numerator, p)
    if vn:  # reduced fraction: p divides at most one of the two
        return vn
    return -int_valuation(r.denominator, p)


def point_valuation(z: Point, p: int) -> int | float:
    """min of the coordinate valuations; +inf iff z = (0, 0)."""
    return min(valuation(z[0], p), valuation(z[1], p))


def padic_abs(r: Fraction, p: int) -> Fraction:
    """|r|_p = p^(-v_p(r)) as an exact rational; |0|_p = 0."""
    if r == 0:
        return Fraction(0)
    v = valuation(r, p)
    return Fraction(p) ** -v


def point_padic_abs(z: Point, p: int) -> Fraction:
    """||z||_p = max(|x|_p, |y|_p)."""
    return max(padic_abs(z[0], p), padic_abs(z[1], p))


def _factor(n: int) -> dict[int, int]:
    """Trial-division factorization; adequate for the parameter-sized
    integers this package meets (denominators of map data, test scalars)."""
    n = abs(n)
    out: dict[int, int] = {}
    for p in itertools.chain((2, 3), itertools.count(5, 2)):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def prime_divisors(n: int) -> list[int]:
    """Sorted prime divisors of |n| (empty for 0, 1)."""
    if n == 0:
        return []
    return sorted(_factor(n))


def product_formula_defect(r: Fraction) -> Fraction:
    """|r| * prod_p |r|_p over the primes dividing numerator or denominator.

    The product formula makes this exactly 1 for every nonzero rational;
    the function computes it from scratch so callers can assert it.
    """
    if r == 0:
        raise PreconditionError("product formula is about nonzero rationals")
    out = abs(r)
    for p in set(prime_divisors(r.numerator)) | set(prime_divisors(r.denominator)):
        out *= padic_abs(r, p)
    return out


def rationals_up_to_height(N: int) -> list[Fraction]:
    """All rationals of height <= N, ascending.

    The list is {0} u {+-m/n : 1 <= m, n <= N, gcd(m, n) = 1}; its length
    is 3 + 4*sum(phi(k), k=2..N).  Memory is O(N^2) values.
    """
    if N < 1:
        raise PreconditionError("N must be >= 1")
    vals = [Fraction(0)]
    for n in range(1, N + 1):
        for m in range(1, N + 1):
            if math.gcd(m, n) == 1:
                q = Fraction(m, n)
                vals.append(q)
                vals.append(-q)
    vals.sort()
    return vals


def bounded_height_points(N: int) -> Iterator[tuple[Fraction, Fraction]]:
    """Every z in Q^2 with point_height(z) <= N, exactly once.

    Order: lexicographic by (x, y), coordinates ascending by value.
    Streams lazily; only the two coordinate lists are materialized.
    """
    coords = rationals_up_to_height(N)
    return itertools.product(coords, coords)


def count_points(points: Iterable) -> int:
    """Length of an iterator without materializing it (C-speed drain)."""
    import collections

    counter = itertools.count()
    collections.deque(zip(points, counter), maxlen=0)
    return next(counter)


def density_estimate(
    predicate: Callable[[tuple[Fraction, Fraction]], bool],
    ambient: Callable[[tuple[Fraction, Fraction]], bool],
    N: int,
) -> float:
    """Finite-N density of {predicate} inside {ambient}: the ratio of their
    counts over all points of height <= N."""
    hits = 0
    total = 0
    for z in bounded_height_points(N):
        if ambient(z):
            total += 1
            if predicate(z):
                hits += 1
    if total == 0:
        raise PreconditionError("ambient set has no points of height <= N")
    return hits / total
