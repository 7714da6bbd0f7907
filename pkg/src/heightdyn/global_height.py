"""Global logarithmic heights of affine orbits.

The asymptotic growth rate of log H(z_t) splits into an archimedean part
max(0, log|alpha|), alpha a largest-modulus eigenvalue, plus a
denominator part h* contributed by the primes dividing the denominators
of T = trace(M) and D = det(M):

    h* = sum_{P1} v_p(den T) log p  +  1/2 sum_{P2} v_p(den D) log p

    P1 = {p : v_p(den D) <  2 v_p(den T)}
    P2 = {p : v_p(den D) >= 2 v_p(den T), v_p(den D) != 0}.

The prediction holds for almost all rational initial conditions and
depends only on (T, D), hence is a conjugacy invariant.  Logs are
evaluated with mpmath at a configurable working precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable

import mpmath

from .affine import AffineMap2, trace_det
from .rationals import Point, int_valuation, point_height, prime_divisors

DEFAULT_PRECISION_BITS = 128
_GUARD_BITS = 16


@dataclass(frozen=True)
class PrimeFamilies:
    P1: frozenset
    P2: frozenset


def prime_families(T: Fraction, D: Fraction) -> PrimeFamilies:
    """Classify the prime divisors of the denominators of T and D."""
    dT, dD = T.denominator, D.denominator
    p1, p2 = set(), set()
    for p in set(prime_divisors(dT)) | set(prime_divisors(dD)):
        vd = int_valuation(dD, p)
        vt = int_valuation(dT, p)
        if vd < 2 * vt:
            p1.add(p)
        elif vd != 0:
            p2.add(p)
    return PrimeFamilies(frozenset(p1), frozenset(p2))


def h_star(T: Fraction, D: Fraction, precision_bits: int = DEFAULT_PRECISION_BITS):
    """Denominator contribution to the logarithmic height (an mpf >= 0)."""
    fams = prime_families(T, D)
    with mpmath.workprec(precision_bits + _GUARD_BITS):
        total = mpmath.mpf(0)
        for p in fams.P1:
            total += int_valuation(T.denominator, p) * mpmath.log(p)
        for p in fams.P2:
            total += int_valuation(D.denominator, p) * mpmath.log(p) / 2
        return +total


def h_star_terms(T: Fraction, D: Fraction) -> dict[int, Fraction]:
    """Exact symbolic form of h*: {p: c_p} meaning sum of c_p * log p."""
    fams = prime_families(T, D)
    terms: dict[int, Fraction] = {}
    for p in fams.P1:
        terms[p] = Fraction(int_valuation(T.denominator, p))
    for p in fams.P2:
        terms[p] = Fraction(int_valuation(D.denominator, p), 2)
    return dict(sorted(terms.items()))


def spectral_log_radius(
    T: Fraction, D: Fraction, precision_bits: int = DEFAULT_PRECISION_BITS
):
    """log|alpha| for a largest-modulus root of x^2 - Tx + D (an mpf).

    Real discriminant: |alpha| = (|T| + sqrt(T^2 - 4D)) / 2; complex
    pair: |alpha| = sqrt(D).  Evaluated with guard bits beyond the
    requested precision.
    """
    disc = T * T - 4 * D
    with mpmath.workprec(precision_bits + _GUARD_BITS):
        if disc >= 0:
            alpha_abs = (abs(_to_mpf(T)) + mpmath.sqrt(_to_mpf(disc))) / 2
        else:
            alpha_abs = mpmath.sqrt(_to_mpf(D))  # D > T^2/4 >= 0 here
        return +mpmath.log(alpha_abs)


def _to_mpf(q: Fraction):
    return mpmath.mpf(q.numerator) / mpmath.mpf(q.denominator)


@dataclass(frozen=True)
class GlobalHeightPrediction:
    h_star: object  # mpf
    log_alpha: object  # mpf
    value: object  # mpf: max(0, log_alpha) + h_star
    precision_bits: int
    #: exact per-prime terms of h*, {p: coefficient of log p}
    exact_terms: dict = field(default_factory=dict)
    #: the prediction covers almost all rational initial conditions
    generic_only: bool = True


def predict_global_height(
    F: AffineMap2, precision_bits: int = DEFAULT_PRECISION_BITS
) -> GlobalHeightPrediction:
    """max(0, log|alpha|) + h*, valid for almost every rational orbit of F."""
    T, D = trace_det(F.linear)
    hs = h_star(T, D, precision_bits)
    la = spectral_log_radius(T, D, precision_bits)
    with mpmath.workprec(precision_bits + _GUARD_BITS):
        value = +(max(mpmath.mpf(0), la) + hs)
    return GlobalHeightPrediction(
        hs, la, value, precision_bits, h_star_terms(T, D), True
    )


def measured_global_height(points: Iterable[Point], t_max: int) -> float:
    """Finite-T truncation log H(z_T) / T of the logarithmic height."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    it = iter(points)
    z = next(it)
    for _ in range(t_max):
        z = next(it)
    return math.log(point_height(z)) / t_max
