"""Minimal invariant phase space of a strip map.

Let P be the primes dividing denominators of matrix entries (for strip
maps: the slopes a_i and the determinant d), K the subring of Q of
rationals with denominator supported on P (K = Z when P is empty), and
L the K-module generated by K together with the translation components.
For finitely many pieces L = (1/N) K, where N is the lcm over pieces of
the largest divisor of the translation-denominator lcm coprime to P.
The map sends L^2 into itself, making L^2 a natural minimal phase space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError
from .piecewise import PiecewiseMap
from .rationals import Point, Prime, int_valuation, prime_divisors


@dataclass(frozen=True)
class PhaseModule:
    primes: frozenset
    N: int
    #: translation components (b_i, 0) that fed the construction
    generators: tuple

    def describe(self) -> str:
        if not self.primes:
            ring = "Z"
        else:
            inv = ", ".join(f"1/{p}" for p in sorted(self.primes))
            ring = f"Z[{inv}]"
        return ring if self.N == 1 else f"(1/{self.N}) {ring}"


def build_phase_module(F: PiecewiseMap) -> PhaseModule:
    """Construct P, N and hence L = (1/N) K for a strip map."""
    primes = set(prime_divisors(F.d.denominator))
    for piece in F.pieces:
        primes.update(prime_divisors(piece.a.denominator))
    n = 1
    gens = []
    for piece in F.pieces:
        s = (piece.b, Fraction(0))
        gens.append(s)
        d_i = math.lcm(s[0].denominator, s[1].denominator)
        for p in primes:
            d_i //= p ** int_valuation(d_i, p)
        n = math.lcm(n, d_i)
    return PhaseModule(frozenset(Prime(p) for p in primes), n, tuple(gens))


def membership(z: Point, L: PhaseModule) -> bool:
    """z in L^2: both coordinates, scaled by N, have denominators
    supported on the prime set."""
    if L.N is None:
        raise PreconditionError("module has no finite scale N")
    for c in z:
        den = (c * L.N).denominator
        for p in L.primes:
            while den % p == 0:
                den //= p
        if den != 1:
            return False
    return True
