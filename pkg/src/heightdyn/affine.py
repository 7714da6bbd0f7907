"""Affine maps of the rational plane and their Lucas-sequence closed forms.

An affine map z -> M z + s with nonsingular M in GL(2, Q) has, when 1 is
not an eigenvalue, a unique fixed point z* = -(M - 1)^(-1) s, and

    F^t(z0) = M^t (z0 - z*) + z*.

Powers of M reduce, via Cayley-Hamilton, to the scalar recursion

    U_0 = 0,  U_1 = 1,  U_{t+1} = T U_t - D U_{t-1}
    M^t = U_t M - D U_{t-1} 1

with T = trace(M), D = det(M) (the Lucas sequence of the first kind when
T, D are integers).  Production powers run this O(t) recursion; naive
repeated multiplication stays around as the test oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator

from .errors import FixedPointError, SingularMatrixError

Point = tuple[Fraction, Fraction]


@dataclass(frozen=True)
class Matrix2:
    m11: Fraction
    m12: Fraction
    m21: Fraction
    m22: Fraction

    def trace(self) -> Fraction:
        return self.m11 + self.m22

    def det(self) -> Fraction:
        return self.m11 * self.m22 - self.m12 * self.m21

    def apply(self, z: Point) -> Point:
        x, y = z
        return (self.m11 * x + self.m12 * y, self.m21 * x + self.m22 * y)

    def mul(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.m11 * other.m11 + self.m12 * other.m21,
            self.m11 * other.m12 + self.m12 * other.m22,
            self.m21 * other.m11 + self.m22 * other.m21,
            self.m21 * other.m12 + self.m22 * other.m22,
        )

    def scale(self, c: Fraction) -> "Matrix2":
        return Matrix2(c * self.m11, c * self.m12, c * self.m21, c * self.m22)

    def add(self, other: "Matrix2") -> "Matrix2":
        return Matrix2(
            self.m11 + other.m11,
            self.m12 + other.m12,
            self.m21 + other.m21,
            self.m22 + other.m22,
        )

    def inverse(self) -> "Matrix2":
        d = self.det()
        if d == 0:
            raise SingularMatrixError("matrix is singular")
        return Matrix2(self.m22 / d, -self.m12 / d, -self.m21 / d, self.m11 / d)

    @staticmethod
    def identity() -> "Matrix2":
        one, zero = Fraction(1), Fraction(0)
        return Matrix2(one, zero, zero, one)

    @staticmethod
    def of(rows) -> "Matrix2":
        (a, b), (c, d) = rows
        return Matrix2(Fraction(a), Fraction(b), Fraction(c), Fraction(d))


@dataclass(frozen=True)
class AffineMap2:
    """z -> linear z + translation, with det(linear) != 0."""

    linear: Matrix2
    translation: Point

    def __post_init__(self):
        if self.linear.det() == 0:
            raise SingularMatrixError("affine map needs a nonsingular linear part")

    def __call__(self, z: Point) -> Point:
        x, y = self.linear.apply(z)
        return (x + self.translation[0], y + self.translation[1])

    def compose(self, inner: "AffineMap2") -> "AffineMap2":
        """self after inner:  z -> self(inner(z))."""
        lin = self.linear.mul(inner.linear)
        s = self.linear.apply(inner.translation)
        return AffineMap2(
            lin, (s[0] + self.translation[0], s[1] + self.translation[1])
        )

    def is_homogeneous(self) -> bool:
        return self.translation == (0, 0)


def affine_map(rows, s=(0, 0)) -> AffineMap2:
    """Convenience constructor from number-like entries."""
    return AffineMap2(Matrix2.of(rows), (Fraction(s[0]), Fraction(s[1])))


def trace_det(M: Matrix2) -> tuple[Fraction, Fraction]:
    return M.trace(), M.det()


def fixed_point(F: AffineMap2) -> Point:
    """The unique fixed point -(M - 1)^(-1) s; exact."""
    m = F.linear
    shifted = Matrix2(m.m11 - 1, m.m12, m.m21, m.m22 - 1)
    if shifted.det() == 0:
        raise FixedPointError("fixed point not unique/absent: det(M - 1) = 0")
    sx, sy = shifted.inverse().apply(F.translation)
    return (-sx, -sy)


def iterate(F: AffineMap2, z0: Point, t: int) -> Point:
    """Exact t-fold composition; iterate(F, z, 0) = z."""
    z = z0
    for _ in range(t):
        z = F(z)
    return z


def orbit(F: AffineMap2, z0: Point) -> Iterator[Point]:
    """Infinite forward orbit z0, F(z0), F^2(z0), ..."""
    z = z0
    while True:
        yield z
        z = F(z)


def lucas_u(t: int, T: Fraction, D: Fraction) -> Fraction:
    """U_t by running the recursion; O(t) multiplications."""
    if t < 0:
        raise ValueError("t must be >= 0 (matrix_power handles negative t)")
    prev, cur = Fraction(0), Fraction(1)  # U_0, U_1
    if t == 0:
        return prev
    for _ in range(t - 1):
        prev, cur = cur, T * cur - D * prev
    return cur


def lucas_u_closed_form(t: int, T: Fraction, D: Fraction) -> Fraction:
    """U_t as the explicit binomial sum

        U_t = sum_k  C(t-k-1, k) T^(t-2k-1) (-D)^k,   0 <= k <= (t-1)//2.

    Equal to lucas_u(t, T, D); kept as an independent route.
    """
    if t < 1:
        raise ValueError("closed form is stated for t >= 1")
    total = Fraction(0)
    minus_d = -D
    for k in range((t - 1) // 2 + 1):
        total += math.comb(t - k - 1, k) * T ** (t - 2 * k - 1) * minus_d**k
    return total


def matrix_power(M: Matrix2, t: int) -> Matrix2:
    """M^t via M^t = U_t M - D U_{t-1} 1, recursion run in either direction.

    Negative t requires det(M) != 0.
    """
    if t == 0:
        return Matrix2.identity()
    T, D = trace_det(M)
    if t > 0:
        u_prev, u_t = Fraction(0), Fraction(1)  # (U_0, U_1)
        for _ in range(t - 1):
            u_prev, u_t = u_t, T * u_t - D * u_prev
    else:
        if D == 0:
            raise SingularMatrixError("negative power of a singular matrix")
        u_t, u_next = Fraction(0), Fraction(1)  # (U_0, U_1), walked backwards
        for _ in range(-t):
            u_t, u_next = (T * u_t - u_next) / D, u_t
        u_prev = (T * u_t - u_next) / D
    return M.scale(u_t).add(Matrix2.identity().scale(-D * u_prev))


def orbit_point_closed_form(F: AffineMap2, z0: Point, t: int) -> Point:
    """z_t from the Lucas closed form

        z_t = U_t z'_1 - D U_{t-1} z'_0 + z*,   z'_k = F^k(z0) - z*,

    with z'_1 computed as M z'_0.  Exactly equals iterate(F, z0, t).
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0:
        return z0
    zs = fixed_point(F)
    T, D = trace_det(F.linear)
    z0p = (z0[0] - zs[0], z0[1] - zs[1])
    z1p = F.linear.apply(z0p)
    u_t = lucas_u(t, T, D)
    u_prev = lucas_u(t - 1, T, D)
    x = u_t * z1p[0] - D * u_prev * z0p[0] + zs[0]
    y = u_t * z1p[1] - D * u_prev * z0p[1] + zs[1]
    return (x, y)
