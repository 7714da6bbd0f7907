"""Local (p-adic) heights of affine orbits: predictions and measurements.

For z -> M z + s with T = trace(M), D = det(M), u = v_p(D), v = v_p(T),
the Newton polygon of x^2 - Tx + D fixes the eigenvalue valuations:

    u > 2v   two slopes:  v_p(alpha) = v,  v_p(beta) = u - v
    u <= 2v  one slope:   both equal u/2  (half-integers allowed)

and the local height of almost every rational point is -v_p(alpha),
clamped at 0 when s != (0,0).  Everything here works with the valuation
numbers only; no quadratic-extension field elements are ever built.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator

from .affine import AffineMap2, fixed_point, trace_det
from .errors import (
    ConfigError,
    InfiniteValuationError,
    PreconditionError,
    SingularMatrixError,
)
from .rationals import (
    INFINITY,
    Point,
    format_rational,
    int_valuation,
    point_padic_abs,
    point_valuation,
    valuation,
)


@dataclass(frozen=True)
class NewtonPolygonResult:
    """Eigenvalue valuations read off the characteristic polygon."""

    val_alpha: Fraction
    val_beta: Fraction
    case_tag: str  # "distinct_slopes" | "single_slope"


def newton_valuations(u, v) -> NewtonPolygonResult:
    """Valuations of the two roots of x^2 - Tx + D from u = v_p(D), v = v_p(T).

    v = +inf (T = 0) forces the single-slope case; u must be finite
    (nonsingular matrix).
    """
    if u == INFINITY:
        raise SingularMatrixError("v_p(D) infinite means D = 0")
    if v != INFINITY and u > 2 * v:
        return NewtonPolygonResult(Fraction(v), Fraction(u - v), "distinct_slopes")
    half = Fraction(u, 2)
    return NewtonPolygonResult(half, half, "single_slope")


@dataclass(frozen=True)
class LocalHeightPrediction:
    value: Fraction
    theorem_case: str  # "i" | "ii"
    homogeneous: bool
    #: True on the boundary v_p(D) = 2 v_p(T), where the analysis yields an
    #: upper bound rather than an equality; the reported value is the case-ii one.
    bound_only: bool = False


def predict_local_height(F: AffineMap2, p: int) -> LocalHeightPrediction:
    """Local height of almost every rational orbit of F at the prime p.

    Case i  (v_p(D) >  2 v_p(T)):  -v_p(T)
    Case ii (v_p(D) <= 2 v_p(T)):  -v_p(D)/2
    with max(. , 0) applied iff the translation part is nonzero.
    """
    T, D = trace_det(F.linear)
    u = valuation(D, p)
    v = valuation(T, p)
    homogeneous = F.is_homogeneous()
    if v != INFINITY and u > 2 * v:
        value = Fraction(-v)
        case, bound_only = "i", False
    else:
        value = Fraction(-u, 2)
        case, bound_only = "ii", (u == 2 * v)
    if not homogeneous:
        value = max(value, Fraction(0))
    return LocalHeightPrediction(value, case, homogeneous, bound_only)


@dataclass(frozen=True)
class ValuationTrace:
    """Samples (t, v_p(z_t)) along one orbit, t consecutive from 0."""

    prime: int
    samples: tuple

    def nu(self, i: int):
        return self.samples[i][1]

    def increments(self) -> list:
        return [
            self.samples[i + 1][1] - self.samples[i][1]
            for i in range(len(self.samples) - 1)
        ]

    def write_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("t,nu\n")
            for t, nu in self.samples:
                fh.write(f"{t},{_nu_str(nu)}\n")

    @staticmethod
    def read_csv(path, prime: int) -> "ValuationTrace":
        samples = []
        with open(path) as fh:
            header = fh.readline()
            if header.strip() != "t,nu":
                raise ConfigError(f"expected 't,nu' header in {path}")
            for line in fh:
                t_s, nu_s = line.strip().split(",")
                samples.append((int(t_s), _nu_parse(nu_s)))
        return ValuationTrace(prime, tuple(samples))


def _nu_str(nu) -> str:
    return "inf" if nu == INFINITY else str(nu)


def _nu_parse(s: str):
    return INFINITY if s == "inf" else int(s)


def valuation_trace(points: Iterable[Point], p: int, t_max: int) -> ValuationTrace:
    """Record v_p(z_t) for t = 0..t_max from an orbit point stream."""
    samples = []
    it = iter(points)
    for t in range(t_max + 1):
        z = next(it)
        samples.append((t, point_valuation(z, p)))
    return ValuationTrace(p, tuple(samples))


def component_valuation_trace(
    points: Iterable[Point], p: int, t_max: int, component: int = 0
) -> ValuationTrace:
    """Same, but for a single coordinate (what the time plots show)."""
    samples = []
    it = iter(points)
    for t in range(t_max + 1):
        z = next(it)
        samples.append((t, valuation(z[component], p)))
    return ValuationTrace(p, tuple(samples))


def measured_local_height(trace: ValuationTrace) -> float:
    """Two-endpoint slope estimator (v_p(z_0) - v_p(z_T)) / T.

    Exactly the finite-T approximation the experiments use; deliberately
    not a regression over the whole trace.
    """
    if len(trace.samples) < 2:
        raise PreconditionError("need at least two samples")
    t0, nu0 = trace.samples[0]
    tT, nuT = trace.samples[-1]
    if nu0 == INFINITY or nuT == INFINITY:
        raise InfiniteValuationError(
            "endpoint valuation is infinite (orbit hit a zero coordinate pair)"
        )
    return (nu0 - nuT) / (tT - t0)


def lag_time(trace: ValuationTrace, expected_step) -> int | None:
    """Smallest t after which every recorded increment equals -expected_step.

    expected_step is -v_p(alpha) for the dominant eigenvalue, so in the
    settled regime v_p drops by expected_step each step.  Returns None
    ("not reached") when the tail of the window never stabilizes.  The
    claim never extends beyond the recorded window.
    """
    samples = trace.samples
    if len(samples) < 2:
        return None
    for i in range(len(samples) - 1):
        if samples[i + 1][0] != samples[i][0] + 1:
            raise PreconditionError("lag time needs consecutive samples")
    target = -expected_step
    last_bad = None
    for i in range(len(samples) - 1):
        inc = samples[i + 1][1] - samples[i][1]
        if not (_finite(inc) and inc == target):
            last_bad = i
    if last_bad is None:
        return 0
    if last_bad == len(samples) - 2:
        return None
    return last_bad + 1


def _finite(x) -> bool:
    return x != INFINITY and x != -INFINITY and x == x  # excludes inf and nan


@dataclass(frozen=True)
class HenselRoot:
    residue: int
    precision: int
    valuation: int

    def __int__(self) -> int:
        return self.residue


def hensel_quadratic_roots(
    Tprime: int, Dterm: int, p: int, K: int
) -> tuple[HenselRoot, HenselRoot]:
    """Lift the two roots of s(x) = x^2 - Tprime x + Dterm to Z/p^K.

    Requires p coprime to Tprime and p | Dterm, so that
    s(x) = x (x - Tprime) mod p has two simple roots; Newton iteration
    then lifts each with quadratic convergence.  Returns (unit root,
    small root): the unit root is congruent to Tprime mod p and has
    valuation 0; the other root has valuation v_p(Dterm).
    """
    if K < 1:
        raise PreconditionError("precision K must be >= 1")
    if Tprime % p == 0:
        raise PreconditionError("p must not divide Tprime")
    if Dterm % p != 0:
        raise PreconditionError("p must divide Dterm")
    if Dterm == 0:
        raise PreconditionError("Dterm = 0 corresponds to a singular matrix")

    def lift(x0: int) -> int:
        x, prec = x0 % p, 1
        while prec < K:
            prec = min(2 * prec, K)
            mod = p**prec
            fx = (x * x - Tprime * x + Dterm) % mod
            dfx = (2 * x - Tprime) % mod
            x = (x - fx * pow(dfx, -1, mod)) % mod
        return x

    alpha = lift(Tprime % p)
    beta = lift(0)
    v_beta = int_valuation(Dterm, p)
    return (
        HenselRoot(alpha, K, 0),
        HenselRoot(beta, K, int(v_beta)),
    )


def rational_residue(r: Fraction, p: int, K: int) -> int:
    """r as an element of Z/p^K; requires v_p(r) >= 0 (p-adic integer)."""
    mod = p**K
    den = r.denominator
    if den % p == 0:
        raise PreconditionError(f"{format_rational(r)} is not a p-adic integer")
    return r.numerator * pow(den, -1, mod) % mod


def is_nondegenerate(F: AffineMap2, z0: Point, p: int) -> bool:
    """Whether z0 avoids the degenerate valuation coincidences.

    Writing z'_k = F^k(z0) - z* componentwise (c0, c1 below being the
    t=0 and t=1 values of one coordinate), the settled affine growth of
    v_p(z_t) requires, in the two-slope case,

        v_p(c1) + v_p(T)  !=  v_p(c0) + v_p(D)

    and in the single-slope case the always-sufficient form

        v_p(c1) - v_p(c0) - v_p(T)  <  0.

    One good coordinate suffices.
    """
    T, D = trace_det(F.linear)
    u = valuation(D, p)
    v = valuation(T, p)
    zs = fixed_point(F)
    z0p = (z0[0] - zs[0], z0[1] - zs[1])
    z1p = F.linear.apply(z0p)
    two_slopes = v != INFINITY and u > 2 * v

    def coord_ok(c0: Fraction, c1: Fraction) -> bool:
        n0, n1 = valuation(c0, p), valuation(c1, p)
        if two_slopes:
            return n1 + v != n0 + u
        diff = n1 - n0 if not (n1 == INFINITY and n0 == INFINITY) else INFINITY
        if diff != diff or diff == INFINITY:  # both coords vanish: degenerate
            return False
        return diff - v < 0

    return coord_ok(z0p[0], z1p[0]) or coord_ok(z0p[1], z1p[1])


def eigenline_representative(F: AffineMap2, p: int, K: int) -> tuple[Point, Point]:
    """(zeta, w): a rational point zeta = z* + w approximating the
    contracting eigenline of F, with w a beta-eigenvector built from the
    Hensel lift of the small eigenvalue at precision 2K+8.

    This is exactly the target near_eigenspace_point(F, p, z, K, eps)
    slides towards, exposed so the simultaneous-approximation bound
    ||z'-z|| + ||z'-zeta||_p < eps can be verified from outside.
    """
    if K < 1:
        raise PreconditionError("K must be >= 1")
    M = F.linear
    T, D = trace_det(M)
    u = valuation(D, p)
    v = valuation(T, p)
    if v == INFINITY or u <= 2 * v:
        raise PreconditionError(
            "eigenvalues have equal p-adic size; no contracting eigenline"
        )
    zs = fixed_point(F)
    prec = 2 * K + 8
    while u - 2 * v >= prec:  # keep the small root visible mod p^prec
        prec *= 2
    t_scaled = T / Fraction(p) ** v  # p-adic unit
    d_scaled = D / Fraction(p) ** (2 * v)  # valuation u - 2v >= 1
    _, beta_root = hensel_quadratic_roots(
        rational_residue(t_scaled, p, prec),
        rational_residue(d_scaled, p, prec),
        p,
        prec,
    )
    beta_apx = Fraction(beta_root.residue) * Fraction(p) ** v
    if M.m12 != 0:
        w = (M.m12, beta_apx - M.m11)
    else:
        w = (beta_apx - M.m22, M.m21)
    return (zs[0] + w[0], zs[1] + w[1]), w


def near_eigenspace_point(
    F: AffineMap2, p: int, z: Point, K: int, eps: Fraction
) -> Point:
    """A rational point archimedean-close to z but p-adically hugging the
    contracting eigenline, so the orbit's valuation rises for about K
    steps before the generic -v_p(T) slope takes over.

    Construction: take zeta = eigenline_representative(F, p, K) and slide
    along

        z' = z + (zeta - z) / (1 + p^k)

    raising k until both  ||z' - z|| < eps/2  and
    v_p(z' - zeta) >= max(2K+4, log_p(2/eps)).  The output is checked to
    lie off the eigenline exactly (via the exact line when the
    eigenvalues are rational, else z' != z* suffices since the line then
    has no other rational points).
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise PreconditionError("eps must be positive")
    M = F.linear
    zs = fixed_point(F)
    zeta, w = eigenline_representative(F, p, K)

    a, b = zeta[0] - z[0], zeta[1] - z[1]
    if a == 0 and b == 0:
        raise PreconditionError("z already sits on the lifted eigenline")

    nu_target = max(2 * K + 4, _ceil_log_p(Fraction(2) / eps, p))
    nu_gap = point_valuation((a, b), p)
    k = max(1, nu_target - (nu_gap if nu_gap != INFINITY else 0))
    arch = max(abs(a), abs(b))
    while Fraction(2) * arch >= eps * (1 + Fraction(p) ** k):
        k += 1

    for _ in range(8):
        r_k = Fraction(1, 1 + p**k)
        zp = (z[0] + r_k * a, z[1] + r_k * b)
        if _off_eigenline(zp, zs, w, M, p):
            break
        k += 1
    else:
        raise PreconditionError("could not leave the eigenline (degenerate input)")

    gap = max(abs(zp[0] - z[0]), abs(zp[1] - z[1])) + point_padic_abs(
        (zp[0] - zeta[0], zp[1] - zeta[1]), p
    )
    if gap >= eps:
        raise PreconditionError("simultaneous approximation bound not met")
    return zp


def _ceil_log_p(x: Fraction, p: int) -> int:
    n = 0
    acc = Fraction(1)
    while acc < x:
        acc *= p
        n += 1
    return n


def _off_eigenline(zp, zs, w, M, p) -> bool:
    """zp is certainly not on the contracting eigenline through zs."""
    dx, dy = zp[0] - zs[0], zp[1] - zs[1]
    if dx == 0 and dy == 0:
        return False
    if dx * w[1] - dy * w[0] == 0:  # parallel to the lifted representative
        return False
    T, D = trace_det(M)
    root = _exact_sqrt(T * T - 4 * D)
    if root is None:
        # irreducible characteristic polynomial: the eigenline holds no
        # rational points besides the fixed point itself
        return True
    # rational eigenvalues: compare against the exact contracting eigenvector
    r1, r2 = (T + root) / 2, (T - root) / 2
    beta = r1 if valuation(r1, p) > valuation(r2, p) else r2
    if M.m12 != 0:
        ex, ey = M.m12, beta - M.m11
    else:
        ex, ey = beta - M.m22, M.m21
    return dx * ey - dy * ex != 0


def _exact_sqrt(q: Fraction) -> Fraction | None:
    """sqrt(q) if q is the square of a rational, else None."""
    if q < 0:
        return None
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None
