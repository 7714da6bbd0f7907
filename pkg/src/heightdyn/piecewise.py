"""Strip-partition piecewise-affine planar maps and their islands.

A strip map is (x, y) -> (f(x) - y, d x) with f affine on each interval
of a partition of the real line: f(x) = a_i x + b_i on Delta_i.  On the
strip Delta_i x R the map is affine with

    M_i = [[a_i, -1], [d, 0]],   s_i = (b_i, 0),   det M_i = d.

Orbits carry a symbolic code (the sequence of strip indices).  A bounded
region whose points share one periodic code is an island: the return map
over one code period is affine, and the affine height predictions apply
per return, i.e. divided by the period.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

from .affine import AffineMap2, Matrix2, fixed_point, iterate, trace_det
from .errors import (
    AperiodicCodeError,
    CertificationError,
    ConfigError,
    PreconditionError,
)
from .global_height import (
    DEFAULT_PRECISION_BITS,
    GlobalHeightPrediction,
    predict_global_height,
)
from .padic import LocalHeightPrediction, predict_local_height
from .rationals import Point, Prime, parse_rational, prime_divisors

NEG_INF = "-inf"
POS_INF = "inf"


@dataclass(frozen=True)
class StripPiece:
    """One interval of the partition with its affine rule a x + b."""

    left: Fraction | None  # None = -infinity
    right: Fraction | None  # None = +infinity
    includes_left: bool
    includes_right: bool
    a: Fraction
    b: Fraction

    def contains(self, x: Fraction) -> bool:
        if self.left is not None:
            if x < self.left or (x == self.left and not self.includes_left):
                return False
        if self.right is not None:
            if x > self.right or (x == self.right and not self.includes_right):
                return False
        return True


@dataclass(frozen=True)
class PiecewiseMap:
    pieces: tuple
    d: Fraction

    def __post_init__(self):
        if self.d == 0:
            raise ConfigError("Jacobian determinant d must be nonzero")
        _check_partition(self.pieces)

    def piece_index(self, x: Fraction) -> int:
        for i, piece in enumerate(self.pieces):
            if piece.contains(x):
                return i
        raise AssertionError("partition invariant violated")  # unreachable

    def piece_map(self, i: int) -> AffineMap2:
        piece = self.pieces[i]
        linear = Matrix2(piece.a, Fraction(-1), self.d, Fraction(0))
        return AffineMap2(linear, (piece.b, Fraction(0)))

    def apply(self, z: Point) -> tuple[Point, int]:
        x, y = z
        i = self.piece_index(x)
        piece = self.pieces[i]
        return (piece.a * x + piece.b - y, self.d * x), i

    def orbit(self, z0: Point) -> Iterator[Point]:
        z = z0
        while True:
            yield z
            z, _ = self.apply(z)


def _check_partition(pieces) -> None:
    if not pieces:
        raise ConfigError("map needs at least one piece")
    if pieces[0].left is not None:
        raise ConfigError("first piece must start at -inf")
    if pieces[-1].right is not None:
        raise ConfigError("last piece must end at +inf")
    for i, piece in enumerate(pieces):
        if piece.left is not None and piece.right is not None:
            if piece.left >= piece.right:
                raise ConfigError(f"piece {i} has left >= right")
        if piece.left is None and piece.includes_left:
            raise ConfigError(f"piece {i} cannot include -inf")
        if piece.right is None and piece.includes_right:
            raise ConfigError(f"piece {i} cannot include +inf")
    for i in range(len(pieces) - 1):
        a, b = pieces[i], pieces[i + 1]
        if b.left is None or a.right is None or a.right != b.left:
            raise ConfigError(f"gap or overlap between pieces {i} and {i + 1}")
        if a.includes_right == b.includes_left:
            word = "overlap" if a.includes_right else "gap"
            raise ConfigError(f"{word} at breakpoint {a.right} (pieces {i}, {i + 1})")


def _parse_bound(s: str, side: str) -> Fraction | None:
    if side == "left" and s == NEG_INF:
        return None
    if side == "right" and s == POS_INF:
        return None
    return parse_rational(s)


_PIECE_KEYS = {"left", "right", "includes_left", "includes_right", "a", "b"}


def map_from_dict(cfg: dict) -> PiecewiseMap:
    """Build a strip map from its JSON form; rejects unknown fields."""
    if not isinstance(cfg, dict):
        raise ConfigError("map config must be a JSON object")
    extra = set(cfg) - {"kind", "d", "pieces"}
    if extra:
        raise ConfigError(f"unknown map fields: {sorted(extra)}")
    if cfg.get("kind") != "strip":
        raise ConfigError("map config needs \"kind\": \"strip\"")
    pieces = []
    for j, pc in enumerate(cfg.get("pieces", [])):
        extra = set(pc) - _PIECE_KEYS
        if extra:
            raise ConfigError(f"piece {j}: unknown fields {sorted(extra)}")
        missing = _PIECE_KEYS - set(pc)
        if missing:
            raise ConfigError(f"piece {j}: missing fields {sorted(missing)}")
        if not isinstance(pc["includes_left"], bool) or not isinstance(
            pc["includes_right"], bool
        ):
            raise ConfigError(f"piece {j}: inclusion flags must be booleans")
        pieces.append(
            StripPiece(
                _parse_bound(pc["left"], "left"),
                _parse_bound(pc["right"], "right"),
                pc["includes_left"],
                pc["includes_right"],
                parse_rational(pc["a"]),
                parse_rational(pc["b"]),
            )
        )
    return PiecewiseMap(tuple(pieces), parse_rational(cfg.get("d", "1")))


def map_to_dict(F: PiecewiseMap) -> dict:
    return {
        "kind": "strip",
        "d": str(F.d),
        "pieces": [
            {
                "left": NEG_INF if p.left is None else str(p.left),
                "right": POS_INF if p.right is None else str(p.right),
                "includes_left": p.includes_left,
                "includes_right": p.includes_right,
                "a": str(p.a),
                "b": str(p.b),
            }
            for p in F.pieces
        ],
    }


def load_map(path) -> PiecewiseMap:
    with open(path) as fh:
        try:
            cfg = json.load(fh)
        except json.JSONDecodeError as e:
            raise ConfigError(f"bad JSON in {path}: {e}") from e
    return map_from_dict(cfg)


@dataclass(frozen=True)
class CodeWord:
    symbols: tuple
    preperiod: int | None
    period: int | None  # None = aperiodic within the window

    @property
    def periodic(self) -> bool:
        return self.period is not None

    def period_word(self) -> tuple:
        if not self.periodic:
            raise AperiodicCodeError("code is aperiodic within the window")
        return self.symbols[self.preperiod : self.preperiod + self.period]


def detect_code_period(
    symbols: Sequence, window: int, min_repeats: int = 2
) -> tuple[int, int] | None:
    """Smallest (preperiod, period), preperiod-major, with
    symbols[t + period] == symbols[t] for all preperiod <= t <= window - period;
    None when no such pair exists in the window.

    A match must be evidenced, not merely consistent: the periodic tail
    has to cover at least half the window and contain min_repeats full
    periods.  Without the preperiod cap, every sequence whose last two
    symbols agree would "stabilize" with preperiod window-2 and period 1,
    and chaotic codes would rarely count as aperiodic.
    """
    if window > len(symbols):
        raise PreconditionError("window exceeds the recorded code")
    for pre in range(window // 2 + 1):
        limit = window - pre
        for q in range(1, limit // min_repeats + 1):
            if all(symbols[t + q] == symbols[t] for t in range(pre, window - q)):
                return (pre, q)
    return None


def orbit_with_code(
    F: PiecewiseMap, z0: Point, T: int, window: int | None = None
) -> tuple[list, CodeWord]:
    """Exact orbit z_0..z_T and its symbol sequence, with the code's
    (preperiod, period) detected over the given window (default: all of it)."""
    points = [z0]
    symbols = []
    z = z0
    for _ in range(T):
        z, i = F.apply(z)
        symbols.append(i)
        points.append(z)
    # the code of z_T itself (membership only, no step taken)
    symbols.append(F.piece_index(z[0]))
    window = len(symbols) if window is None else window
    found = detect_code_period(symbols, window)
    if found is None:
        code = CodeWord(tuple(symbols), None, None)
    else:
        code = CodeWord(tuple(symbols), found[0], found[1])
    return points, code


def return_map(F: PiecewiseMap, code: Sequence) -> AffineMap2:
    """Composition of the piece maps along a code, first symbol applied first."""
    if not code:
        raise PreconditionError("code must be nonempty")
    composed = F.piece_map(code[0])
    for i in code[1:]:
        composed = F.piece_map(i).compose(composed)
    return composed


def prime_set(F: PiecewiseMap) -> frozenset:
    """Primes dividing the denominator of any piece trace (a_i) or of the
    determinant d."""
    primes = set(prime_divisors(F.d.denominator))
    for piece in F.pieces:
        primes.update(prime_divisors(piece.a.denominator))
    return frozenset(Prime(p) for p in primes)


@dataclass(frozen=True)
class IslandReport:
    period: int
    code: CodeWord
    return_map: AffineMap2
    center: Point
    jacobian_trace: Fraction
    jacobian_det: Fraction
    #: per-step local heights {p: Fraction}, i.e. affine prediction / period
    predicted_hp: dict
    #: per-step global height (mpf), affine prediction / period
    predicted_h: object
    #: raw affine predictions for provenance
    local_predictions: dict
    global_prediction: GlobalHeightPrediction


def island_report(
    F: PiecewiseMap,
    z0: Point,
    window: int,
    primes,
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> IslandReport:
    """Certify the island containing z0 and report its per-step heights.

    Requires the code of z0 to be periodic with preperiod 0 within the
    window.  Certification: the return map over one code period must have
    a fixed point whose own orbit repeats exactly the same period word.
    """
    _, code = orbit_with_code(F, z0, window)
    if not code.periodic:
        raise AperiodicCodeError(
            f"code of {z0} is aperiodic within window {window}"
        )
    if code.preperiod != 0:
        raise AperiodicCodeError(
            f"code of {z0} has preperiod {code.preperiod}; not inside an island"
        )
    word = code.period_word()
    n = len(word)
    rmap = return_map(F, word)
    center = fixed_point(rmap)

    cz = center
    for step, expected in enumerate(word):
        got = F.piece_index(cz[0])
        if got != expected:
            raise CertificationError(
                f"center code mismatch at step {step}: piece {got} != {expected}"
            )
        cz, _ = F.apply(cz)
    if cz != center:
        raise CertificationError("return map fixed point is not n-periodic for F")

    T, D = trace_det(rmap.linear)
    locals_: dict = {}
    hp: dict = {}
    for p in sorted(primes):
        pred = predict_local_height(rmap, p)
        locals_[int(p)] = pred
        hp[int(p)] = pred.value / n
    gpred = predict_global_height(rmap, precision_bits)
    return IslandReport(
        period=n,
        code=code,
        return_map=rmap,
        center=center,
        jacobian_trace=T,
        jacobian_det=D,
        predicted_hp=hp,
        predicted_h=gpred.value / n,
        local_predictions=locals_,
        global_prediction=gpred,
    )
