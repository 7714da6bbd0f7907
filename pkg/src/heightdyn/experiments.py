"""Measurement campaigns over exact orbits, emitted as deterministic CSV.

Every file starts with one '#'-prefixed line carrying the full JSON
config (sorted keys) so a run can be reproduced bit-for-bit; no clocks,
no unseeded randomness anywhere.  Decimal columns are produced by exact
rational rounding, never via binary floats.

Schemas:
    orbit dump : t,x,y                      (decimals)
    trace      : t,nu_point,nu_x            (ints or 'inf')
    scan       : i,x0,y0,hp_T{h} per horizon
    variation  : T,V,valid_pairs
"""

from __future__ import annotations

import json
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from .errors import PreconditionError
from .global_height import DEFAULT_PRECISION_BITS, measured_global_height
from .padic import (
    ValuationTrace,
    lag_time,
    measured_local_height,
    valuation_trace,
)
from .piecewise import IslandReport, PiecewiseMap, island_report, map_to_dict
from .rationals import INFINITY, Point, point_valuation, valuation

THREADS_ENV = "ARITH_ORBIT_THREADS"


def decimal_string(r: Fraction, digits: int = 12) -> str:
    """Exact fixed-point decimal of a rational (round half to even)."""
    scaled = round(r * 10**digits)
    sign = "-" if scaled < 0 else ""
    q, frac = divmod(abs(scaled), 10**digits)
    return f"{sign}{q}.{frac:0{digits}d}"


def _nu_text(nu) -> str:
    return "inf" if nu == INFINITY else str(nu)


def _header(config: dict) -> str:
    return "# " + json.dumps(config, sort_keys=True, separators=(",", ":")) + "\n"


def run_orbit_dump(
    F: PiecewiseMap,
    z0: Point,
    T: int,
    path,
    decimal_digits: int = 12,
    seed=None,
) -> None:
    """Stream t and decimal approximations of the orbit to CSV.

    Exact rationals are never written here; at tens of thousands of steps
    they run to thousands of digits and belong in memory, not on disk.
    """
    cfg = {
        "command": "orbit",
        "map": map_to_dict(F),
        "z0": [str(z0[0]), str(z0[1])],
        "T": T,
        "digits": decimal_digits,
        "seed": seed,
    }
    with open(path, "w") as fh:
        fh.write(_header(cfg))
        fh.write("t,x,y\n")
        z = z0
        for t in range(T + 1):
            fh.write(
                f"{t},{decimal_string(z[0], decimal_digits)},"
                f"{decimal_string(z[1], decimal_digits)}\n"
            )
            if t < T:
                z, _ = F.apply(z)


def run_valuation_trace(
    F: PiecewiseMap, z0: Point, p: int, T: int, path, seed=None
) -> ValuationTrace:
    """Point valuation trace streamed to CSV, with the x-coordinate
    valuation alongside (the quantity the time plots show)."""
    cfg = {
        "command": "trace",
        "map": map_to_dict(F),
        "z0": [str(z0[0]), str(z0[1])],
        "p": p,
        "T": T,
        "seed": seed,
    }
    samples = []
    with open(path, "w") as fh:
        fh.write(_header(cfg))
        fh.write("t,nu_point,nu_x\n")
        z = z0
        for t in range(T + 1):
            nu_pt = point_valuation(z, p)
            nu_x = valuation(z[0], p)
            samples.append((t, nu_pt))
            fh.write(f"{t},{_nu_text(nu_pt)},{_nu_text(nu_x)}\n")
            if t < T:
                z, _ = F.apply(z)
    return ValuationTrace(p, tuple(samples))


@dataclass(frozen=True)
class ScanSpec:
    z_start: Point
    z_end: Point
    count: int
    primes: tuple
    horizons: tuple

    def __post_init__(self):
        if self.count < 2:
            raise PreconditionError("count must be >= 2")
        if not self.horizons:
            raise PreconditionError("need at least one horizon")
        if list(self.horizons) != sorted(set(self.horizons)):
            raise PreconditionError("horizons must be strictly ascending")
        if not self.primes:
            raise PreconditionError("need at least one prime")

    def initial_conditions(self) -> list:
        n = self.count - 1
        dx = self.z_end[0] - self.z_start[0]
        dy = self.z_end[1] - self.z_start[1]
        return [
            (
                self.z_start[0] + Fraction(i, n) * dx,
                self.z_start[1] + Fraction(i, n) * dy,
            )
            for i in range(self.count)
        ]


@dataclass(frozen=True)
class OrbitCells:
    index: int
    z0: Point
    #: {(p, T): measured local height (float) or None when an endpoint
    #: valuation was infinite}
    values: dict


@dataclass(frozen=True)
class ScanResult:
    spec: ScanSpec
    orbits: tuple
    #: {(p, T): (V, valid_pairs)}
    variation: dict
    invalid_cells: int

    def valid_cells(self) -> int:
        return sum(
            1 for o in self.orbits for v in o.values.values() if v is not None
        )


def _scan_one(F: PiecewiseMap, index: int, z0: Point, spec: ScanSpec) -> OrbitCells:
    horizon_set = set(spec.horizons)
    t_end = max(spec.horizons)
    nu0 = {p: point_valuation(z0, p) for p in spec.primes}
    nu_at: dict = {}
    z = z0
    for t in range(1, t_end + 1):
        z, _ = F.apply(z)
        if t in horizon_set:
            for p in spec.primes:
                nu_at[(p, t)] = point_valuation(z, p)
    values: dict = {}
    for p in spec.primes:
        for T in spec.horizons:
            a, b = nu0[p], nu_at[(p, T)]
            if a == INFINITY or b == INFINITY:
                values[(p, T)] = None
            else:
                values[(p, T)] = (a - b) / T
    return OrbitCells(index, z0, values)


def run_height_scan(F: PiecewiseMap, spec: ScanSpec) -> ScanResult:
    """Measure finite-T local heights along a segment of initial conditions.

    Orbits are independent work items (ARITH_ORBIT_THREADS caps the pool);
    assembly is ordered by orbit index, so output never depends on timing.
    The variation series uses only valid adjacent pairs, normalised by the
    number of contributing pairs; an invalid cell voids both adjacencies.
    """
    z0s = spec.initial_conditions()
    workers = int(os.environ.get(THREADS_ENV, "1"))
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            orbits = list(
                pool.map(lambda iz: _scan_one(F, iz[0], iz[1], spec), enumerate(z0s))
            )
    else:
        orbits = [_scan_one(F, i, z0, spec) for i, z0 in enumerate(z0s)]
    orbits.sort(key=lambda o: o.index)

    variation: dict = {}
    for p in spec.primes:
        for T in spec.horizons:
            series = [o.values[(p, T)] for o in orbits]
            diffs = [
                abs(b - a)
                for a, b in zip(series, series[1:])
                if a is not None and b is not None
            ]
            v = sum(diffs) / len(diffs) if diffs else None
            variation[(p, T)] = (v, len(diffs))
    invalid = sum(1 for o in orbits for v in o.values.values() if v is None)
    return ScanResult(spec, tuple(orbits), variation, invalid)


def scan_config(F: PiecewiseMap, spec: ScanSpec, seed=None) -> dict:
    return {
        "command": "scan",
        "map": map_to_dict(F),
        "segment": [
            [str(spec.z_start[0]), str(spec.z_start[1])],
            [str(spec.z_end[0]), str(spec.z_end[1])],
        ],
        "count": spec.count,
        "primes": [int(p) for p in spec.primes],
        "horizons": list(spec.horizons),
        "seed": seed,
    }


def write_scan_csv(path, F: PiecewiseMap, result: ScanResult, seed=None) -> None:
    """One row per orbit; one hp column per horizon.  Requires a single
    prime (the documented schema has no prime axis); invalid cells are
    left empty."""
    spec = result.spec
    if len(spec.primes) != 1:
        raise PreconditionError("scan CSV schema carries exactly one prime")
    p = spec.primes[0]
    cols = ",".join(f"hp_T{T}" for T in spec.horizons)
    with open(path, "w") as fh:
        fh.write(_header(scan_config(F, spec, seed)))
        fh.write(f"i,x0,y0,{cols}\n")
        for o in result.orbits:
            cells = []
            for T in spec.horizons:
                v = o.values[(p, T)]
                cells.append("" if v is None else format(v, ".12g"))
            fh.write(
                f"{o.index},{decimal_string(o.z0[0])},{decimal_string(o.z0[1])},"
                + ",".join(cells)
                + "\n"
            )


def write_variation_csv(path, F: PiecewiseMap, result: ScanResult, seed=None) -> None:
    spec = result.spec
    if len(spec.primes) != 1:
        raise PreconditionError("variation CSV schema carries exactly one prime")
    p = spec.primes[0]
    cfg = scan_config(F, spec, seed)
    cfg["command"] = "variation"
    with open(path, "w") as fh:
        fh.write(_header(cfg))
        fh.write("T,V,valid_pairs\n")
        for T in spec.horizons:
            v, pairs = result.variation[(p, T)]
            text = "" if v is None else format(v, ".12g")
            fh.write(f"{T},{text},{pairs}\n")


@dataclass(frozen=True)
class HeightReport:
    """Predicted vs measured heights for one initial condition."""

    island: IslandReport
    horizon: int
    #: {p: measured local height (float)}; 0.0 for an orbit pinned at a
    #: zero-coordinate fixed point (bounded, so no growth)
    measured_hp: dict
    measured_h: float
    deviations_hp: dict
    deviation_h: float
    lag_times: dict


def run_predict_report(
    F: PiecewiseMap,
    z0: Point,
    primes,
    horizon: int = 2000,
    window: int = 200,
    precision_bits: int = DEFAULT_PRECISION_BITS,
) -> HeightReport:
    """Join island predictions with finite-horizon measurements.

    The initial condition must sit inside an island (periodic code,
    preperiod 0); single-piece maps satisfy this trivially with period 1,
    so plain affine maps go through the same path.
    """
    rep = island_report(F, z0, window, primes, precision_bits)
    points = [z0]
    z = z0
    for _ in range(horizon):
        z, _ = F.apply(z)
        points.append(z)

    measured_hp: dict = {}
    lags: dict = {}
    for p in sorted(primes):
        tr = valuation_trace(points, p, horizon)
        if all(nu == INFINITY for _, nu in tr.samples):
            measured_hp[int(p)] = 0.0
        else:
            measured_hp[int(p)] = measured_local_height(tr)
        pred = rep.predicted_hp[int(p)]
        # per-step increments are integers, so a lag is only meaningful
        # when the island period is 1 (plain affine dynamics)
        lags[int(p)] = lag_time(tr, pred) if rep.period == 1 and pred != 0 else None
    measured_h = measured_global_height(iter(points), horizon)

    dev_hp = {
        p: abs(measured_hp[p] - float(rep.predicted_hp[p])) for p in measured_hp
    }
    dev_h = abs(measured_h - float(rep.predicted_h))
    return HeightReport(
        island=rep,
        horizon=horizon,
        measured_hp=measured_hp,
        measured_h=measured_h,
        deviations_hp=dev_hp,
        deviation_h=dev_h,
        lag_times=lags,
    )
