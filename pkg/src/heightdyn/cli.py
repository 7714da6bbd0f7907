"""Command-line entry point.

Commands map one-to-one onto the experiment/analysis operations:

    orbit         exact orbit, decimal CSV dump          (t,x,y)
    trace         valuation trace CSV                    (t,nu_point,nu_x)
    scan          finite-T local heights along a segment (i,x0,y0,hp_T*)
    variation     total-variation series of a scan       (T,V,valid_pairs)
    island        island certification + heights         (JSON)
    predict       predictions vs measurements            (JSON)
    phase-module  minimal phase space L = (1/N) K        (JSON)
    enumerate     all plane points of height <= N        (x,y exact CSV)

Exit codes: 0 ok, 2 bad configuration, 3 precondition failure
(aperiodic code, singular matrix, ...), 4 I/O error.  Rationals in JSON
reports are strings; decimal evaluations appear alongside, never instead.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import mpmath

from . import experiments
from .errors import ConfigError, HeightDynError, PreconditionError
from .experiments import HeightReport, ScanSpec
from .global_height import predict_global_height
from .padic import LocalHeightPrediction, predict_local_height
from .phase_module import build_phase_module
from .piecewise import (
    IslandReport,
    PiecewiseMap,
    island_report,
    load_map,
    map_to_dict,
    prime_set,
)
from .rationals import Prime, bounded_height_points, parse_point

LONG_HORIZON_LIMIT = 16000


def _mp_str(x, digits: int = 12) -> str:
    return mpmath.nstr(mpmath.mpf(x), digits)


def _parse_primes(text: str) -> tuple:
    try:
        return tuple(Prime(int(tok)) for tok in text.split(","))
    except ValueError as e:
        raise ConfigError(f"bad prime list {text!r}") from e


def _parse_horizons(text: str, allow_long: bool) -> tuple:
    try:
        hs = tuple(int(tok) for tok in text.split(","))
    except ValueError as e:
        raise ConfigError(f"bad horizon list {text!r}") from e
    if any(h < 1 for h in hs):
        raise ConfigError("horizons must be positive")
    if max(hs) > LONG_HORIZON_LIMIT and not allow_long:
        raise ConfigError(
            f"horizon {max(hs)} exceeds the desk-scale limit "
            f"{LONG_HORIZON_LIMIT}; pass --allow-long to run it"
        )
    return hs


def _parse_segment(text: str) -> tuple:
    parts = text.split(":")
    if len(parts) != 2:
        raise ConfigError(f"expected 'x1,y1:x2,y2': {text!r}")
    return parse_point(parts[0]), parse_point(parts[1])


def _local_pred_json(pred: LocalHeightPrediction) -> dict:
    return {
        "exact": str(pred.value),
        "decimal": float(pred.value),
        "theorem_case": pred.theorem_case,
        "homogeneous": pred.homogeneous,
        "bound_only": pred.bound_only,
    }


def _island_json(rep: IslandReport, F: PiecewiseMap, z0) -> dict:
    lin = rep.return_map.linear
    gp = rep.global_prediction
    n = rep.period
    return {
        "kind": "island",
        "map": map_to_dict(F),
        "z0": [str(z0[0]), str(z0[1])],
        "period": n,
        "preperiod": rep.code.preperiod,
        "code": list(rep.code.period_word()),
        "center": [str(rep.center[0]), str(rep.center[1])],
        "return_map": {
            "linear": [
                [str(lin.m11), str(lin.m12)],
                [str(lin.m21), str(lin.m22)],
            ],
            "translation": [
                str(rep.return_map.translation[0]),
                str(rep.return_map.translation[1]),
            ],
        },
        "jacobian_trace": str(rep.jacobian_trace),
        "jacobian_det": str(rep.jacobian_det),
        "predicted_hp": {
            str(p): {
                "exact": str(rep.predicted_hp[p]),
                "decimal": float(rep.predicted_hp[p]),
                "theorem_case": rep.local_predictions[p].theorem_case,
                "bound_only": rep.local_predictions[p].bound_only,
            }
            for p in sorted(rep.predicted_hp)
        },
        "predicted_h": {
            "exact_log_terms": {
                str(p): str(c / n) for p, c in sorted(gp.exact_terms.items())
            },
            "log_alpha_decimal": _mp_str(gp.log_alpha / n),
            "decimal": _mp_str(rep.predicted_h),
            "precision_bits": gp.precision_bits,
        },
        "caveat": "heights hold for almost all rational points of the island",
    }


def _report_json(hr: HeightReport, F: PiecewiseMap, z0) -> dict:
    out = _island_json(hr.island, F, z0)
    out["kind"] = "predict"
    out["measured"] = {
        "horizon": hr.horizon,
        "hp": {str(p): hr.measured_hp[p] for p in sorted(hr.measured_hp)},
        "h": hr.measured_h,
        "deviations_hp": {
            str(p): hr.deviations_hp[p] for p in sorted(hr.deviations_hp)
        },
        "deviation_h": hr.deviation_h,
        "lag_times": {
            str(p): hr.lag_times[p] for p in sorted(hr.lag_times)
        },
    }
    return out


def _emit_json(doc: dict, out_path) -> None:
    text = json.dumps(doc, indent=2) + "\n"
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _cmd_orbit(args) -> int:
    F = load_map(args.map)
    z0 = parse_point(args.z0)
    experiments.run_orbit_dump(F, z0, args.T, args.out, seed=args.seed)
    return 0


def _cmd_trace(args) -> int:
    F = load_map(args.map)
    z0 = parse_point(args.z0)
    p = Prime(args.p)
    experiments.run_valuation_trace(F, z0, p, args.T, args.out, seed=args.seed)
    return 0


def _build_scan(args) -> tuple:
    F = load_map(args.map)
    z_start, z_end = _parse_segment(args.segment)
    horizons = _parse_horizons(args.horizons, args.allow_long)
    spec = ScanSpec(
        z_start=z_start,
        z_end=z_end,
        count=args.count,
        primes=(Prime(args.p),),
        horizons=horizons,
    )
    return F, experiments.run_height_scan(F, spec)


def _cmd_scan(args) -> int:
    F, result = _build_scan(args)
    experiments.write_scan_csv(args.out, F, result, seed=args.seed)
    return 0


def _cmd_variation(args) -> int:
    F, result = _build_scan(args)
    experiments.write_variation_csv(args.out, F, result, seed=args.seed)
    return 0


def _primes_for(args, F: PiecewiseMap) -> tuple:
    if args.primes:
        return _parse_primes(args.primes)
    return tuple(sorted(prime_set(F)))


def _cmd_island(args) -> int:
    F = load_map(args.map)
    z0 = parse_point(args.z0)
    rep = island_report(F, z0, args.window, _primes_for(args, F), args.precision)
    _emit_json(_island_json(rep, F, z0), args.out)
    return 0


def _cmd_predict(args) -> int:
    F = load_map(args.map)
    primes = _primes_for(args, F)
    if args.z0 is None:
        # pure prediction from the map parameters; needs a single affine rule
        if len(F.pieces) != 1:
            raise ConfigError("predict without --z0 needs a single-piece map")
        _emit_json(_affine_predict_json(F, primes, args.precision), args.out)
        return 0
    z0 = parse_point(args.z0)
    hr = experiments.run_predict_report(
        F, z0, primes, horizon=args.T, window=args.window, precision_bits=args.precision
    )
    _emit_json(_report_json(hr, F, z0), args.out)
    return 0


def _affine_predict_json(F: PiecewiseMap, primes, precision_bits: int) -> dict:
    Fp = F.piece_map(0)
    gp = predict_global_height(Fp, precision_bits)
    return {
        "kind": "predict",
        "map": map_to_dict(F),
        "predicted_hp": {
            str(p): _local_pred_json(predict_local_height(Fp, p)) for p in primes
        },
        "predicted_h": {
            "exact_log_terms": {
                str(p): str(c) for p, c in sorted(gp.exact_terms.items())
            },
            "log_alpha_decimal": _mp_str(gp.log_alpha),
            "decimal": _mp_str(gp.value),
            "precision_bits": gp.precision_bits,
        },
        "caveat": "predictions hold for almost all rational initial conditions",
    }


def _cmd_phase_module(args) -> int:
    F = load_map(args.map)
    pm = build_phase_module(F)
    doc = {
        "kind": "phase-module",
        "map": map_to_dict(F),
        "P": sorted(int(p) for p in pm.primes),
        "N": pm.N,
        "module": pm.describe(),
        "generators": [[str(s[0]), str(s[1])] for s in pm.generators],
    }
    _emit_json(doc, args.out)
    return 0


def _cmd_enumerate(args) -> int:
    if args.N < 1:
        raise ConfigError("--N must be >= 1")
    with open(args.out, "w") if args.out else _stdout() as fh:
        fh.write('# {"command":"enumerate","N":%d}\n' % args.N)
        fh.write("x,y\n")
        for x, y in bounded_height_points(args.N):
            fh.write(f"{x},{y}\n")
    return 0


class _stdout:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        return False


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="heightdyn",
        description="Exact-arithmetic heights of planar piecewise-affine orbits.",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def add(name, fn, **flags):
        p = sub.add_parser(name)
        if flags.get("map"):
            p.add_argument("--map", required=True, help="map config JSON path")
        if flags.get("z0") == "req":
            p.add_argument("--z0", required=True, help="initial point 'x,y'")
        elif flags.get("z0"):
            p.add_argument("--z0", help="initial point 'x,y'")
        if flags.get("T"):
            p.add_argument("--T", type=int, default=flags["T"], help="iterations")
        if flags.get("p"):
            p.add_argument("--p", type=int, required=True, help="prime")
        if flags.get("primes"):
            p.add_argument("--primes", help="comma-separated primes")
        if flags.get("scan"):
            p.add_argument("--segment", required=True, help="'x1,y1:x2,y2'")
            p.add_argument("--count", type=int, required=True)
            p.add_argument("--horizons", required=True, help="e.g. 4000,16000")
            p.add_argument("--allow-long", action="store_true")
        if flags.get("window"):
            p.add_argument("--window", type=int, default=200)
        if flags.get("precision"):
            p.add_argument("--precision", type=int, default=128, help="bits")
        if flags.get("N"):
            p.add_argument("--N", type=int, required=True)
        if flags.get("seed"):
            p.add_argument("--seed", type=int, default=None)
        if flags.get("out") == "req":
            p.add_argument("--out", required=True, help="output path")
        else:
            p.add_argument("--out", default=None, help="output path (default stdout)")
        p.set_defaults(fn=fn)
        return p

    add("orbit", _cmd_orbit, map=True, z0="req", T=1000, seed=True, out="req")
    add("trace", _cmd_trace, map=True, z0="req", T=1000, p=True, seed=True, out="req")
    add("scan", _cmd_scan, map=True, p=True, scan=True, seed=True, out="req")
    add("variation", _cmd_variation, map=True, p=True, scan=True, seed=True, out="req")
    add("island", _cmd_island, map=True, z0="req", primes=True, window=True,
        precision=True)
    add("predict", _cmd_predict, map=True, z0="opt", primes=True, T=2000,
        window=True, precision=True)
    add("phase-module", _cmd_phase_module, map=True)
    add("enumerate", _cmd_enumerate, N=True)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except PreconditionError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except HeightDynError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
