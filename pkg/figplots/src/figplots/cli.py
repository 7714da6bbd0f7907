"""plot --kind trace --in trace.csv --out fig3.png"""

from __future__ import annotations

import argparse
import sys

from .render import KINDS, PlotJob, SchemaError, render


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(
        prog="plot", description="Render experiment CSV files to figures."
    )
    ap.add_argument("--kind", required=True, choices=KINDS)
    ap.add_argument(
        "--in", dest="inputs", required=True, action="append",
        help="input CSV (repeatable to overlay)",
    )
    ap.add_argument("--out", required=True, help="output image path")
    args = ap.parse_args(argv)
    try:
        render(PlotJob(args.kind, tuple(args.inputs), args.out))
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
