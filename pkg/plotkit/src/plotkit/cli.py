"""Command line front end.

    plotkit --summary results/summary.json --out figs/
    plotkit --summary results/summary.json --out figs/ --planners grrt_star --dims 4
"""

from __future__ import annotations

import argparse
import sys

from .render import FigureSpec, render


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="plotkit", description=__doc__)
    parser.add_argument("--summary", required=True, help="summary.json from the benchmark harness")
    parser.add_argument("--out", required=True, help="output directory for figures")
    parser.add_argument("--planners", default=None, help="comma-separated planner ids")
    parser.add_argument("--problems", default=None, help="comma-separated problem ids")
    parser.add_argument("--dims", default=None, help="comma-separated dimensions")
    parser.add_argument("--format", default="svg", choices=("svg", "pdf", "png"))
    parser.add_argument("--linear-time", action="store_true", help="linear instead of log time axis")
    args = parser.parse_args(argv)

    spec = FigureSpec(
        summary_path=args.summary,
        out_dir=args.out,
        planners=tuple(args.planners.split(",")) if args.planners else None,
        problems=tuple(args.problems.split(",")) if args.problems else None,
        dims=tuple(int(d) for d in args.dims.split(",")) if args.dims else None,
        image_format=args.format,
        log_time=not args.linear_time,
    )
    for path in render(spec):
        print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
