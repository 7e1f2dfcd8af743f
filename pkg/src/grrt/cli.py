"""Benchmark CLI.

    bench run --config suite.json --out results/
    bench summarize --in results/
    bench verify --out results/ [--fast]
    bench problem --kind narrow_passage --dim 4 --emit problem.json
"""

from __future__ import annotations

import argparse
import os
import sys

from .analysis import run_verification
from .bench import (
    default_time_grid,
    dump_json,
    emit,
    load_json,
    records_from_csv,
    run_suite,
    summarize,
)
from .worlds import make_problem, save_problem


def _cmd_run(args) -> int:
    with open(args.config, encoding="utf-8") as fh:
        config = load_json(fh.read())
    records = run_suite(config, workers=args.workers)
    limit = config["suite"].get("time_limit_s")
    grid = default_time_grid(limit) if limit else None
    table = summarize(records, time_grid=grid)
    written = emit(records, table, args.out)
    for path in written:
        print(path)
    return 0


def _cmd_summarize(args) -> int:
    trials_path = os.path.join(args.in_dir, "trials.csv")
    with open(trials_path, encoding="utf-8") as fh:
        records = records_from_csv(fh.read())
    table = summarize(records)
    out_dir = args.out or args.in_dir
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, "summary.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(table.to_doc()))
    print(path)
    return 0


def _cmd_verify(args) -> int:
    report = run_verification(seed=args.seed, fast=args.fast)
    os.makedirs(args.out, exist_ok=True)
    path = os.path.join(args.out, "verification.json")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(dump_json(report))
    print(path)
    for key in ("geometry", "measure_algebra", "worst_case_factor", "mixed_factor", "containment"):
        status = "pass" if report[key]["pass"] else "FAIL"
        print(f"{key}: {status}")
    return 0 if report["pass"] else 1


def _cmd_problem(args) -> int:
    problem = make_problem(args.kind, args.dim, collision_resolution=args.resolution)
    text = save_problem(problem)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(text)
        print(args.emit)
    else:
        print(text)
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="bench", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a benchmark suite")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--workers", type=int, default=None)
    p_run.set_defaults(func=_cmd_run)

    p_sum = sub.add_parser("summarize", help="summarize an emitted trials.csv")
    p_sum.add_argument("--in", dest="in_dir", required=True)
    p_sum.add_argument("--out", default=None)
    p_sum.set_defaults(func=_cmd_summarize)

    p_ver = sub.add_parser("verify", help="run the theorem verification suite")
    p_ver.add_argument("--out", required=True)
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--fast", action="store_true", help="smaller sample counts")
    p_ver.set_defaults(func=_cmd_verify)

    p_prob = sub.add_parser("problem", help="emit a benchmark problem document")
    p_prob.add_argument("--kind", required=True)
    p_prob.add_argument("--dim", type=int, required=True)
    p_prob.add_argument("--emit", default=None)
    p_prob.add_argument("--resolution", type=float, default=1e-3)
    p_prob.set_defaults(func=_cmd_problem)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
