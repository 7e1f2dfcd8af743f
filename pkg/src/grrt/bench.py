"""Deterministic benchmark harness: multi-seed trials, cost-vs-time traces,
nonparametric median confidence intervals, CSV/JSON emission.

A suite config fully determines every output byte (given an iteration-limited
clock); trials are independent and may run on a process pool. Shortcutting is
applied exactly twice per trial, to the initial and to the final solution,
and never feeds back into planning.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from .planner import (
    Event,
    PlannerConfig,
    grrt_star_plan,
    rrt_connect_plan,
    shortcut_rng,
)
from .shortcut import shortcut
from .worlds import HyperRect, Problem, load_problem, make_problem

CSV_HEADER = ["planner", "problem", "dim", "seed", "elapsed_s", "cost", "tag"]
SUMMARY_FORMAT = 1
CONFIG_FORMAT = 1

_ALGORITHMS = {"grrt_star": grrt_star_plan, "rrt_connect": rrt_connect_plan}

_PLANNER_FIELDS = (
    "epsilon",
    "eta",
    "max_edge",
    "rewire_enabled_after_first_solution",
    "rewire_before_first_solution",
    "prune_enabled",
    "balanced_extension",
    "cmax_over_all_bridges",
    "sample_retry_factor",
)


@dataclass
class TrialRecord:
    planner: str
    problem: str
    dim: int
    seed: int
    events: list[Event]
    simplified_initial_cost: float | None = None
    simplified_final_cost: float | None = None

    def __post_init__(self):
        times = [e.elapsed_s for e in self.events]
        if times != sorted(times):
            raise ValueError("events must be time-sorted")
        costs = [e.cost for e in self.events]
        if any(a < b for a, b in zip(costs, costs[1:])):
            raise ValueError("cost stream must be non-increasing")
        tags = [e.tag for e in self.events]
        if tags.count("initial") > 1 or tags.count("final") != 1:
            raise ValueError("need at most one initial and exactly one final event")

    def cost_at(self, t: float) -> float:
        cost = math.inf
        for e in self.events:
            if e.elapsed_s <= t:
                cost = e.cost
            else:
                break
        return cost

    @property
    def final_cost(self) -> float:
        return self.events[-1].cost


def _build_problem(spec: dict) -> Problem:
    if "file" in spec:
        with open(spec["file"], encoding="utf-8") as fh:
            return load_problem(fh.read())
    kind = spec["kind"]
    n = int(spec["dim"])
    params = dict(spec.get("params", {}))
    resolution = float(spec.get("resolution", 1e-3))
    if kind == "empty":
        start = np.zeros(n)
        goal = np.zeros(n)
        start[0], goal[0] = -0.3, 0.3
        return Problem(
            bounds=HyperRect(np.full(n, -0.5), np.full(n, 0.5)),
            obstacles=(),
            start=start,
            goal=goal,
            collision_resolution=resolution,
            name="empty",
        )
    return make_problem(kind, n, collision_resolution=resolution, **params)


def _planner_config(planner_spec: dict, suite: dict, seed: int) -> PlannerConfig:
    kwargs = {k: planner_spec[k] for k in _PLANNER_FIELDS if k in planner_spec}
    return PlannerConfig(
        seed=seed,
        time_limit_s=suite.get("time_limit_s"),
        iteration_limit=suite.get("iteration_limit"),
        **kwargs,
    )


def _run_trial(task: dict) -> TrialRecord:
    problem = _build_problem(task["problem_spec"])
    config = _planner_config(task["planner_spec"], task["suite"], task["seed"])
    algorithm = task["planner_spec"].get("algorithm", "grrt_star")
    result = _ALGORITHMS[algorithm](problem, config)
    rng = shortcut_rng(task["seed"])
    iterations = task["suite"].get("shortcut_iterations")
    simplified_initial = math.inf
    simplified_final = math.inf
    if result.state.initial_path is not None:
        simplified_initial = shortcut(result.state.initial_path, problem, iterations, rng).cost
    if result.path is not None:
        simplified_final = shortcut(result.path, problem, iterations, rng).cost
    return TrialRecord(
        planner=task["planner_spec"]["id"],
        problem=task["problem_spec"].get("id", task["problem_spec"].get("kind", "custom")),
        dim=problem.dim,
        seed=task["seed"],
        events=list(result.events),
        simplified_initial_cost=simplified_initial,
        simplified_final_cost=simplified_final,
    )


def run_suite(config: dict, workers: int | None = None) -> list[TrialRecord]:
    """Run every (planner, problem, seed) trial in the config.

    Deterministic given the config: per-trial seeds are seed_base + trial
    index, results come back in config order regardless of scheduling. The
    BENCH_SEED environment variable overrides seed_base.
    """
    if config.get("format") != CONFIG_FORMAT:
        raise ValueError(f"unsupported config format {config.get('format')!r}")
    suite = config["suite"]
    seed_base = int(os.environ.get("BENCH_SEED", suite.get("seed_base", 0)))
    trials = int(suite["trials"])
    for planner_spec in config["planners"]:
        if planner_spec.get("algorithm", "grrt_star") not in _ALGORITHMS:
            raise ValueError(f"unknown planner algorithm {planner_spec.get('algorithm')!r}")
        if "id" not in planner_spec:
            raise ValueError("planner spec needs an id")
    tasks = [
        {
            "planner_spec": planner_spec,
            "problem_spec": problem_spec,
            "suite": suite,
            "seed": seed_base + k,
        }
        for planner_spec in config["planners"]
        for problem_spec in config["problems"]
        for k in range(trials)
    ]
    if workers is None:
        workers = int(suite.get("workers", 1))
    if workers <= 1:
        return [_run_trial(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_trial, tasks, chunksize=1))


def median_ci_ranks(m: int, confidence: float = 0.99) -> tuple[int, int]:
    """1-indexed order-statistic ranks (l, u) with
    P(X_(l) <= median <= X_(u)) >= confidence, by the binomial argument."""
    if m < 1:
        raise ValueError("need at least one sample")
    alpha = 1.0 - confidence
    lo = int(binom.ppf(alpha / 2.0, m, 0.5))
    # ppf returns the smallest k with CDF(k) >= alpha/2, so CDF(lo - 1) < alpha/2
    lo = max(lo, 1)
    hi = m + 1 - lo
    return lo, hi


def _median(values: np.ndarray) -> float:
    return float(np.median(values))


@dataclass
class SummaryTable:
    time_grid: np.ndarray
    cells: list[dict] = field(default_factory=list)
    confidence: float = 0.99

    def to_doc(self) -> dict:
        return {
            "format": SUMMARY_FORMAT,
            "confidence": self.confidence,
            "time_grid": self.time_grid.tolist(),
            "cells": self.cells,
        }


def default_time_grid(t_max: float, points: int = 200) -> np.ndarray:
    return np.logspace(math.log10(1e-3), math.log10(max(t_max, 2e-3)), points)


def summarize(
    records: list[TrialRecord],
    time_grid: np.ndarray | None = None,
    confidence: float = 0.99,
) -> SummaryTable:
    """Per-cell success fraction, cost median, and order-statistic CI on the
    median over the time grid, plus post-shortcut initial/final medians."""
    if not records:
        raise ValueError("no records to summarize")
    t_max = max(r.events[-1].elapsed_s for r in records)
    if time_grid is None:
        time_grid = default_time_grid(t_max)
    else:
        time_grid = np.asarray(time_grid, dtype=float)
        if time_grid[-1] < t_max:
            import warnings

            warnings.warn("time grid ends before the last recorded event; clamping")
    table = SummaryTable(time_grid=time_grid, confidence=confidence)
    cells: dict[tuple[str, str, int], list[TrialRecord]] = {}
    for r in records:
        cells.setdefault((r.planner, r.problem, r.dim), []).append(r)
    for (planner, problem, dim), recs in sorted(cells.items()):
        m = len(recs)
        costs = np.array([[r.cost_at(t) for t in time_grid] for r in recs])
        success = np.mean(np.isfinite(costs), axis=0)
        with np.errstate(invalid="ignore"):
            medians = np.array([_median(costs[:, j]) for j in range(len(time_grid))])
        lo_rank, hi_rank = median_ci_ranks(m, confidence)
        sorted_costs = np.sort(costs, axis=0)
        ci_lower = sorted_costs[lo_rank - 1, :]
        ci_upper = sorted_costs[hi_rank - 1, :]
        init_costs = np.array(
            [math.inf if r.simplified_initial_cost is None else r.simplified_initial_cost for r in recs]
        )
        final_costs = np.array(
            [math.inf if r.simplified_final_cost is None else r.simplified_final_cost for r in recs]
        )
        table.cells.append(
            {
                "planner": planner,
                "problem": problem,
                "dim": dim,
                "trials": m,
                "seeds": [r.seed for r in recs],
                "success": success.tolist(),
                "median": medians.tolist(),
                "ci_lower": ci_lower.tolist(),
                "ci_upper": ci_upper.tolist(),
                "ci_rank_lower": lo_rank,
                "ci_rank_upper": hi_rank,
                "initial_cost_median": _median(init_costs),
                "final_cost_median": _median(final_costs),
            }
        )
    return table


# -- serialization ------------------------------------------------------------


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf"
    return repr(float(x))


def _parse(tok: str) -> float:
    return math.inf if tok == "inf" else float(tok)


def records_to_csv(records: list[TrialRecord]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in records:
        for e in r.events:
            writer.writerow(
                [r.planner, r.problem, r.dim, r.seed, _fmt(e.elapsed_s), _fmt(e.cost), e.tag]
            )
    return buf.getvalue()


def records_from_csv(text: str) -> list[TrialRecord]:
    """Rebuild records from trials.csv. The CSV carries the event streams;
    post-shortcut costs live in summary.json, so they come back as None."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != CSV_HEADER:
        raise ValueError(f"unexpected CSV header {header!r}")
    grouped: dict[tuple[str, str, int, int], list[Event]] = {}
    order: list[tuple[str, str, int, int]] = []
    for row in reader:
        planner, problem, dim, seed, elapsed, cost, tag = row
        key = (planner, problem, int(dim), int(seed))
        if key not in grouped:
            grouped[key] = []
            order.append(key)
        grouped[key].append(Event(_parse(elapsed), _parse(cost), tag))
    return [
        TrialRecord(planner=k[0], problem=k[1], dim=k[2], seed=k[3], events=grouped[k])
        for k in order
    ]


def _jsonify(obj):
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if isinstance(obj, dict):
        return {k: _jsonify(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonify(v) for v in obj]
    return obj


def _dejsonify(obj):
    if obj == "inf":
        return math.inf
    if obj == "-inf":
        return -math.inf
    if isinstance(obj, dict):
        return {k: _dejsonify(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_dejsonify(v) for v in obj]
    return obj


def dump_json(doc: dict) -> str:
    return json.dumps(_jsonify(doc), indent=2, allow_nan=False)


def load_json(text: str) -> dict:
    return _dejsonify(json.loads(text))


def emit(
    records: list[TrialRecord],
    table: SummaryTable | None,
    out_dir: str,
    verification: dict | None = None,
) -> list[str]:
    """Write trials.csv, summary.json, and (if given) verification.json."""
    os.makedirs(out_dir, exist_ok=True)
    written = []
    path = os.path.join(out_dir, "trials.csv")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(records_to_csv(records))
    written.append(path)
    if table is not None:
        path = os.path.join(out_dir, "summary.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_json(table.to_doc()))
        written.append(path)
    if verification is not None:
        path = os.path.join(out_dir, "verification.json")
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(dump_json(verification))
        written.append(path)
    return written
