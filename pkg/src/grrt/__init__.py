"""Anytime bidirectional RRT* with greedy informed sampling.

Ships the planner, axis-aligned benchmark worlds, a randomized shortcutter,
Monte-Carlo verification of the sampling-complexity bounds, and a
deterministic benchmark harness (CLI: ``bench``).
"""

from .geometry import (
    Path,
    ProlateHyperspheroid,
    greedy_transverse_diameter,
    l2_heuristic,
    phs_measure,
    sample_uniform_box,
    sample_uniform_phs,
    unit_ball_measure,
)
from .neighbors import NearestNeighborIndex
from .planner import (
    Event,
    ExtendStatus,
    PlannerConfig,
    PlannerState,
    PlanResult,
    grrt_star_plan,
    rrt_connect_plan,
)
from .shortcut import shortcut
from .tree import SearchTree, SolutionBridge, extract_path, rewire_radius
from .worlds import HyperRect, Problem, is_free, load_problem, make_problem, save_problem, segment_free

__all__ = [
    "Event",
    "ExtendStatus",
    "HyperRect",
    "NearestNeighborIndex",
    "Path",
    "PlanResult",
    "PlannerConfig",
    "PlannerState",
    "Problem",
    "ProlateHyperspheroid",
    "SearchTree",
    "SolutionBridge",
    "extract_path",
    "greedy_transverse_diameter",
    "grrt_star_plan",
    "is_free",
    "l2_heuristic",
    "load_problem",
    "make_problem",
    "phs_measure",
    "rewire_radius",
    "rrt_connect_plan",
    "sample_uniform_box",
    "sample_uniform_phs",
    "save_problem",
    "segment_free",
    "shortcut",
    "unit_ball_measure",
]

__version__ = "0.1.0"
