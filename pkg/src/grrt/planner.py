"""Bidirectional anytime RRT* with greedy informed sampling, plus an
RRT-Connect baseline.

Two trees grow toward each other; collision-free connections between them are
recorded as solution bridges. Until a first solution exists the search runs
RRT-Connect style (nearest-only parenting, uniform sampling); afterwards
sampling is drawn from the informed spheroid bounded by the best solution
cost or, with probability epsilon, from the smaller greedy spheroid bounded
by the largest heuristic value along the best solution path. Extensions are
gated by the admissible heuristic so no vertex is added that cannot improve
the current best cost.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .geometry import (
    ProlateHyperspheroid,
    Path,
    l2_heuristic_many,
    phs_measure,
    sample_uniform_box,
    sample_uniform_phs,
)
from .tree import SearchTree, SolutionBridge, extract_path, rewire_radius
from .worlds import Problem, segment_free

VIRTUAL_TICK = 1e-4  # seconds per iteration when running without a wall clock

Observer = Callable[["Event"], None]


class ExtendStatus(Enum):
    REACHED = "reached"
    ADVANCED = "advanced"
    TRAPPED = "trapped"


@dataclass(frozen=True)
class ExtendResult:
    status: ExtendStatus
    state: np.ndarray
    vertex_id: int | None


@dataclass(frozen=True)
class Event:
    elapsed_s: float
    cost: float
    tag: str  # initial | improvement | final


class SampleBudgetExceeded(RuntimeError):
    pass


@dataclass
class PlannerConfig:
    epsilon: float = 0.9
    eta: float = 1.001
    max_edge: float | None = None  # None -> 0.2 x domain diagonal
    rewire_enabled_after_first_solution: bool = True
    rewire_before_first_solution: bool = False
    prune_enabled: bool = True
    balanced_extension: bool = True
    cmax_over_all_bridges: bool = True  # False -> best bridge ancestry only
    sample_retry_factor: int = 100
    seed: int = 0
    time_limit_s: float | None = None
    iteration_limit: int | None = None

    def __post_init__(self):
        if not 0.0 <= self.epsilon <= 1.0:
            raise ValueError("epsilon must lie in [0, 1]")
        if self.max_edge is not None and self.max_edge <= 0:
            raise ValueError("max_edge must be positive")

    def resolved_max_edge(self, problem: Problem) -> float:
        return self.max_edge if self.max_edge is not None else 0.2 * problem.diagonal


class _Clock:
    """Wall clock, or a deterministic per-iteration virtual clock when only an
    iteration limit is given."""

    def __init__(self, wall: bool):
        self.wall = wall
        self._t0 = time.perf_counter() if wall else 0.0
        self.iteration = 0

    def elapsed(self) -> float:
        if self.wall:
            return time.perf_counter() - self._t0
        return self.iteration * VIRTUAL_TICK


class PlannerState:
    """Mutable search state: both trees, recorded bridges, and cost latches."""

    def __init__(self, problem: Problem, config: PlannerConfig):
        self.problem = problem
        self.config = config
        self.tree_a = SearchTree(problem.start)
        self.tree_b = SearchTree(problem.goal)
        self._pending: list[tuple[int, int, float]] = []  # bridges not yet in the arrays
        self._bridge_a = np.empty(0, dtype=np.int64)
        self._bridge_b = np.empty(0, dtype=np.int64)
        self._bridge_gap = np.empty(0)  # fixed edge length of each bridge
        self.c_best_latch = math.inf  # best bridge cost seen by the greedy branch
        self.c_max_latch = math.inf  # greedy transverse diameter at last latch update
        self.c_i = math.inf  # current best bridge cost
        self.events: list[Event] = []
        self.extend_log: list[str] = []  # which tree extended, per iteration
        self.initial_path: Path | None = None
        self.base_phs = ProlateHyperspheroid.from_foci(
            problem.start, problem.goal, float(np.linalg.norm(problem.goal - problem.start))
        )
        self.iterations = 0

    @property
    def bridge_count(self) -> int:
        return self._bridge_a.size + len(self._pending)

    @property
    def bridges(self) -> list[SolutionBridge]:
        self._flush_bridges()
        return [SolutionBridge(int(a), int(b)) for a, b in zip(self._bridge_a, self._bridge_b)]

    def add_bridge(self, a_id: int, b_id: int) -> None:
        gap = float(np.linalg.norm(self.tree_a.state(a_id) - self.tree_b.state(b_id)))
        self._pending.append((a_id, b_id, gap))

    def _flush_bridges(self) -> None:
        if not self._pending:
            return
        a, b, gap = zip(*self._pending)
        self._pending.clear()
        self._bridge_a = np.concatenate([self._bridge_a, np.asarray(a, dtype=np.int64)])
        self._bridge_b = np.concatenate([self._bridge_b, np.asarray(b, dtype=np.int64)])
        self._bridge_gap = np.concatenate([self._bridge_gap, np.asarray(gap)])

    def drop_stale_bridges(self) -> None:
        self._flush_bridges()
        if not self._bridge_a.size:
            return
        ok = self.tree_a.alive_of(self._bridge_a) & self.tree_b.alive_of(self._bridge_b)
        if not np.all(ok):
            self._bridge_a = self._bridge_a[ok]
            self._bridge_b = self._bridge_b[ok]
            self._bridge_gap = self._bridge_gap[ok]

    def bridge_costs(self) -> np.ndarray:
        return (
            self.tree_a.g_of(self._bridge_a)
            + self._bridge_gap
            + self.tree_b.g_of(self._bridge_b)
        )

    def best_bridge(self) -> tuple[SolutionBridge | None, float]:
        self.drop_stale_bridges()
        if not self._bridge_a.size:
            return None, math.inf
        costs = self.bridge_costs()
        i = int(np.argmin(costs))
        return SolutionBridge(int(self._bridge_a[i]), int(self._bridge_b[i])), float(costs[i])

    def best_path(self) -> Path | None:
        bridge, _ = self.best_bridge()
        if bridge is None:
            return None
        return extract_path(bridge, self.tree_a, self.tree_b)


def steer(x_from: np.ndarray, x_to: np.ndarray, max_edge: float) -> np.ndarray:
    """x_to if it is within max_edge, else the point max_edge along the
    segment toward it."""
    if max_edge <= 0:
        raise ValueError("max_edge must be positive")
    d = float(np.linalg.norm(x_to - x_from))
    if d <= max_edge:
        return x_to.copy()
    return x_from + (max_edge / d) * (x_to - x_from)


def _ancestry_fhat_max(tree: SearchTree, ids: np.ndarray, x_start, x_goal) -> float:
    """Largest heuristic value over the given vertices and all their ancestors."""
    fmax = -math.inf
    cur = np.unique(ids)
    while cur.size:
        fmax = max(fmax, float(np.max(l2_heuristic_many(tree.states_of(cur), x_start, x_goal))))
        parents = tree.parents_of(cur)
        cur = np.unique(parents[parents >= 0])
    return fmax


def compute_best_cost(state: PlannerState, rng: np.random.Generator) -> tuple[float, bool]:
    """One evaluation of the per-iteration cost bound.

    Returns (bound, latch_improved). With no recorded solution the bound is
    infinite. Otherwise, with probability epsilon the greedy branch fires: it
    refreshes the latches if the best bridge cost improved and returns the
    greedy transverse diameter; the other branch returns the plain best bridge
    cost. The returned bound feeds both sampling and the extension gate.
    """
    state.drop_stale_bridges()
    if not state._bridge_a.size:
        state.c_i = math.inf
        return math.inf, False
    costs = state.bridge_costs()
    state.c_i = float(np.min(costs))
    improved = False
    if state.config.epsilon > rng.random():
        if state.c_i < state.c_best_latch:
            state.c_best_latch = state.c_i
            p = state.problem
            if state.config.cmax_over_all_bridges:
                ids_a, ids_b = state._bridge_a, state._bridge_b
            else:
                i = int(np.argmin(costs))
                ids_a, ids_b = state._bridge_a[i : i + 1], state._bridge_b[i : i + 1]
            state.c_max_latch = max(
                _ancestry_fhat_max(state.tree_a, ids_a, p.start, p.goal),
                _ancestry_fhat_max(state.tree_b, ids_b, p.start, p.goal),
            )
            improved = True
        return state.c_max_latch, improved
    state.c_best_latch = state.c_i
    return state.c_i, False


def sample(state: PlannerState, c: float, rng: np.random.Generator) -> np.ndarray:
    """Informed sample: uniform over the cost-c spheroid intersected with the
    bounds, or uniform over the bounds while no solution exists.

    Rejection runs in whichever direction has the better acceptance rate --
    spheroid draws filtered by the bounds when the spheroid is the smaller
    set, box draws filtered by the heuristic when it is the larger one. Both
    yield the same uniform distribution on the intersection.
    """
    p = state.problem
    bounds = p.bounds
    if c == math.inf:
        return sample_uniform_box(bounds.low, bounds.high, rng)
    phs = state.base_phs.with_transverse(max(c, state.base_phs.d_min))
    budget = state.config.sample_retry_factor * p.dim
    box_volume = float(np.prod(bounds.high - bounds.low))
    if phs_measure(phs) <= box_volume:
        for _ in range(budget):
            x = sample_uniform_phs(phs, rng)
            if bounds.contains(x):
                return x
    else:
        for _ in range(budget):
            x = sample_uniform_box(bounds.low, bounds.high, rng)
            if np.linalg.norm(x - p.start) + np.linalg.norm(x - p.goal) <= c:
                return x
    raise SampleBudgetExceeded(
        f"no sample in the cost-bounded region after {budget} draws "
        f"(transverse {c:.6g}, focal distance {phs.d_min:.6g})"
    )


def extend_star(
    tree: SearchTree,
    x: np.ndarray,
    other_root: np.ndarray,
    c_i: float,
    problem: Problem,
    config: PlannerConfig,
    rewire_allowed: bool,
    max_edge: float,
) -> ExtendResult:
    """Steer from the nearest vertex toward x and insert the new state with
    best-parent selection and local rewiring (when enabled).

    The admissible gate rejects the extension outright when even the
    optimistic cost through the new state cannot beat c_i; this also skips
    the collision check.
    """
    nearest_id = tree.nearest(x)
    x_nearest = tree.state(nearest_id)
    x_new = steer(x_nearest, x, max_edge)
    edge = float(np.linalg.norm(x_new - x_nearest))
    h_hat = float(np.linalg.norm(x_new - other_root))
    if not tree.g(nearest_id) + edge + h_hat < c_i:
        return ExtendResult(ExtendStatus.TRAPPED, x_new, None)
    if not segment_free(problem, x_nearest, x_new):
        return ExtendResult(ExtendStatus.TRAPPED, x_new, None)

    near_ids = np.empty(0, dtype=np.int64)
    parent = nearest_id
    best_g = tree.g(nearest_id) + edge
    if rewire_allowed:
        r = rewire_radius(
            tree.live_count,
            problem.dim,
            free_measure_bound=float(np.prod(problem.bounds.high - problem.bounds.low)),
            eta=config.eta,
            max_edge=max_edge,
        )
        if r > 0.0:
            near_ids = tree.near(x_new, r)
        if near_ids.size:
            near_d = np.linalg.norm(tree.states_of(near_ids) - x_new, axis=1)
            cand_g = tree.g_of(near_ids) + near_d
            for k in np.lexsort((near_ids, cand_g)):
                if cand_g[k] >= best_g:
                    break
                if segment_free(problem, tree.state(int(near_ids[k])), x_new):
                    parent = int(near_ids[k])
                    best_g = float(cand_g[k])
                    break

    new_id = tree.add_child(parent, x_new)
    if near_ids.size:
        g_new = tree.g(new_id)
        for k in range(near_ids.size):
            nid = int(near_ids[k])
            if nid == parent:
                continue
            if g_new + near_d[k] < tree.g(nid):
                if segment_free(problem, x_new, tree.state(nid)):
                    tree.rewire_parent(nid, new_id)

    status = ExtendStatus.REACHED if np.array_equal(x_new, x) else ExtendStatus.ADVANCED
    return ExtendResult(status, x_new, new_id)


def connect_star(
    tree: SearchTree,
    x: np.ndarray,
    other_root: np.ndarray,
    c_i: float,
    problem: Problem,
    config: PlannerConfig,
    rewire_allowed: bool,
    max_edge: float,
) -> ExtendResult:
    """Extend repeatedly toward a fixed target until reached or trapped."""
    cap = max(1, math.ceil(4.0 * problem.diagonal / max_edge))
    res = ExtendResult(ExtendStatus.TRAPPED, x, None)
    for _ in range(cap):
        res = extend_star(tree, x, other_root, c_i, problem, config, rewire_allowed, max_edge)
        if res.status is not ExtendStatus.ADVANCED:
            return res
    return ExtendResult(ExtendStatus.TRAPPED, res.state, None)


@dataclass
class PlanResult:
    state: PlannerState
    path: Path | None
    events: list[Event] = field(default_factory=list)

    @property
    def cost(self) -> float:
        return self.path.cost if self.path is not None else math.inf


def _rng_streams(seed: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Independent streams: one for planning draws, one left for
    post-processing so diagnostics never perturb the search."""
    plan_ss, post_ss = np.random.SeedSequence(seed).spawn(2)
    return np.random.default_rng(plan_ss), np.random.default_rng(post_ss)


def shortcut_rng(seed: int) -> np.random.Generator:
    return _rng_streams(seed)[1]


def _should_stop(config: PlannerConfig, clock: _Clock) -> bool:
    if config.time_limit_s is not None and clock.elapsed() >= config.time_limit_s:
        return True
    if config.iteration_limit is not None and clock.iteration >= config.iteration_limit:
        return True
    return False


def _emit(state: PlannerState, observer: Observer | None, event: Event) -> None:
    state.events.append(event)
    if observer is not None:
        observer(event)


def grrt_star_plan(
    problem: Problem, config: PlannerConfig, observer: Observer | None = None
) -> PlanResult:
    """Anytime bidirectional informed RRT* search.

    Emits an event whenever the best solution cost improves and a final event
    at termination; the cost stream is non-increasing. Deterministic given
    (problem, config.seed) when running under an iteration limit.
    """
    if config.time_limit_s is None and config.iteration_limit is None:
        raise ValueError("config needs a time limit or an iteration limit")
    rng, _ = _rng_streams(config.seed)
    max_edge = config.resolved_max_edge(problem)
    state = PlannerState(problem, config)
    clock = _Clock(wall=config.time_limit_s is not None)
    ext, con = state.tree_a, state.tree_b
    best_reported = math.inf

    while not _should_stop(config, clock):
        clock.iteration += 1
        state.iterations = clock.iteration
        c_ret, latch_improved = compute_best_cost(state, rng)
        if state.c_i < best_reported:
            tag = "initial" if best_reported == math.inf else "improvement"
            best_reported = state.c_i
            if tag == "initial":
                state.initial_path = state.best_path()
            _emit(state, observer, Event(clock.elapsed(), best_reported, tag))
        if latch_improved and config.prune_enabled:
            p = state.problem
            state.tree_a.prune(state.c_max_latch, p.start, p.goal)
            state.tree_b.prune(state.c_max_latch, p.start, p.goal)
        has_solution = state.bridge_count > 0
        rewire_allowed = (
            config.rewire_enabled_after_first_solution
            if has_solution
            else config.rewire_before_first_solution
        )
        x_rand = sample(state, c_ret, rng)
        state.extend_log.append("a" if ext is state.tree_a else "b")
        res_a = extend_star(ext, x_rand, con.root_state, c_ret, problem, config, rewire_allowed, max_edge)
        if res_a.status is not ExtendStatus.TRAPPED:
            res_b = connect_star(
                con, res_a.state, ext.root_state, c_ret, problem, config, rewire_allowed, max_edge
            )
            if res_b.status is ExtendStatus.REACHED:
                if ext is state.tree_a:
                    state.add_bridge(res_a.vertex_id, res_b.vertex_id)
                else:
                    state.add_bridge(res_b.vertex_id, res_a.vertex_id)
        ext, con = con, ext
        if config.balanced_extension:
            small, big = (
                (state.tree_a, state.tree_b)
                if state.tree_a.live_count <= state.tree_b.live_count
                else (state.tree_b, state.tree_a)
            )
            if big.live_count > 2 * small.live_count:
                ext, con = small, big

    _, final_cost = state.best_bridge()
    if final_cost < best_reported:
        tag = "initial" if best_reported == math.inf else "improvement"
        best_reported = final_cost
        if tag == "initial":
            state.initial_path = state.best_path()
        _emit(state, observer, Event(clock.elapsed(), best_reported, tag))
    _emit(state, observer, Event(clock.elapsed(), best_reported, "final"))
    return PlanResult(state=state, path=state.best_path(), events=state.events)


def rrt_connect_plan(
    problem: Problem, config: PlannerConfig, observer: Observer | None = None
) -> PlanResult:
    """Feasibility baseline: bidirectional RRT-Connect. Uniform sampling, no
    gating, nearest-only parenting; terminates at the first solution."""
    if config.time_limit_s is None and config.iteration_limit is None:
        raise ValueError("config needs a time limit or an iteration limit")
    rng, _ = _rng_streams(config.seed)
    max_edge = config.resolved_max_edge(problem)
    state = PlannerState(problem, config)
    clock = _Clock(wall=config.time_limit_s is not None)
    ext, con = state.tree_a, state.tree_b

    while not _should_stop(config, clock):
        clock.iteration += 1
        state.iterations = clock.iteration
        x_rand = sample_uniform_box(problem.bounds.low, problem.bounds.high, rng)
        res_a = extend_star(ext, x_rand, con.root_state, math.inf, problem, config, False, max_edge)
        if res_a.status is not ExtendStatus.TRAPPED:
            res_b = connect_star(con, res_a.state, ext.root_state, math.inf, problem, config, False, max_edge)
            if res_b.status is ExtendStatus.REACHED:
                if ext is state.tree_a:
                    state.add_bridge(res_a.vertex_id, res_b.vertex_id)
                else:
                    state.add_bridge(res_b.vertex_id, res_a.vertex_id)
                break
        ext, con = con, ext

    bridge, cost = state.best_bridge()
    if bridge is not None:
        state.c_i = cost
        state.initial_path = state.best_path()
        _emit(state, observer, Event(clock.elapsed(), cost, "initial"))
    _emit(state, observer, Event(clock.elapsed(), cost if bridge else math.inf, "final"))
    return PlanResult(state=state, path=state.best_path(), events=state.events)
