import math

import numpy as np
import pytest

import grrt.planner as planner_mod
from grrt.planner import (
    ExtendStatus,
    PlannerConfig,
    PlannerState,
    compute_best_cost,
    connect_star,
    extend_star,
    grrt_star_plan,
    rrt_connect_plan,
    sample,
    steer,
)
from grrt.geometry import l2_heuristic, l2_heuristic_many
from grrt.tree import ROOT
from grrt.worlds import HyperRect, Problem, make_problem


def empty_problem(n=2):
    return Problem(
        bounds=HyperRect(np.full(n, -0.5), np.full(n, 0.5)),
        obstacles=(),
        start=np.concatenate([[-0.3], np.zeros(n - 1)]),
        goal=np.concatenate([[0.3], np.zeros(n - 1)]),
        name="empty",
    )


# -- steer ---------------------------------------------------------------


def test_steer_within_range_returns_target():
    out = steer(np.zeros(2), np.array([0.05, 0.0]), 0.1)
    assert np.array_equal(out, [0.05, 0.0])


def test_steer_clips_to_midpoint():
    out = steer(np.zeros(2), np.array([0.4, 0.0]), 0.2)
    assert np.allclose(out, [0.2, 0.0], atol=1e-12)


def test_steer_stays_on_segment():
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b = rng.normal(size=(2, 3))
        out = steer(a, b, 0.3)
        d_ab = np.linalg.norm(b - a)
        d_ao = np.linalg.norm(out - a)
        d_ob = np.linalg.norm(b - out)
        assert d_ao + d_ob == pytest.approx(d_ab, abs=1e-9)


def test_steer_identical_points():
    a = np.array([0.1, 0.2])
    assert np.array_equal(steer(a, a, 0.5), a)


# -- compute_best_cost -----------------------------------------------------


def test_compute_best_cost_no_bridges_is_infinite():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    c, improved = compute_best_cost(state, np.random.default_rng(0))
    assert c == math.inf and not improved


def test_compute_best_cost_epsilon_zero_returns_bridge_cost():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(epsilon=0.0, iteration_limit=1))
    a = state.tree_a.add_child(ROOT, np.array([-0.1, 0.2]))
    b = state.tree_b.add_child(ROOT, np.array([0.1, 0.2]))
    state.add_bridge(a, b)
    rng = np.random.default_rng(1)
    for _ in range(20):
        c, improved = compute_best_cost(state, rng)
        assert c == pytest.approx(state.c_i, abs=1e-12)
        assert not improved
    assert state.c_max_latch == math.inf  # greedy branch never fired


def test_compute_best_cost_greedy_branch_hand_value():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(epsilon=1.0, iteration_limit=1))
    a = state.tree_a.add_child(ROOT, np.array([-0.1, 0.2]))
    b = state.tree_b.add_child(ROOT, np.array([0.1, 0.2]))
    state.add_bridge(a, b)
    c, improved = compute_best_cost(state, np.random.default_rng(2))
    # bridge cost: two legs of sqrt(0.08) plus the 0.2 gap
    assert state.c_i == pytest.approx(2 * math.sqrt(0.08) + 0.2, abs=1e-12)
    # ancestry heuristic max: endpoints beat the roots (0.6)
    expected = math.sqrt(0.08) + math.sqrt(0.2)
    assert improved
    assert c == pytest.approx(expected, abs=1e-12)
    assert c <= state.c_i
    # second call: no improvement, returns the stale latch
    c2, improved2 = compute_best_cost(state, np.random.default_rng(3))
    assert not improved2 and c2 == pytest.approx(expected, abs=1e-12)


def test_compute_best_cost_best_bridge_scope():
    p = empty_problem()
    cfg = PlannerConfig(epsilon=1.0, iteration_limit=1, cmax_over_all_bridges=False)
    state = PlannerState(p, cfg)
    a1 = state.tree_a.add_child(ROOT, np.array([-0.1, 0.0]))
    b1 = state.tree_b.add_child(ROOT, np.array([0.1, 0.0]))
    a2 = state.tree_a.add_child(ROOT, np.array([-0.1, 0.45]))
    b2 = state.tree_b.add_child(ROOT, np.array([0.1, 0.45]))
    state.add_bridge(a1, b1)
    state.add_bridge(a2, b2)  # worse bridge, larger heuristic spread
    c, _ = compute_best_cost(state, np.random.default_rng(4))
    only_best = max(
        l2_heuristic(np.array([-0.1, 0.0]), p.start, p.goal),
        l2_heuristic(p.start, p.start, p.goal),
        l2_heuristic(np.array([0.1, 0.0]), p.start, p.goal),
    )
    assert c == pytest.approx(only_best, abs=1e-12)
    all_bridges = l2_heuristic(np.array([-0.1, 0.45]), p.start, p.goal)
    assert c < all_bridges  # scope restriction really narrowed the max


# -- sample ----------------------------------------------------------------


def test_sample_infinite_cost_is_uniform_box():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    rng = np.random.default_rng(5)
    pts = np.array([sample(state, math.inf, rng) for _ in range(2000)])
    assert np.all(pts >= -0.5) and np.all(pts <= 0.5)
    assert abs(pts.mean()) < 0.02


def test_sample_finite_cost_respects_heuristic_and_bounds():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    rng = np.random.default_rng(6)
    pts = np.array([sample(state, 0.9, rng) for _ in range(10000)])
    fhat = l2_heuristic_many(pts, p.start, p.goal)
    assert np.all(fhat <= 0.9 + 1e-9)
    assert np.all(pts >= -0.5) and np.all(pts <= 0.5)


def test_sample_acceptance_rate_matches_measure_ratio():
    # spheroid much larger than the bounds: acceptance ~ box volume / spheroid volume
    from grrt.geometry import ProlateHyperspheroid, phs_measure, sample_uniform_phs

    p = empty_problem()
    phs = ProlateHyperspheroid.from_foci(p.start, p.goal, 3.0)
    rng = np.random.default_rng(7)
    m = 40000
    hits = 0
    for _ in range(m):
        x = sample_uniform_phs(phs, rng)
        if p.bounds.contains(x):
            hits += 1
    assert hits / m == pytest.approx(1.0 / phs_measure(phs), rel=0.05)


# -- extend / connect --------------------------------------------------------


def test_extend_reaches_nearby_state():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    x = np.array([-0.25, 0.05])
    res = extend_star(state.tree_a, x, p.goal, math.inf, p, state.config, False, 0.2)
    assert res.status is ExtendStatus.REACHED
    assert np.array_equal(res.state, x)
    assert state.tree_a.live_count == 2


def test_extend_trapped_by_wall():
    p = make_problem("narrow_passage", 2)
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    state.tree_a.add_child(ROOT, np.array([-0.06, 0.2]))
    res = extend_star(
        state.tree_a, np.array([0.06, 0.2]), p.goal, math.inf, p, state.config, False, 0.2
    )
    assert res.status is ExtendStatus.TRAPPED


def test_extend_gate_rejects_without_collision_check(monkeypatch):
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(iteration_limit=1))

    def boom(*args, **kwargs):
        raise AssertionError("collision check should be gated away")

    monkeypatch.setattr(planner_mod, "segment_free", boom)
    res = extend_star(
        state.tree_a, np.array([-0.2, 0.1]), p.goal, 0.1, p, state.config, False, 0.2
    )
    assert res.status is ExtendStatus.TRAPPED
    assert state.tree_a.live_count == 1


def test_connect_marches_to_target():
    p = empty_problem()
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    x = np.array([-0.3 + 3.5 * 0.1, 0.0])
    res = connect_star(state.tree_a, x, p.goal, math.inf, p, state.config, False, 0.1)
    assert res.status is ExtendStatus.REACHED
    assert state.tree_a.live_count == 5  # root + 4 extensions
    assert res.status is not ExtendStatus.ADVANCED


def test_connect_trapped_by_wall():
    p = make_problem("narrow_passage", 2)
    state = PlannerState(p, PlannerConfig(iteration_limit=1))
    res = connect_star(state.tree_a, np.array([0.3, 0.2]), p.goal, math.inf, p, state.config, False, 0.1)
    assert res.status is ExtendStatus.TRAPPED


# -- full planner ------------------------------------------------------------


def test_grrt_star_finds_straight_line_in_empty_world():
    p = empty_problem()
    cfg = PlannerConfig(seed=1, iteration_limit=1500)
    result = grrt_star_plan(p, cfg)
    assert result.path is not None
    assert result.cost >= 0.6 - 1e-9
    assert result.cost < 0.75


def test_grrt_star_event_stream_monotone_and_tagged():
    p = empty_problem()
    result = grrt_star_plan(p, PlannerConfig(seed=2, iteration_limit=1500))
    costs = [e.cost for e in result.events]
    assert all(a >= b - 1e-12 for a, b in zip(costs, costs[1:]))
    tags = [e.tag for e in result.events]
    assert tags.count("initial") == 1
    assert tags.count("final") == 1
    assert tags[-1] == "final"
    times = [e.elapsed_s for e in result.events]
    assert times == sorted(times)


def test_grrt_star_deterministic_given_seed():
    p = make_problem("narrow_passage", 2)
    cfg = PlannerConfig(seed=42, iteration_limit=2500)
    r1 = grrt_star_plan(p, cfg)
    r2 = grrt_star_plan(p, cfg)
    assert [(e.elapsed_s, e.cost, e.tag) for e in r1.events] == [
        (e.elapsed_s, e.cost, e.tag) for e in r2.events
    ]
    if r1.path is not None:
        assert np.array_equal(r1.path.states, r2.path.states)


def test_grrt_star_epsilon_zero_never_fires_greedy_branch():
    p = empty_problem()
    r = grrt_star_plan(p, PlannerConfig(seed=3, epsilon=0.0, iteration_limit=1200))
    assert r.path is not None
    assert r.state.c_max_latch == math.inf
    assert r.state.c_best_latch < math.inf
    r9 = grrt_star_plan(p, PlannerConfig(seed=3, epsilon=0.9, iteration_limit=1200))
    assert r9.state.c_max_latch < math.inf


def test_grrt_star_strict_alternation_without_balancing():
    p = empty_problem()
    cfg = PlannerConfig(seed=4, iteration_limit=500, balanced_extension=False)
    r = grrt_star_plan(p, cfg)
    expected = ["a" if i % 2 == 0 else "b" for i in range(len(r.state.extend_log))]
    assert r.state.extend_log == expected


def test_grrt_star_balanced_extension_prefers_smaller_tree():
    p = make_problem("double_enclosure", 2)
    cfg = PlannerConfig(seed=5, iteration_limit=800, balanced_extension=True)
    r = grrt_star_plan(p, cfg)
    sizes = (r.state.tree_a.live_count, r.state.tree_b.live_count)
    assert min(sizes) >= 1
    assert r.state.extend_log.count("a") != len(r.state.extend_log)


def test_grrt_star_gating_by_latch_bounds_new_vertices():
    # after a solution exists, every vertex was gated by some bound <= c_best seen
    p = empty_problem()
    r = grrt_star_plan(p, PlannerConfig(seed=6, iteration_limit=1500))
    assert r.path is not None
    # all surviving vertices obey the final greedy latch after the last prune
    latch = r.state.c_max_latch
    for tree in (r.state.tree_a, r.state.tree_b):
        ids = tree.near(np.zeros(2), 10.0)
        fh = l2_heuristic_many(tree.states_of(ids), p.start, p.goal)
        assert np.all(fh <= latch + 1e-9)


def test_rrt_connect_terminates_at_first_solution():
    p = empty_problem()
    r = rrt_connect_plan(p, PlannerConfig(seed=7, iteration_limit=5000))
    assert r.path is not None
    assert r.cost >= 0.6 - 1e-9
    tags = [e.tag for e in r.events]
    assert tags == ["initial", "final"]
    assert r.events[0].cost == r.events[1].cost
    assert r.state.bridge_count == 1


def test_rrt_connect_deterministic():
    p = make_problem("narrow_passage", 2)
    cfg = PlannerConfig(seed=8, iteration_limit=4000)
    r1 = rrt_connect_plan(p, cfg)
    r2 = rrt_connect_plan(p, cfg)
    assert r1.cost == r2.cost
    if r1.path is not None:
        assert np.array_equal(r1.path.states, r2.path.states)


def test_planner_requires_stopping_criterion():
    with pytest.raises(ValueError):
        grrt_star_plan(empty_problem(), PlannerConfig(seed=0))


def test_config_validates_epsilon():
    with pytest.raises(ValueError):
        PlannerConfig(epsilon=1.5)
