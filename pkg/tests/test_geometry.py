import math

import numpy as np
import pytest

from grrt.geometry import (
    Path,
    ProlateHyperspheroid,
    greedy_transverse_diameter,
    l2_heuristic,
    l2_heuristic_many,
    phs_measure,
    polyline_length,
    rotation_to_axis,
    sample_uniform_box,
    sample_uniform_phs,
    unit_ball_measure,
)

XI = np.array([-0.3, 0.0])
XG = np.array([0.3, 0.0])


def test_l2_heuristic_at_start_equals_focal_distance():
    assert l2_heuristic(XI, XI, XG) == pytest.approx(0.6, abs=1e-12)


def test_l2_heuristic_on_segment_equals_focal_distance():
    mid = (XI + XG) / 2
    assert l2_heuristic(mid, XI, XG) == pytest.approx(0.6, abs=1e-12)


def test_l2_heuristic_hand_value():
    # two legs of sqrt(0.3^2 + 0.4^2) = 0.5 each
    x = np.array([0.0, 0.4])
    brute = math.dist(x, XI) + math.dist(x, XG)
    assert brute == pytest.approx(1.0, abs=1e-12)
    assert l2_heuristic(x, XI, XG) == pytest.approx(1.0, abs=1e-12)


def test_l2_heuristic_dimension_mismatch():
    with pytest.raises(ValueError):
        l2_heuristic(np.array([0.0, 0.0, 0.0]), XI, XG)


def test_l2_heuristic_lower_bound_property():
    rng = np.random.default_rng(7)
    for _ in range(200):
        n = rng.integers(1, 9)
        a, b, x = rng.normal(size=(3, n))
        assert l2_heuristic(x, a, b) >= np.linalg.norm(a - b) - 1e-12


def test_l2_heuristic_polyline_upper_bound_property():
    # any polyline through x is at least as long as the heuristic at x
    rng = np.random.default_rng(8)
    for _ in range(100):
        n = int(rng.integers(2, 6))
        pts = rng.normal(size=(5, n))
        length = polyline_length(pts)
        for x in pts:
            assert l2_heuristic(x, pts[0], pts[-1]) <= length + 1e-12


def test_greedy_transverse_diameter_straight_line():
    path = Path.from_states([XI, XG])
    assert greedy_transverse_diameter(path, XI, XG) == pytest.approx(0.6, abs=1e-12)


def test_greedy_transverse_diameter_detour():
    path = Path.from_states([XI, [0.0, 0.4], XG])
    assert greedy_transverse_diameter(path, XI, XG) == pytest.approx(1.0, abs=1e-12)


def test_greedy_transverse_diameter_bounded_by_path_cost():
    rng = np.random.default_rng(9)
    for _ in range(100):
        n = int(rng.integers(2, 5))
        pts = rng.normal(size=(int(rng.integers(2, 8)), n))
        path = Path.from_states(pts)
        d = greedy_transverse_diameter(path, pts[0], pts[-1])
        assert d <= path.cost + 1e-12
        assert d >= np.linalg.norm(pts[-1] - pts[0]) - 1e-12


def test_unit_ball_measure_low_dims():
    assert unit_ball_measure(1) == pytest.approx(2.0, rel=1e-12)
    assert unit_ball_measure(2) == pytest.approx(math.pi, rel=1e-12)
    assert unit_ball_measure(3) == pytest.approx(4.0 * math.pi / 3.0, rel=1e-12)


def test_unit_ball_measure_rejects_nonpositive():
    with pytest.raises(ValueError):
        unit_ball_measure(0)


def test_path_cost_consistency_checked():
    with pytest.raises(ValueError):
        Path(states=np.array([[0.0, 0.0], [1.0, 0.0]]), cost=2.0)
    with pytest.raises(ValueError):
        Path.from_states([[0.0, 0.0]])


def test_phs_rejects_empty_spheroid():
    with pytest.raises(ValueError):
        ProlateHyperspheroid.from_foci(XI, XG, 0.5)


def test_phs_rotation_orthonormal_and_center():
    rng = np.random.default_rng(10)
    for _ in range(50):
        n = int(rng.integers(1, 12))
        a, b = rng.normal(size=(2, n))
        phs = ProlateHyperspheroid.from_foci(a, b, np.linalg.norm(b - a) * 1.5 + 0.1)
        assert np.allclose(phs.rotation.T @ phs.rotation, np.eye(n), atol=1e-9)
        assert np.allclose(phs.center, (a + b) / 2, atol=1e-12)
        if phs.d_min > 1e-9:
            assert np.allclose(phs.rotation[:, 0], (b - a) / phs.d_min, atol=1e-9)


def test_rotation_to_axis_degenerate_gives_identity():
    assert np.array_equal(rotation_to_axis(np.zeros(3)), np.eye(3))
    assert np.allclose(rotation_to_axis(np.array([2.0, 0.0, 0.0])), np.eye(3), atol=1e-12)


def test_phs_measure_1d_is_transverse_diameter():
    phs = ProlateHyperspheroid.from_foci([0.1], [0.3], 0.7)
    assert phs_measure(phs) == pytest.approx(0.7, rel=1e-12)


def test_phs_measure_degenerate_foci_is_disk():
    phs = ProlateHyperspheroid.from_foci([0.0, 0.0], [0.0, 0.0], 2.0)
    assert phs_measure(phs) == pytest.approx(math.pi, rel=1e-12)


def test_phs_measure_2d_ellipse_area():
    # ellipse area pi*a*b with a = 0.5, b = 0.4
    phs = ProlateHyperspheroid.from_foci(XI, XG, 1.0)
    assert phs_measure(phs) == pytest.approx(math.pi * 0.5 * 0.4, rel=1e-12)
    assert phs_measure(phs) == pytest.approx(0.2 * math.pi, rel=1e-12)


def test_phs_measure_monotone_in_transverse_diameter():
    base = ProlateHyperspheroid.from_foci(XI, XG, 0.6)
    prev = 0.0
    for c in np.linspace(0.61, 2.0, 25):
        m = phs_measure(base.with_transverse(c))
        assert m > prev
        prev = m


def test_sample_phs_degenerate_lies_on_focal_segment():
    rng = np.random.default_rng(11)
    phs = ProlateHyperspheroid.from_foci(XI, XG, 0.6)
    for _ in range(100):
        x = sample_uniform_phs(phs, rng)
        assert l2_heuristic(x, XI, XG) <= 0.6 + 1e-9
        assert abs(x[1]) < 1e-12
        assert -0.3 - 1e-12 <= x[0] <= 0.3 + 1e-12


def test_sample_phs_respects_heuristic_bound_n4():
    rng = np.random.default_rng(12)
    a = np.array([-0.3, 0.0, 0.0, 0.0])
    b = np.array([0.3, 0.0, 0.0, 0.0])
    phs = ProlateHyperspheroid.from_foci(a, b, 0.9)
    pts = np.array([sample_uniform_phs(phs, rng) for _ in range(20000)])
    fhat = l2_heuristic_many(pts, a, b)
    assert np.all(fhat <= 0.9 + 1e-9)


def test_sample_phs_hit_rate_matches_measure():
    # fraction of box-uniform points inside the spheroid ~= measure ratio
    rng = np.random.default_rng(13)
    phs = ProlateHyperspheroid.from_foci(XI, XG, 1.0)
    low = np.array([-0.5, -0.4])
    high = np.array([0.5, 0.4])
    m = 200000
    pts = low + rng.random((m, 2)) * (high - low)
    inside = l2_heuristic_many(pts, XI, XG) <= 1.0
    expected = phs_measure(phs) / 0.8
    assert np.mean(inside) == pytest.approx(expected, rel=0.02)


def test_sample_phs_uniformity_halves():
    # symmetric spheroid: both halves along the transverse axis equally likely
    rng = np.random.default_rng(14)
    phs = ProlateHyperspheroid.from_foci(XI, XG, 1.0)
    pts = np.array([sample_uniform_phs(phs, rng) for _ in range(20000)])
    frac = np.mean(pts[:, 0] > 0)
    assert frac == pytest.approx(0.5, abs=0.02)


def test_sample_phs_rotation_invariant_fhat_stream():
    rng = np.random.default_rng(15)
    q, _ = np.linalg.qr(rng.normal(size=(5, 5)))
    a = rng.normal(size=5)
    b = rng.normal(size=5)
    c = float(np.linalg.norm(b - a)) * 1.4
    phs = ProlateHyperspheroid.from_foci(a, b, c)
    phs_rot = ProlateHyperspheroid.from_foci(q @ a, q @ b, c)
    r1 = np.random.default_rng(99)
    r2 = np.random.default_rng(99)
    for _ in range(500):
        f1 = l2_heuristic(sample_uniform_phs(phs, r1), a, b)
        f2 = l2_heuristic(sample_uniform_phs(phs_rot, r2), q @ a, q @ b)
        assert f1 == pytest.approx(f2, abs=1e-9)


def test_greedy_spheroid_samples_stay_informed():
    # greedy bound from a path never exceeds the path cost, so greedy-set
    # samples always satisfy the informed-set inequality too
    rng = np.random.default_rng(18)
    for _ in range(20):
        detour = rng.uniform(-0.4, 0.4, size=(3, 2))
        path = Path.from_states(np.vstack([XI, detour, XG]))
        f_max = greedy_transverse_diameter(path, XI, XG)
        c_i = path.cost
        assert f_max <= c_i + 1e-12
        phs = ProlateHyperspheroid.from_foci(XI, XG, f_max)
        for _ in range(50):
            x = sample_uniform_phs(phs, rng)
            assert l2_heuristic(x, XI, XG) <= c_i + 1e-9


def test_sample_box_zero_width():
    rng = np.random.default_rng(16)
    x = sample_uniform_box(np.array([0.2, -0.1]), np.array([0.2, -0.1]), rng)
    assert np.array_equal(x, [0.2, -0.1])


def test_sample_box_mean_and_bounds():
    rng = np.random.default_rng(17)
    low = np.array([-0.5, -0.5])
    high = np.array([0.5, 0.5])
    pts = np.array([sample_uniform_box(low, high, rng) for _ in range(100000)])
    assert np.all(pts >= low) and np.all(pts <= high)
    assert np.abs(pts.mean(axis=0)).max() < 0.01
