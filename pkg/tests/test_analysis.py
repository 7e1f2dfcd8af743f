import math

import numpy as np
import pytest

from grrt.analysis import (
    HomotopyMismatch,
    SetEstimate,
    check_theorem1_containment,
    estimate_gamma,
    expected_sample_factor,
    gap_cut,
    random_gap_solutions,
    rho_closed_form,
    segment_crossings,
    simulate_sample_factor,
    verify_measure_algebra,
)
from grrt.geometry import Path, ProlateHyperspheroid, phs_measure
from grrt.gridoracle import GridOracle
from grrt.worlds import make_problem


# -- rho -----------------------------------------------------------------


def test_rho_identical_spheroids():
    assert rho_closed_form(1.2, 1.2, 0.6, 4) == pytest.approx(1.0, abs=1e-12)


def test_rho_degenerate_greedy_spheroid():
    assert rho_closed_form(0.6, 1.2, 0.6, 3) == 0.0


def test_rho_hand_value():
    expected = (1.0 / 1.2) * math.sqrt((1.0 - 0.36) / (1.44 - 0.36))
    assert rho_closed_form(1.0, 1.2, 0.6, 2) == pytest.approx(expected, rel=1e-12)


def test_rho_equals_measure_ratio():
    rng = np.random.default_rng(0)
    for _ in range(300):
        n = int(rng.integers(2, 9))
        c_min = float(rng.uniform(0.1, 1.0))
        c_i = c_min + float(rng.uniform(1e-3, 2.0))
        f_max = float(rng.uniform(c_min, c_i))
        a = np.zeros(n)
        b = np.zeros(n)
        a[0], b[0] = -c_min / 2, c_min / 2
        base = ProlateHyperspheroid.from_foci(a, b, c_i)
        ratio = phs_measure(base.with_transverse(f_max)) / phs_measure(base)
        assert rho_closed_form(f_max, c_i, c_min, n) == pytest.approx(ratio, rel=1e-12, abs=1e-15)


def test_rho_rejects_degenerate_informed_set():
    with pytest.raises(ValueError):
        rho_closed_form(0.6, 0.6, 0.6, 2)


def test_rho_rejects_out_of_order_arguments():
    with pytest.raises(ValueError):
        rho_closed_form(1.5, 1.2, 0.6, 2)


# -- expected factor ---------------------------------------------------------


def test_expected_factor_worst_case():
    for eps in (0.2, 0.5, 0.9):
        assert expected_sample_factor(eps, 0.0, 0.7) == pytest.approx(1 / (1 - eps), rel=1e-12)


def test_expected_factor_pure_greedy_best_case():
    assert expected_sample_factor(1.0, 1.0, 0.25) == pytest.approx(0.25, rel=1e-12)


def test_expected_factor_epsilon_zero():
    assert expected_sample_factor(0.0, 0.3, 0.9) == 1.0


def test_expected_factor_balance_point():
    assert expected_sample_factor(0.7, 0.4, 0.4) == pytest.approx(1.0, rel=1e-12)


def test_expected_factor_monotonicity_in_epsilon():
    eps_grid = np.linspace(0.0, 0.95, 15)
    worse = [expected_sample_factor(e, 0.2, 0.6) for e in eps_grid]  # gamma < rho
    better = [expected_sample_factor(e, 0.8, 0.4) for e in eps_grid]  # gamma > rho
    assert all(a < b for a, b in zip(worse, worse[1:]))
    assert all(a > b for a, b in zip(better, better[1:]))


def test_expected_factor_rejects_never_improving():
    with pytest.raises(ValueError):
        expected_sample_factor(1.0, 0.0, 0.5)


# -- simulation --------------------------------------------------------------


def test_simulate_worst_case_half():
    rng = np.random.default_rng(1)
    ratio = simulate_sample_factor(0.5, 0.3, 0.0, 0.5, 20000, rng)
    assert ratio == pytest.approx(2.0, rel=0.1)


def test_simulate_matches_closed_form():
    rng = np.random.default_rng(2)
    gamma, rho, eps, p = 0.6, 0.4, 0.8, 0.15
    ratio = simulate_sample_factor(eps, p, gamma / rho * p, rho, 30000, rng)
    assert ratio == pytest.approx(expected_sample_factor(eps, gamma, rho), rel=0.05)


def test_simulate_validates_inputs():
    rng = np.random.default_rng(3)
    with pytest.raises(ValueError):
        simulate_sample_factor(0.5, 0.3, 0.0, 0.5, 10, rng)
    with pytest.raises(ValueError):
        simulate_sample_factor(1.0, 0.3, 0.0, 0.5, 2000, rng)  # never hits
    with pytest.raises(ValueError):
        simulate_sample_factor(0.5, 0.1, 0.9, 0.9, 2000, rng)  # implied recall > 1


# -- crossings / homotopy ---------------------------------------------------


def test_segment_crossings_counts():
    cut_a, cut_b = np.array([0.0, -1.0]), np.array([0.0, 1.0])
    through = np.array([[-1.0, 0.1], [1.0, 0.2]])
    assert segment_crossings(through, cut_a, cut_b) == 1
    around = np.array([[-1.0, 0.1], [-1.0, 2.0], [1.0, 2.0], [1.0, 0.1]])
    assert segment_crossings(around, cut_a, cut_b) == 0
    zigzag = np.array([[-1.0, 0.0], [1.0, 0.1], [-1.0, 0.2], [1.0, 0.3]])
    assert segment_crossings(zigzag, cut_a, cut_b) == 3


def test_segment_crossings_degenerate_contact_raises():
    cut_a, cut_b = np.array([0.0, -1.0]), np.array([0.0, 1.0])
    touching = np.array([[-1.0, 0.0], [0.0, 0.0], [-1.0, 0.5]])
    with pytest.raises(ValueError):
        segment_crossings(touching, cut_a, cut_b)


# -- gamma ---------------------------------------------------------------


def empty_problem_2d():
    from grrt.worlds import HyperRect, Problem

    return Problem(
        bounds=HyperRect(np.full(2, -0.5), np.full(2, 0.5)),
        obstacles=(),
        start=np.array([-0.3, 0.0]),
        goal=np.array([0.3, 0.0]),
        name="empty",
    )


def test_estimate_gamma_near_optimal_solution_is_recalled():
    # empty world: the improvement set is the informed spheroid's interior, so
    # the true recall equals the closed-form measure ratio; with the cost
    # bound just above the greedy diameter that ratio is ~1
    p = empty_problem_2d()
    solution = Path.from_states([p.start, [0.0, 0.05], p.goal])
    c_i = solution.cost * 1.0004
    est = estimate_gamma(p, solution, c_i=c_i, samples=60000,
                         rng=np.random.default_rng(4), grid=256)
    assert est.gamma > 0.95
    assert est.rho > 0.95  # consistency: true recall here is rho itself
    assert 0.0 <= est.gamma <= 1.0
    assert est.sample_count > 100


def test_estimate_gamma_detects_missed_homotopy_class():
    p = make_problem("narrow_passage", 2)
    solution = Path.from_states(
        [p.start, [-0.06, 0.0], [0.06, 0.0], p.goal]
    )  # tight through-gap path
    est = estimate_gamma(p, solution, c_i=1.1, samples=60000,
                         rng=np.random.default_rng(5), grid=256)
    # the over-the-wall corridor improves on c_i but lies outside the greedy set
    assert est.gamma < 0.9
    assert est.rho < 1.0


def test_set_estimate_validates_gamma():
    with pytest.raises(ValueError):
        SetEstimate(rho=0.5, gamma=1.2, sample_count=10, half_width=0.0)


# -- containment ---------------------------------------------------------


@pytest.fixture(scope="module")
def np2_oracle():
    problem = make_problem("narrow_passage", 2)
    return problem, GridOracle(problem, 256)


def test_containment_random_same_class_solutions(np2_oracle):
    problem, oracle = np2_oracle
    rng = np.random.default_rng(6)
    for sol in random_gap_solutions(problem, 5, rng):
        assert check_theorem1_containment(problem, sol, oracle=oracle)


def test_containment_of_oracle_path_itself(np2_oracle):
    problem, oracle = np2_oracle
    sol = Path.from_states(oracle.grid_path_states())
    assert check_theorem1_containment(problem, sol, oracle=oracle)


def test_containment_rejects_other_homotopy_class(np2_oracle):
    problem, oracle = np2_oracle
    over_top = Path.from_states(
        [problem.start, [-0.2, 0.43], [0.2, 0.43], problem.goal]
    )
    with pytest.raises(HomotopyMismatch):
        check_theorem1_containment(problem, over_top, oracle=oracle)


def test_gap_cut_requires_narrow_passage():
    with pytest.raises(ValueError):
        gap_cut(empty_problem_2d())


# -- report --------------------------------------------------------------


def test_measure_algebra_report_passes():
    report = verify_measure_algebra(seed=7, triples=200)
    assert report["pass"]
    assert report["max_rel_dev"] <= 1e-12
