"""Monte-Carlo verification of the sampling-complexity bounds.

Covers the closed-form measure ratio between the greedy and plain informed
spheroids, the expected sample-count factor under mixed greedy/informed
sampling, a synthetic two-region waiting-time simulation of that factor, and
empirical checks of the optimal-path containment claim on 2-D problems with a
dense-grid oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import Path, greedy_transverse_diameter, l2_heuristic_many
from .gridoracle import CoarseGridError, GridOracle
from .worlds import Problem

Z_95 = 1.959963984540054  # two-sided 95% normal quantile


class HomotopyMismatch(RuntimeError):
    """The two paths provably cross the reference cut differently."""


@dataclass(frozen=True)
class SetEstimate:
    """Greedy-set statistics: closed-form measure ratio rho and Monte-Carlo
    recall gamma against a grid-oracle improvement set."""

    rho: float
    gamma: float
    sample_count: int
    half_width: float

    def __post_init__(self):
        if not 0.0 <= self.gamma <= 1.0:
            raise ValueError("gamma must lie in [0, 1]")


def rho_closed_form(f_max: float, c_i: float, c_min: float, n: int) -> float:
    """Measure ratio greedy/informed spheroid:
    (f_max/c_i) * ((f_max^2 - c_min^2) / (c_i^2 - c_min^2))^((n-1)/2)."""
    if not c_min <= f_max <= c_i:
        raise ValueError(f"need c_min <= f_max <= c_i, got {c_min}, {f_max}, {c_i}")
    if c_i <= c_min:
        raise ValueError("degenerate informed set: c_i equals the focal distance")
    return (f_max / c_i) * ((f_max**2 - c_min**2) / (c_i**2 - c_min**2)) ** ((n - 1) / 2.0)


def expected_sample_factor(epsilon: float, gamma: float, rho: float) -> float:
    """Expected sample-count ratio vs pure informed sampling:
    1 / ((1 - epsilon) + epsilon * gamma / rho)."""
    if not 0.0 <= epsilon <= 1.0:
        raise ValueError("epsilon must lie in [0, 1]")
    if not 0.0 <= gamma <= 1.0:
        raise ValueError("gamma must lie in [0, 1]")
    if not 0.0 < rho <= 1.0:
        raise ValueError("rho must lie in (0, 1]")
    denom = (1.0 - epsilon) + epsilon * gamma / rho
    if denom == 0.0:
        raise ValueError("pure greedy sampling with zero greedy hit probability never improves")
    return 1.0 / denom


def _waiting_times(
    epsilon: float,
    p_informed: float,
    p_greedy: float,
    trials: int,
    rng: np.random.Generator,
) -> np.ndarray:
    """Per-trial draw counts until the improvement region is hit; each draw
    picks the greedy region with probability epsilon."""
    p_eff = epsilon * p_greedy + (1.0 - epsilon) * p_informed
    if p_eff <= 0.0:
        raise ValueError("zero effective hit probability: the wait never ends")
    waits = np.zeros(trials, dtype=np.int64)
    active = np.arange(trials)
    draws = 0
    cap = int(math.ceil(200.0 / p_eff)) + 10_000
    while active.size:
        draws += 1
        if draws > cap:
            raise RuntimeError("waiting-time simulation exceeded its safety cap")
        greedy = rng.random(active.size) < epsilon
        p_hit = np.where(greedy, p_greedy, p_informed)
        hit = rng.random(active.size) < p_hit
        waits[active[hit]] = draws
        active = active[~hit]
    return waits


def simulate_sample_factor(
    epsilon: float,
    target_fraction_in_informed: float,
    target_fraction_in_greedy: float,
    rho: float,
    trials: int,
    rng: np.random.Generator,
) -> float:
    """Mean waiting-time ratio of mixed sampling vs the pure-informed
    baseline, in a synthetic two-region model.

    target_fraction_in_informed / _in_greedy are the per-draw probabilities of
    hitting the improvement region when sampling the informed / greedy region.
    rho is only used to sanity-check that the implied recall is a valid
    fraction.
    """
    p, q = target_fraction_in_informed, target_fraction_in_greedy
    if not (0.0 <= p <= 1.0 and 0.0 <= q <= 1.0):
        raise ValueError("hit probabilities must lie in [0, 1]")
    if trials < 1000:
        raise ValueError("need at least 10^3 trials")
    if p > 0.0:
        implied_recall = q * rho / p
        if implied_recall > 1.0 + 1e-9:
            raise ValueError(f"inconsistent parameters: implied recall {implied_recall:.3g} > 1")
    mixed = _waiting_times(epsilon, p, q, trials, rng)
    baseline = _waiting_times(0.0, p, 0.0, trials, rng)
    return float(mixed.mean() / baseline.mean())


def segment_crossings(states: np.ndarray, cut_a: np.ndarray, cut_b: np.ndarray) -> int:
    """Number of proper crossings between a polyline and the cut segment.

    Raises on degenerate contact (endpoint on the cut, collinear overlap)
    because parity is then undefined.
    """
    def orient(p, q, r):
        return (q[0] - p[0]) * (r[1] - p[1]) - (q[1] - p[1]) * (r[0] - p[0])

    count = 0
    scale = max(float(np.linalg.norm(cut_b - cut_a)), 1e-12)
    for k in range(states.shape[0] - 1):
        a, b = states[k], states[k + 1]
        o1 = orient(cut_a, cut_b, a)
        o2 = orient(cut_a, cut_b, b)
        o3 = orient(a, b, cut_a)
        o4 = orient(a, b, cut_b)
        tol = 1e-12 * scale * max(float(np.linalg.norm(b - a)), 1e-12)
        degenerate = min(abs(o1), abs(o2), abs(o3), abs(o4)) <= tol
        if o1 * o2 < 0 and o3 * o4 < 0:
            if degenerate:
                raise ValueError("degenerate polyline/cut contact: parity undefined")
            count += 1
        elif degenerate:
            # only ambiguous when the boxes can actually touch
            lo = np.minimum(a, b) - tol
            hi = np.maximum(a, b) + tol
            clo = np.minimum(cut_a, cut_b)
            chi = np.maximum(cut_a, cut_b)
            if np.all(lo <= chi) and np.all(clo <= hi):
                raise ValueError("degenerate polyline/cut contact: parity undefined")
    return count


def gap_cut(problem: Problem) -> tuple[np.ndarray, np.ndarray]:
    """Reference cut through the narrow-passage gap: crossing it an odd
    number of times means the path goes through the gap."""
    if problem.name != "narrow_passage":
        raise ValueError("gap cut is defined for narrow_passage problems")
    half_gap = problem.params["gap_width"] / 2.0
    return np.array([0.0, -half_gap]), np.array([0.0, half_gap])


def estimate_gamma(
    problem: Problem,
    solution: Path,
    c_i: float,
    samples: int = 20000,
    rng: np.random.Generator | None = None,
    grid: int = 256,
    oracle: GridOracle | None = None,
) -> SetEstimate:
    """Monte-Carlo recall of the greedy spheroid against the grid-oracle
    improvement set {x : g*(x) + h*(x) < c_i}."""
    if rng is None:
        rng = np.random.default_rng(0)
    if oracle is None:
        oracle = GridOracle(problem, grid)  # raises CoarseGridError on unresolved features
    f_max = greedy_transverse_diameter(solution, problem.start, problem.goal)
    c_min = problem.straight_line_cost
    rho = rho_closed_form(min(f_max, c_i), c_i, c_min, problem.dim)

    low, high = problem.bounds.low, problem.bounds.high
    pts = low + rng.random((samples, 2)) * (high - low)
    ii = np.clip(((pts[:, 0] - low[0]) / oracle.cell).astype(int), 0, oracle.size - 1)
    jj = np.clip(((pts[:, 1] - low[1]) / oracle.cell).astype(int), 0, oracle.size - 1)
    through = oracle.cost_to_come[ii, jj] + oracle.cost_to_go[ii, jj]
    improving = oracle.free[ii, jj] & (through < c_i)
    m = int(np.count_nonzero(improving))
    if m == 0:
        raise CoarseGridError("empty improvement set: cost bound too tight for this grid")
    fhat = l2_heuristic_many(pts[improving], problem.start, problem.goal)
    hits = int(np.count_nonzero(fhat <= f_max))
    gamma = hits / m
    half_width = Z_95 * math.sqrt(max(gamma * (1.0 - gamma), 1e-12) / m)
    return SetEstimate(rho=rho, gamma=gamma, sample_count=m, half_width=half_width)


def random_gap_solutions(
    problem: Problem, count: int, rng: np.random.Generator, max_tries: int = 1000
) -> list[Path]:
    """Randomized feasible narrow-passage solutions that thread the gap, so
    they share the oracle path's homotopy class by construction. Waypoint
    detours on both sides vary the tortuosity."""
    from .worlds import segment_free

    if problem.name != "narrow_passage":
        raise ValueError("gap solutions are defined for narrow_passage problems")
    half_t = problem.params["wall_thickness"] / 2.0
    half_gap = problem.params["gap_width"] / 2.0
    out: list[Path] = []
    tries = 0
    while len(out) < count:
        tries += 1
        if tries > max_tries:
            raise RuntimeError("could not generate enough feasible gap solutions")
        y_gate = rng.uniform(-0.7, 0.7) * half_gap
        gate_in = np.array([-half_t - 0.01, y_gate])
        gate_out = np.array([half_t + 0.01, y_gate])
        w_in = np.array([rng.uniform(-0.27, -0.12), rng.uniform(-0.45, 0.3)])
        w_out = np.array([rng.uniform(0.12, 0.27), rng.uniform(-0.45, 0.3)])
        pts = np.array([problem.start, w_in, gate_in, gate_out, w_out, problem.goal])
        if all(segment_free(problem, pts[k], pts[k + 1]) for k in range(len(pts) - 1)):
            out.append(Path.from_states(pts))
    return out


def check_theorem1_containment(
    problem: Problem,
    solution: Path,
    cut: tuple[np.ndarray, np.ndarray] | None = None,
    grid: int = 512,
    tol_cells: float = 2.0,
    oracle: GridOracle | None = None,
) -> bool:
    """True iff every state of the grid-oracle optimal path fits inside the
    solution's greedy spheroid (up to the grid tolerance).

    Precondition: the solution and the oracle path cross the reference cut
    with the same parity, i.e. they lie in the same homotopy class of the
    two-class world. A parity mismatch raises HomotopyMismatch instead of
    returning False.
    """
    if oracle is None:
        oracle = GridOracle(problem, grid)  # raises CoarseGridError on unresolved features
    if cut is None:
        cut = gap_cut(problem)
    oracle_states = oracle.grid_path_states()
    p_solution = segment_crossings(solution.states, cut[0], cut[1]) % 2
    p_oracle = segment_crossings(oracle_states, cut[0], cut[1]) % 2
    if p_solution != p_oracle:
        raise HomotopyMismatch(
            f"solution crosses the cut with parity {p_solution}, oracle path {p_oracle}"
        )
    f_max = greedy_transverse_diameter(solution, problem.start, problem.goal)
    tol = tol_cells * 2.0 * oracle.cell  # the heuristic is 2-Lipschitz in position
    fhat = l2_heuristic_many(oracle_states, problem.start, problem.goal)
    return bool(np.all(fhat <= f_max + tol))


def _axis_foci(n: int, half_sep: float = 0.15) -> tuple[np.ndarray, np.ndarray]:
    a = np.zeros(n)
    b = np.zeros(n)
    a[0], b[0] = -half_sep, half_sep
    return a, b


def verify_geometry(seed: int, containment_samples: int, measure_samples: int) -> dict:
    """Spheroid sampler checks: zero heuristic violations, and the closed-form
    measure against a Monte-Carlo estimate from the hit rate of an inscribed
    ball (whose volume is known exactly)."""
    from .geometry import (
        ProlateHyperspheroid,
        phs_measure,
        sample_uniform_phs_many,
        unit_ball_measure,
    )

    rng = np.random.default_rng(seed)
    dims = {}
    for n in (2, 4, 8):
        a, b = _axis_foci(n)
        phs = ProlateHyperspheroid.from_foci(a, b, 0.9)
        pts = sample_uniform_phs_many(phs, containment_samples, rng)
        fhat = l2_heuristic_many(pts, a, b)
        violations = int(np.count_nonzero(fhat > 0.9 + 1e-9))
        pts = sample_uniform_phs_many(phs, measure_samples, rng)
        r_ball = math.sqrt(0.9**2 - phs.d_min**2) / 2.0  # conjugate semi-axis
        hit = np.count_nonzero(np.linalg.norm(pts - phs.center, axis=1) <= r_ball)
        mc_measure = unit_ball_measure(n) * r_ball**n * measure_samples / hit
        rel_err = abs(mc_measure - phs_measure(phs)) / phs_measure(phs)
        dims[n] = {
            "violations": violations,
            "mc_measure": mc_measure,
            "closed_form": phs_measure(phs),
            "rel_err": rel_err,
        }
    return {
        "per_dim": dims,
        "pass": all(d["violations"] == 0 and d["rel_err"] <= 0.02 for d in dims.values()),
    }


def verify_measure_algebra(seed: int, triples: int = 1000) -> dict:
    """rho_closed_form must equal the spheroid measure ratio identically, and
    the expected-factor boundary cases must be exact."""
    from .geometry import ProlateHyperspheroid, phs_measure

    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(triples):
        n = int(rng.integers(2, 9))
        c_min = float(rng.uniform(0.1, 1.0))
        c_i = c_min + float(rng.uniform(1e-3, 2.0))
        f_max = float(rng.uniform(c_min, c_i))
        a, b = _axis_foci(n, c_min / 2.0)
        base = ProlateHyperspheroid.from_foci(a, b, c_i)
        ratio = phs_measure(base.with_transverse(f_max)) / phs_measure(base)
        rho = rho_closed_form(f_max, c_i, c_min, n)
        if rho > 0:
            worst = max(worst, abs(ratio - rho) / rho)
        else:
            worst = max(worst, abs(ratio - rho))
    eps = 0.7
    boundary = (
        expected_sample_factor(eps, 0.0, 0.5) == 1.0 / (1.0 - eps)
        and expected_sample_factor(0.0, 0.4, 0.5) == 1.0
        and expected_sample_factor(0.6, 0.5, 0.5) == 1.0
        and expected_sample_factor(1.0, 1.0, 0.25) == 0.25
    )
    return {"max_rel_dev": worst, "boundary_exact": boundary, "pass": worst <= 1e-12 and boundary}


def verify_worst_case_factor(seed: int, trials: int) -> dict:
    """Waiting-time ratio with an unhelpful greedy region must approach
    1/(1-epsilon)."""
    rng = np.random.default_rng(seed)
    cells = {}
    ok = True
    for eps in (0.5, 0.9):
        ratio = simulate_sample_factor(eps, 0.3, 0.0, 0.5, trials, rng)
        expected = 1.0 / (1.0 - eps)
        rel = abs(ratio - expected) / expected
        ok &= rel <= 0.10
        cells[eps] = {"ratio": ratio, "expected": expected, "rel_err": rel}
    return {"cells": cells, "pass": ok}


def verify_mixed_factor(seed: int, trials: int, epsilon: float = 0.9) -> dict:
    """Waiting-time ratios across a (gamma, rho) grid against the closed
    form."""
    rng = np.random.default_rng(seed)
    p_informed = 0.1
    worst = 0.0
    cells = []
    for gamma in (0.3, 0.6, 0.9):
        for rho in (0.4, 0.6, 0.8):
            q = gamma / rho * p_informed
            ratio = simulate_sample_factor(epsilon, p_informed, q, rho, trials, rng)
            expected = expected_sample_factor(epsilon, gamma, rho)
            rel = abs(ratio - expected) / expected
            worst = max(worst, rel)
            cells.append(
                {"gamma": gamma, "rho": rho, "ratio": ratio, "expected": expected, "rel_err": rel}
            )
    return {"cells": cells, "max_rel_err": worst, "pass": worst <= 0.05}


def verify_containment(seed: int, count: int = 20, grid: int = 512) -> dict:
    """Optimal-path containment on randomized same-class narrow-passage
    solutions."""
    from .worlds import make_problem

    problem = make_problem("narrow_passage", 2)
    oracle = GridOracle(problem, grid)
    rng = np.random.default_rng(seed)
    solutions = random_gap_solutions(problem, count, rng)
    results = [
        check_theorem1_containment(problem, s, oracle=oracle) for s in solutions
    ]
    return {"passed": int(sum(results)), "count": count, "pass": all(results)}


def run_verification(seed: int = 0, fast: bool = False) -> dict:
    """Full theorem-verification report, as emitted by the benchmark CLI."""
    containment_samples = 10_000 if fast else 100_000
    measure_samples = 100_000 if fast else 1_000_000
    trials = 10_000 if fast else 100_000
    report = {
        "format": 1,
        "seed": seed,
        "fast": fast,
        "geometry": verify_geometry(seed, containment_samples, measure_samples),
        "measure_algebra": verify_measure_algebra(seed + 1),
        "worst_case_factor": verify_worst_case_factor(seed + 2, trials),
        "mixed_factor": verify_mixed_factor(seed + 3, trials),
        "containment": verify_containment(seed + 4, count=20, grid=256 if fast else 512),
    }
    report["pass"] = all(
        report[k]["pass"]
        for k in ("geometry", "measure_algebra", "worst_case_factor", "mixed_factor", "containment")
    )
    return report
