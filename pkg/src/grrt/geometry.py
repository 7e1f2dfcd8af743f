"""States, admissible heuristics, and prolate-hyperspheroid sampling regions.

States are plain float64 numpy vectors in a unit-width problem domain. The
prolate hyperspheroid (PHS) is the ellipsoid of revolution with foci at the
start and goal whose transverse diameter equals a path-cost bound; it is the
region where samples can still improve the current solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

GEOM_TOL = 1e-9
DEGENERATE_TOL = 1e-12

State = np.ndarray


def as_state(coords) -> State:
    x = np.asarray(coords, dtype=float)
    if x.ndim != 1 or x.size < 1:
        raise ValueError(f"state must be a 1-D vector, got shape {x.shape}")
    if not np.all(np.isfinite(x)):
        raise ValueError("state coordinates must be finite")
    return x


def _check_same_dim(*states: State) -> int:
    n = states[0].shape[-1]
    for s in states[1:]:
        if s.shape[-1] != n:
            raise ValueError(f"dimension mismatch: {s.shape[-1]} != {n}")
    return n


def l2_heuristic(x: State, x_start: State, x_goal: State) -> float:
    """Admissible lower bound on the cost of any start-goal path through x:
    distance to the start plus distance to the goal."""
    _check_same_dim(x, x_start, x_goal)
    return float(np.linalg.norm(x - x_start) + np.linalg.norm(x - x_goal))


def l2_heuristic_many(pts: np.ndarray, x_start: State, x_goal: State) -> np.ndarray:
    """Vectorized l2_heuristic over an (k, n) array of points."""
    pts = np.asarray(pts, dtype=float)
    return np.linalg.norm(pts - x_start, axis=-1) + np.linalg.norm(pts - x_goal, axis=-1)


@dataclass(frozen=True)
class Path:
    """Polyline path; cost is the sum of Euclidean segment lengths."""

    states: np.ndarray  # (k, n), k >= 2
    cost: float

    def __post_init__(self):
        if self.states.ndim != 2 or self.states.shape[0] < 2:
            raise ValueError("a path needs at least 2 states")
        if not np.all(np.isfinite(self.states)):
            raise ValueError("path states must be finite")
        recomputed = polyline_length(self.states)
        if abs(recomputed - self.cost) > GEOM_TOL:
            raise ValueError(f"path cost {self.cost} inconsistent with segment sum {recomputed}")

    @classmethod
    def from_states(cls, states) -> Path:
        arr = np.asarray(states, dtype=float)
        return cls(states=arr, cost=polyline_length(arr))

    @property
    def start(self) -> State:
        return self.states[0]

    @property
    def goal(self) -> State:
        return self.states[-1]


def polyline_length(states: np.ndarray) -> float:
    states = np.asarray(states, dtype=float)
    return float(np.sum(np.linalg.norm(np.diff(states, axis=0), axis=1)))


def greedy_transverse_diameter(path: Path, x_start: State, x_goal: State) -> float:
    """Largest heuristic value along the path; bounds the greedy sampling region.

    For a feasible path this never exceeds the path cost (the heuristic is
    admissible), so the resulting spheroid is contained in the one bounded by
    the solution cost.
    """
    return float(np.max(l2_heuristic_many(path.states, x_start, x_goal)))


def unit_ball_measure(n: int) -> float:
    """Lebesgue measure of the unit ball in R^n."""
    if n <= 0:
        raise ValueError(f"dimension must be >= 1, got {n}")
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@dataclass(frozen=True)
class ProlateHyperspheroid:
    """Ellipsoid of revolution with foci focus_a/focus_b.

    d_transverse is the diameter along the focal axis (the bounding cost);
    d_min is the focal distance, the theoretical minimum cost. The rotation
    matrix is orthonormal with the unit focal vector as its first column.
    """

    focus_a: State
    focus_b: State
    d_transverse: float
    d_min: float
    rotation: np.ndarray
    center: State

    @classmethod
    def from_foci(cls, focus_a, focus_b, d_transverse: float) -> ProlateHyperspheroid:
        a = as_state(focus_a)
        b = as_state(focus_b)
        _check_same_dim(a, b)
        d_min = float(np.linalg.norm(b - a))
        d_transverse = float(d_transverse)
        if d_transverse < d_min:
            raise ValueError(f"empty spheroid: transverse diameter {d_transverse} < focal distance {d_min}")
        return cls(
            focus_a=a,
            focus_b=b,
            d_transverse=d_transverse,
            d_min=d_min,
            rotation=rotation_to_axis(b - a),
            center=(a + b) / 2.0,
        )

    @property
    def dim(self) -> int:
        return self.focus_a.shape[0]

    @property
    def is_degenerate(self) -> bool:
        return self.d_transverse - self.d_min < DEGENERATE_TOL

    def with_transverse(self, d_transverse: float) -> ProlateHyperspheroid:
        """Same foci and rotation, new bounding cost."""
        d_transverse = float(d_transverse)
        if d_transverse < self.d_min:
            raise ValueError(f"empty spheroid: transverse diameter {d_transverse} < focal distance {self.d_min}")
        return ProlateHyperspheroid(
            focus_a=self.focus_a,
            focus_b=self.focus_b,
            d_transverse=d_transverse,
            d_min=self.d_min,
            rotation=self.rotation,
            center=self.center,
        )


def rotation_to_axis(focal: np.ndarray) -> np.ndarray:
    """Orthonormal matrix whose first column is focal/||focal||.

    Built as the Householder reflection exchanging e1 and the unit focal
    vector; falls back to the identity for degenerate (zero) focal vectors.
    """
    focal = np.asarray(focal, dtype=float)
    n = focal.size
    norm = np.linalg.norm(focal)
    if norm < DEGENERATE_TOL:
        return np.eye(n)
    a1 = focal / norm
    v = -a1.copy()
    v[0] += 1.0  # e1 - a1
    vv = float(v @ v)
    if vv < 1e-24:
        return np.eye(n)
    return np.eye(n) - (2.0 / vv) * np.outer(v, v)


def phs_measure(phs: ProlateHyperspheroid, n: int | None = None) -> float:
    """Closed-form Lebesgue measure of the spheroid.

    With c = d_transverse and c_min = d_min this is
    (zeta_n / 2^n) * c * (c^2 - c_min^2)^((n-1)/2).
    """
    if n is None:
        n = phs.dim
    c = phs.d_transverse
    c_min = phs.d_min
    return unit_ball_measure(n) / (2.0**n) * c * (c * c - c_min * c_min) ** ((n - 1) / 2.0)


def _unit_ball_sample(n: int, rng: np.random.Generator) -> np.ndarray:
    while True:
        z = rng.standard_normal(n)
        norm = np.linalg.norm(z)
        if norm > DEGENERATE_TOL:
            break
    return z / norm * rng.random() ** (1.0 / n)


def sample_uniform_phs(phs: ProlateHyperspheroid, rng: np.random.Generator) -> State:
    """Uniform sample from the spheroid volume.

    Draws uniformly in the unit ball, scales by the semi-axes
    (c/2, sqrt(c^2 - c_min^2)/2, ...), rotates onto the focal axis, and
    translates to the center. A degenerate spheroid (bounding cost equal to
    the focal distance) collapses to the focal segment, which is sampled
    uniformly instead.
    """
    n = phs.dim
    if phs.is_degenerate:
        return phs.focus_a + rng.random() * (phs.focus_b - phs.focus_a)
    c = phs.d_transverse
    semi = np.full(n, math.sqrt(c * c - phs.d_min * phs.d_min) / 2.0)
    semi[0] = c / 2.0
    return phs.rotation @ (semi * _unit_ball_sample(n, rng)) + phs.center


def sample_uniform_phs_many(
    phs: ProlateHyperspheroid, count: int, rng: np.random.Generator
) -> np.ndarray:
    """Batched sample_uniform_phs; returns a (count, n) array.

    Uses its own draw layout, so the stream differs from repeated single
    draws with the same generator."""
    n = phs.dim
    if phs.is_degenerate:
        u = rng.random((count, 1))
        return phs.focus_a + u * (phs.focus_b - phs.focus_a)
    z = rng.standard_normal((count, n))
    norms = np.linalg.norm(z, axis=1, keepdims=True)
    norms[norms < DEGENERATE_TOL] = 1.0
    ball = z / norms * rng.random((count, 1)) ** (1.0 / n)
    c = phs.d_transverse
    semi = np.full(n, math.sqrt(c * c - phs.d_min * phs.d_min) / 2.0)
    semi[0] = c / 2.0
    return (ball * semi) @ phs.rotation.T + phs.center


def sample_uniform_box(low: np.ndarray, high: np.ndarray, rng: np.random.Generator) -> State:
    """Uniform sample from an axis-aligned box."""
    low = np.asarray(low, dtype=float)
    high = np.asarray(high, dtype=float)
    return low + rng.random(low.size) * (high - low)
