"""Randomized path shortcutting, used as post-processing only.

Each attempt picks two points along the polyline by arc length and replaces
the portion between them with a straight segment when it is collision-free
and strictly shorter. Cuts are arc-length parameterized (not vertex-indexed)
so long segments still get shortened.
"""

from __future__ import annotations

import numpy as np

from .geometry import Path, polyline_length
from .worlds import Problem, segment_free


def _point_at(states: np.ndarray, cumlen: np.ndarray, s: float) -> tuple[int, np.ndarray]:
    """Point at arc length s; returns (segment index, point)."""
    i = int(np.searchsorted(cumlen, s, side="right") - 1)
    i = min(max(i, 0), states.shape[0] - 2)
    seg = cumlen[i + 1] - cumlen[i]
    t = 0.0 if seg <= 0 else (s - cumlen[i]) / seg
    return i, states[i] + t * (states[i + 1] - states[i])


def shortcut(
    path: Path,
    problem: Problem,
    iterations: int | None = None,
    rng: np.random.Generator | None = None,
) -> Path:
    """Shortened, still-feasible path with the same endpoints.

    The default budget is 10 attempts per path state. Raises if the input
    path itself fails the collision check.
    """
    states = path.states
    for k in range(states.shape[0] - 1):
        if not segment_free(problem, states[k], states[k + 1]):
            raise ValueError(f"input path segment {k} is not collision-free")
    if iterations is None:
        iterations = 10 * states.shape[0]
    if rng is None:
        rng = np.random.default_rng(0)

    for _ in range(iterations):
        if states.shape[0] < 3:
            break
        seglen = np.linalg.norm(np.diff(states, axis=0), axis=1)
        cumlen = np.concatenate([[0.0], np.cumsum(seglen)])
        total = cumlen[-1]
        if total <= 0:
            break
        s1, s2 = np.sort(rng.random(2) * total)
        i1, p1 = _point_at(states, cumlen, s1)
        i2, p2 = _point_at(states, cumlen, s2)
        if i1 == i2:
            continue  # both cuts on one segment: nothing to straighten
        replaced = float(s2 - s1)  # arc length of the portion p1 .. p2
        direct = float(np.linalg.norm(p2 - p1))
        if direct >= replaced:
            continue
        if not segment_free(problem, p1, p2):
            continue
        states = np.concatenate([states[: i1 + 1], [p1, p2], states[i2 + 1 :]])
        states = _drop_duplicate_vertices(states)

    return Path(states=states, cost=polyline_length(states))


def _drop_duplicate_vertices(states: np.ndarray, tol: float = 1e-15) -> np.ndarray:
    keep = np.ones(states.shape[0], dtype=bool)
    gaps = np.linalg.norm(np.diff(states, axis=0), axis=1)
    keep[1:-1] = gaps[:-1] > tol
    return states[keep]
