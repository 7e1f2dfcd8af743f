"""Axis-aligned hyperrectangle obstacle worlds and benchmark problem generators.

All benchmark problems live in the unit box [-0.5, 0.5]^n. Higher-dimensional
instances extend the 2-D obstacle cross-sections over the full extent of every
additional dimension, so the layout (and the optimal cost) is the same in any
dimension. Obstacles are closed sets: their boundary counts as collision.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import State, as_state

PROBLEM_FORMAT = 1

PROBLEM_KINDS = ("many_homotopy", "narrow_passage", "double_enclosure")


@dataclass(frozen=True)
class HyperRect:
    low: np.ndarray
    high: np.ndarray

    def __post_init__(self):
        if self.low.shape != self.high.shape or self.low.ndim != 1:
            raise ValueError("low/high must be 1-D vectors of equal dimension")
        if np.any(self.low > self.high):
            raise ValueError("hyperrect with low > high")

    @classmethod
    def make(cls, low, high) -> HyperRect:
        return cls(as_state(low), as_state(high))

    @property
    def dim(self) -> int:
        return self.low.size

    @property
    def diagonal(self) -> float:
        return float(np.linalg.norm(self.high - self.low))

    def contains(self, x: State) -> bool:
        return bool(np.all(x >= self.low) and np.all(x <= self.high))


@dataclass(frozen=True)
class Problem:
    """One planning instance: domain bounds, obstacles, start, goal.

    collision_resolution is the edge-checking step expressed as a fraction of
    the domain diagonal.
    """

    bounds: HyperRect
    obstacles: tuple[HyperRect, ...]
    start: State
    goal: State
    collision_resolution: float = 1e-3
    name: str = "custom"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.bounds.dim
        if self.start.size != n or self.goal.size != n:
            raise ValueError("start/goal dimension does not match bounds")
        for obs in self.obstacles:
            if obs.dim != n:
                raise ValueError("obstacle dimension does not match bounds")
        if self.collision_resolution <= 0:
            raise ValueError("collision_resolution must be positive")
        if not is_free(self, self.start):
            raise ValueError("start state is not collision-free")
        if not is_free(self, self.goal):
            raise ValueError("goal state is not collision-free")

    @property
    def dim(self) -> int:
        return self.bounds.dim

    @property
    def diagonal(self) -> float:
        return self.bounds.diagonal

    @cached_property
    def _obstacle_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if not self.obstacles:
            return np.empty((0, self.dim)), np.empty((0, self.dim))
        lows = np.stack([o.low for o in self.obstacles])
        highs = np.stack([o.high for o in self.obstacles])
        return lows, highs

    @property
    def straight_line_cost(self) -> float:
        return float(np.linalg.norm(self.goal - self.start))


def is_free(p: Problem, x: State) -> bool:
    """True iff x is inside the bounds and in no (closed) obstacle."""
    if x.shape[-1] != p.dim:
        raise ValueError(f"dimension mismatch: {x.shape[-1]} != {p.dim}")
    if not p.bounds.contains(x):
        return False
    lows, highs = p._obstacle_arrays
    if lows.shape[0] == 0:
        return True
    return not bool(np.any(np.all((x >= lows) & (x <= highs), axis=1)))


def is_free_many(p: Problem, pts: np.ndarray) -> np.ndarray:
    """Vectorized is_free over an (k, n) array; returns a bool array."""
    pts = np.asarray(pts, dtype=float)
    free = np.all((pts >= p.bounds.low) & (pts <= p.bounds.high), axis=1)
    lows, highs = p._obstacle_arrays
    if lows.shape[0]:
        inside = np.any(
            np.all((pts[:, None, :] >= lows) & (pts[:, None, :] <= highs), axis=2),
            axis=1,
        )
        free &= ~inside
    return free


def segment_free(p: Problem, a: State, b: State) -> bool:
    """Discrete edge check at spacing <= collision_resolution * diagonal,
    endpoints included.

    The interpolation count is rounded up to a power of two so a finer
    resolution always rechecks a superset of the coarser sample points."""
    dist = float(np.linalg.norm(b - a))
    step = p.collision_resolution * p.diagonal
    k = 1
    while k * step < dist:
        k <<= 1
    ts = np.linspace(0.0, 1.0, k + 1)
    pts = a + ts[:, None] * (b - a)
    return bool(np.all(is_free_many(p, pts)))


def _full_extent(n: int, x_lo, x_hi, y_lo, y_hi) -> HyperRect:
    """Obstacle from a 2-D cross-section, spanning [-0.5, 0.5] in dims >= 3."""
    low = np.full(n, -0.5)
    high = np.full(n, 0.5)
    low[0], high[0] = x_lo, x_hi
    low[1], high[1] = y_lo, y_hi
    return HyperRect(low, high)


def _axis_state(n: int, x0: float) -> State:
    x = np.zeros(n)
    x[0] = x0
    return x


def make_problem(kind: str, n: int, collision_resolution: float = 1e-3, **params) -> Problem:
    """Build one of the three abstract benchmark problems in R^n.

    many_homotopy: a grid of blocks between start (-0.25, 0, ...) and goal
    (0.25, 0, ...), giving many ways around. narrow_passage: a wall with a
    small gap on the start-goal axis plus a free channel over the top (two
    homotopy classes: through the gap or around). double_enclosure: hollow
    boxes around start (-0.3, 0, ...) and goal (0.3, 0, ...) whose openings
    face away from each other (the classic bug trap).
    """
    if n < 2:
        raise ValueError("benchmark problems need n >= 2")
    if kind == "narrow_passage":
        return _narrow_passage(n, collision_resolution, **params)
    if kind == "many_homotopy":
        return _many_homotopy(n, collision_resolution, **params)
    if kind == "double_enclosure":
        return _double_enclosure(n, collision_resolution, **params)
    raise ValueError(f"unknown problem kind {kind!r}; expected one of {PROBLEM_KINDS}")


def _narrow_passage(
    n: int,
    collision_resolution: float,
    gap_width: float = 0.04,
    wall_thickness: float = 0.1,
    wall_top: float = 0.35,
) -> Problem:
    if gap_width <= 0 or wall_thickness <= 0:
        raise ValueError("gap_width and wall_thickness must be positive")
    if not (gap_width / 2 < wall_top <= 0.5):
        raise ValueError("wall_top must lie in (gap_width/2, 0.5]")
    half_t = wall_thickness / 2.0
    half_gap = gap_width / 2.0
    obstacles = (
        _full_extent(n, -half_t, half_t, -0.5, -half_gap),
        _full_extent(n, -half_t, half_t, half_gap, wall_top),
    )
    return Problem(
        bounds=HyperRect(np.full(n, -0.5), np.full(n, 0.5)),
        obstacles=obstacles,
        start=_axis_state(n, -0.3),
        goal=_axis_state(n, 0.3),
        collision_resolution=collision_resolution,
        name="narrow_passage",
        params={"gap_width": gap_width, "wall_thickness": wall_thickness, "wall_top": wall_top},
    )


def _many_homotopy(
    n: int,
    collision_resolution: float,
    cube_edge: float = 0.10,
    pitch: float = 0.25,
    grid_count: int = 4,
) -> Problem:
    if cube_edge <= 0 or pitch <= 0 or grid_count < 1:
        raise ValueError("cube_edge, pitch and grid_count must be positive")
    if cube_edge >= pitch:
        raise ValueError("cube_edge must be smaller than pitch")
    half = cube_edge / 2.0
    centers = (np.arange(grid_count) - (grid_count - 1) / 2.0) * pitch
    obstacles = tuple(
        _full_extent(n, cx - half, cx + half, cy - half, cy + half)
        for cx in centers
        for cy in centers
    )
    return Problem(
        bounds=HyperRect(np.full(n, -0.5), np.full(n, 0.5)),
        obstacles=obstacles,
        start=_axis_state(n, -0.25),
        goal=_axis_state(n, 0.25),
        collision_resolution=collision_resolution,
        name="many_homotopy",
        params={"cube_edge": cube_edge, "pitch": pitch, "grid_count": grid_count},
    )


def _enclosure_walls(n: int, cx: float, opening_sign: float, edge: float, t: float, opening: float):
    """Hollow box centered at (cx, 0) with an opening in its x-facing wall on
    the opening_sign side."""
    e = edge / 2.0
    if opening_sign > 0:
        solid = (cx - e, cx - e + t)  # -x face
        opened = (cx + e - t, cx + e)  # +x face carries the gap
    else:
        solid = (cx + e - t, cx + e)
        opened = (cx - e, cx - e + t)
    return [
        _full_extent(n, solid[0], solid[1], -e, e),
        _full_extent(n, cx - e, cx + e, e - t, e),
        _full_extent(n, cx - e, cx + e, -e, -e + t),
        _full_extent(n, opened[0], opened[1], -e, -opening / 2.0),
        _full_extent(n, opened[0], opened[1], opening / 2.0, e),
    ]


def _double_enclosure(
    n: int,
    collision_resolution: float,
    enclosure_edge: float = 0.3,
    wall_thickness: float = 0.02,
    opening_width: float = 0.1,
) -> Problem:
    if wall_thickness <= 0 or opening_width <= 0:
        raise ValueError("wall_thickness and opening_width must be positive")
    if opening_width >= enclosure_edge - 2 * wall_thickness:
        raise ValueError("opening_width too large for the enclosure")
    obstacles = tuple(
        _enclosure_walls(n, -0.3, -1.0, enclosure_edge, wall_thickness, opening_width)
        + _enclosure_walls(n, 0.3, +1.0, enclosure_edge, wall_thickness, opening_width)
    )
    return Problem(
        bounds=HyperRect(np.full(n, -0.5), np.full(n, 0.5)),
        obstacles=obstacles,
        start=_axis_state(n, -0.3),
        goal=_axis_state(n, 0.3),
        collision_resolution=collision_resolution,
        name="double_enclosure",
        params={
            "enclosure_edge": enclosure_edge,
            "wall_thickness": wall_thickness,
            "opening_width": opening_width,
        },
    )


def save_problem(p: Problem) -> str:
    doc = {
        "format": PROBLEM_FORMAT,
        "name": p.name,
        "dim": p.dim,
        "bounds": {"low": p.bounds.low.tolist(), "high": p.bounds.high.tolist()},
        "obstacles": [{"low": o.low.tolist(), "high": o.high.tolist()} for o in p.obstacles],
        "start": p.start.tolist(),
        "goal": p.goal.tolist(),
        "resolution": p.collision_resolution,
        "params": p.params,
    }
    return json.dumps(doc, indent=2)


def load_problem(text: str) -> Problem:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"malformed problem document: {exc}") from exc
    if not isinstance(doc, dict):
        raise ValueError("problem document must be a JSON object")
    if doc.get("format") != PROBLEM_FORMAT:
        raise ValueError(f"unsupported problem format {doc.get('format')!r}")
    for key in ("dim", "bounds", "start", "goal", "resolution"):
        if key not in doc:
            raise ValueError(f"problem document missing {key!r}")
    n = int(doc["dim"])
    bounds = HyperRect.make(doc["bounds"]["low"], doc["bounds"]["high"])
    obstacles = tuple(HyperRect.make(o["low"], o["high"]) for o in doc.get("obstacles", []))
    p = Problem(
        bounds=bounds,
        obstacles=obstacles,
        start=as_state(doc["start"]),
        goal=as_state(doc["goal"]),
        collision_resolution=float(doc["resolution"]),
        name=str(doc.get("name", "custom")),
        params=dict(doc.get("params", {})),
    )
    if p.dim != n:
        raise ValueError(f"declared dim {n} does not match bounds dimension {p.dim}")
    return p
