"""Dense-grid shortest-path oracle for validating planners on 2-D problems.

8-connected Dijkstra with octile edge costs over cell centers, plus a
shortcut-corrected length estimate. Deliberately independent of the planner:
no shared search code beyond the collision checker.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .shortcut import shortcut
from .worlds import Problem, is_free_many, segment_free

_OFFSETS = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)]


class CoarseGridError(RuntimeError):
    """The lattice cannot resolve the problem's features."""


_FEATURE_PARAMS = ("gap_width", "opening_width", "wall_thickness", "cube_edge")
MIN_FEATURE_CELLS = 3


def _smallest_feature(problem: Problem) -> float | None:
    sizes = [problem.params[k] for k in _FEATURE_PARAMS if k in problem.params]
    if "pitch" in problem.params and "cube_edge" in problem.params:
        sizes.append(problem.params["pitch"] - problem.params["cube_edge"])
    return min(sizes) if sizes else None


class GridOracle:
    def __init__(self, problem: Problem, size: int = 512):
        if problem.dim != 2:
            raise ValueError("grid oracle only supports 2-D problems")
        self.problem = problem
        self.size = size
        low, high = problem.bounds.low, problem.bounds.high
        widths = high - low
        self.cell = float(widths[0]) / size
        if abs(widths[1] / size - self.cell) > 1e-12:
            raise ValueError("grid oracle expects a square domain")
        feature = _smallest_feature(problem)
        if feature is not None and feature < MIN_FEATURE_CELLS * self.cell:
            raise CoarseGridError(
                f"feature of size {feature:.4g} spans under {MIN_FEATURE_CELLS} cells "
                f"at cell size {self.cell:.4g}"
            )
        axis = low[0] + (np.arange(size) + 0.5) * self.cell
        self._axis_x = axis
        self._axis_y = low[1] + (np.arange(size) + 0.5) * self.cell
        xs, ys = np.meshgrid(self._axis_x, self._axis_y, indexing="ij")
        centers = np.stack([xs.ravel(), ys.ravel()], axis=1)
        self.free = is_free_many(problem, centers).reshape(size, size)

        self._start_cell = self._cell_of(problem.start)
        self._goal_cell = self._cell_of(problem.goal)
        if not self.free[self._start_cell] or not self.free[self._goal_cell]:
            raise CoarseGridError("start or goal cell is blocked at this resolution")

        graph = self._build_graph()
        srcs = [self._node(*self._start_cell), self._node(*self._goal_cell)]
        dist, pred = dijkstra(graph, indices=srcs, return_predecessors=True)
        self.cost_to_come = dist[0].reshape(size, size)
        self.cost_to_go = dist[1].reshape(size, size)
        self._pred_from_start = pred[0]
        if not math.isfinite(self.cost_to_come[self._goal_cell]):
            raise CoarseGridError("no grid path between start and goal at this resolution")

    def _cell_of(self, x) -> tuple[int, int]:
        low = self.problem.bounds.low
        i = int(np.clip((x[0] - low[0]) / self.cell, 0, self.size - 1))
        j = int(np.clip((x[1] - low[1]) / self.cell, 0, self.size - 1))
        return i, j

    def _node(self, i: int, j: int) -> int:
        return i * self.size + j

    def center(self, i: int, j: int) -> np.ndarray:
        return np.array([self._axis_x[i], self._axis_y[j]])

    def _build_graph(self) -> csr_matrix:
        n = self.size
        free = self.free
        rows, cols, data = [], [], []
        for di, dj in _OFFSETS:
            src_i = slice(max(0, -di), n - max(0, di))
            src_j = slice(max(0, -dj), n - max(0, dj))
            dst_i = slice(max(0, di), n + min(0, di))
            dst_j = slice(max(0, dj), n + min(0, dj))
            ok = free[src_i, src_j] & free[dst_i, dst_j]
            if di and dj:
                # no corner cutting: both orthogonal neighbors must be free
                ok = ok & free[dst_i, src_j] & free[src_i, dst_j]
            ii, jj = np.nonzero(ok)
            ii = ii + max(0, -di)
            jj = jj + max(0, -dj)
            rows.append(ii * n + jj)
            cols.append((ii + di) * n + (jj + dj))
            w = self.cell * (math.sqrt(2.0) if di and dj else 1.0)
            data.append(np.full(ii.size, w))
        return csr_matrix(
            (np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))),
            shape=(n * n, n * n),
        )

    def grid_path_states(self) -> np.ndarray:
        """Optimal grid path as a polyline of cell centers, with the exact
        start and goal states attached."""
        node = self._node(*self._goal_cell)
        start_node = self._node(*self._start_cell)
        cells = [node]
        while node != start_node:
            node = int(self._pred_from_start[node])
            if node < 0:
                raise CoarseGridError("grid predecessor chain broken")
            cells.append(node)
        cells.reverse()
        pts = [self.problem.start]
        for c in cells:
            pts.append(self.center(c // self.size, c % self.size))
        pts.append(self.problem.goal)
        states = np.asarray(pts)
        keep = np.ones(len(states), dtype=bool)
        keep[1:] = np.linalg.norm(np.diff(states, axis=0), axis=1) > 1e-15
        return states[keep]

    def _continuum_path(self) -> np.ndarray:
        """Grid path made feasible for the continuum checker: diagonal steps
        that clip an obstacle are replaced by their L-shaped detour."""
        states = self.grid_path_states()
        out = [states[0]]
        for k in range(1, len(states)):
            a, b = out[-1], states[k]
            if segment_free(self.problem, a, b):
                out.append(b)
                continue
            corner1 = np.array([a[0], b[1]])
            corner2 = np.array([b[0], a[1]])
            for corner in (corner1, corner2):
                if segment_free(self.problem, a, corner) and segment_free(self.problem, corner, b):
                    out.append(corner)
                    out.append(b)
                    break
            else:
                raise CoarseGridError("grid path segment not traversable in the continuum")
        return np.asarray(out)

    def optimal_cost(self, shortcut_iterations: int | None = None, seed: int = 0) -> float:
        """Shortcut-corrected estimate of the optimal path length."""
        from .geometry import Path

        states = self._continuum_path()
        path = Path.from_states(states)
        budget = shortcut_iterations if shortcut_iterations is not None else min(8000, 20 * len(states))
        best = shortcut(path, self.problem, iterations=budget, rng=np.random.default_rng(seed))
        return best.cost
