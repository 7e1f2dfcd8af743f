"""Rooted search trees with cost-to-come bookkeeping, rewiring, and pruning.

Vertex ids are insertion-ordered integers and are never reused; pruning
tombstones them. The cost-to-come g is kept consistent eagerly: re-parenting
a vertex updates its entire subtree.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .geometry import Path, l2_heuristic_many, unit_ball_measure
from .neighbors import NearestNeighborIndex

ROOT = 0


class SearchTree:
    def __init__(self, root_state: np.ndarray):
        root_state = np.asarray(root_state, dtype=float)
        self.dim = root_state.size
        cap = 64
        self._states = np.empty((cap, self.dim))
        self._parent = np.empty(cap, dtype=np.int64)
        self._g = np.empty(cap)
        self._edge_len = np.empty(cap)
        self._alive = np.empty(cap, dtype=bool)
        self._size = 0
        self._children: list[set[int]] = []
        self.index = NearestNeighborIndex(self.dim)
        self._append(root_state, parent=-1, edge_len=0.0, g=0.0)

    # -- storage ------------------------------------------------------------

    def _append(self, x, parent: int, edge_len: float, g: float) -> int:
        if self._size == self._states.shape[0]:
            self._states = np.concatenate([self._states, np.empty_like(self._states)])
            self._parent = np.concatenate([self._parent, np.empty_like(self._parent)])
            self._g = np.concatenate([self._g, np.empty_like(self._g)])
            self._edge_len = np.concatenate([self._edge_len, np.empty_like(self._edge_len)])
            self._alive = np.concatenate([self._alive, np.empty_like(self._alive)])
        vid = self._size
        self._states[vid] = x
        self._parent[vid] = parent
        self._g[vid] = g
        self._edge_len[vid] = edge_len
        self._alive[vid] = True
        self._children.append(set())
        if parent >= 0:
            self._children[parent].add(vid)
        self._size += 1
        self.index.insert(vid, np.asarray(x, dtype=float))
        return vid

    # -- read access ----------------------------------------------------------

    @property
    def root_state(self) -> np.ndarray:
        return self._states[ROOT]

    @property
    def live_count(self) -> int:
        return len(self.index)

    def is_live(self, vid: int) -> bool:
        return 0 <= vid < self._size and bool(self._alive[vid])

    def state(self, vid: int) -> np.ndarray:
        return self._states[vid]

    def g(self, vid: int) -> float:
        return float(self._g[vid])

    def g_of(self, vids: np.ndarray) -> np.ndarray:
        return self._g[vids]

    def alive_of(self, vids: np.ndarray) -> np.ndarray:
        return self._alive[vids]

    def states_of(self, vids: np.ndarray) -> np.ndarray:
        return self._states[vids]

    def parent(self, vid: int) -> int:
        return int(self._parent[vid])

    def parents_of(self, vids: np.ndarray) -> np.ndarray:
        return self._parent[vids]

    def nearest(self, x: np.ndarray) -> int:
        return self.index.nearest(x)

    def near(self, x: np.ndarray, r: float) -> np.ndarray:
        return self.index.near(x, r)

    def path_to_root(self, vid: int) -> list[int]:
        ids = [vid]
        while ids[-1] != ROOT:
            ids.append(int(self._parent[ids[-1]]))
        return ids

    # -- mutation -------------------------------------------------------------

    def add_child(self, parent_id: int, x: np.ndarray) -> int:
        if not self.is_live(parent_id):
            raise ValueError(f"parent {parent_id} is not a live vertex")
        x = np.asarray(x, dtype=float)
        edge = float(np.linalg.norm(x - self._states[parent_id]))
        return self._append(x, parent=parent_id, edge_len=edge, g=self._g[parent_id] + edge)

    def rewire_parent(self, child_id: int, new_parent_id: int) -> None:
        if child_id == ROOT:
            raise ValueError("cannot rewire the root")
        if not (self.is_live(child_id) and self.is_live(new_parent_id)):
            raise ValueError("rewire with a dead vertex")
        # cycle guard: new parent must not live in the child's subtree
        anc = new_parent_id
        while anc != -1:
            if anc == child_id:
                raise ValueError("rewire would create a cycle")
            anc = int(self._parent[anc])
        old_parent = int(self._parent[child_id])
        self._children[old_parent].discard(child_id)
        self._children[new_parent_id].add(child_id)
        self._parent[child_id] = new_parent_id
        edge = float(np.linalg.norm(self._states[child_id] - self._states[new_parent_id]))
        self._edge_len[child_id] = edge
        self._g[child_id] = self._g[new_parent_id] + edge
        self._refresh_subtree_g(child_id)

    def _refresh_subtree_g(self, vid: int) -> None:
        queue = deque(self._children[vid])
        while queue:
            v = queue.popleft()
            self._g[v] = self._g[self._parent[v]] + self._edge_len[v]
            queue.extend(self._children[v])

    def prune(self, threshold: float, x_start: np.ndarray, x_goal: np.ndarray) -> int:
        """Remove every vertex whose heuristic exceeds threshold, cascading to
        descendants. Returns the number of removed vertices."""
        if threshold == math.inf:
            return 0
        fhat = l2_heuristic_many(self._states[: self._size], x_start, x_goal)
        keep = fhat <= threshold
        removed = 0
        stack = [ROOT]
        doomed: list[int] = []
        while stack:
            v = stack.pop()
            for c in self._children[v]:
                if keep[c]:
                    stack.append(c)
                else:
                    doomed.append(c)
        for top in doomed:
            sub = [top]
            queue = deque([top])
            while queue:
                v = queue.popleft()
                queue.extend(self._children[v])
                sub.extend(self._children[v])
            self._children[int(self._parent[top])].discard(top)
            for v in sub:
                self._alive[v] = False
                self._children[v] = set()
                self.index.remove(v)
                removed += 1
        return removed

    def dump(self) -> dict:
        """Debug snapshot of the live vertices and edges."""
        live = [int(v) for v in np.flatnonzero(self._alive[: self._size])]
        return {
            "vertices": {v: self._states[v].tolist() for v in live},
            "edges": [[int(self._parent[v]), v] for v in live if v != ROOT],
            "g": {v: float(self._g[v]) for v in live},
        }


@dataclass(frozen=True)
class SolutionBridge:
    """A collision-free edge joining a start-tree vertex to a goal-tree one."""

    a: int  # vertex id in the tree rooted at the start
    b: int  # vertex id in the tree rooted at the goal


def rewire_radius(m: int, n: int, free_measure_bound: float, eta: float, max_edge: float) -> float:
    """Shrinking neighbor radius for rewiring, capped at the steering range.

    Standard RRT* form: eta * (2 (1 + 1/n) (mu_free / zeta_n) (log m / m))^(1/n),
    with mu_free bounded by the whole-domain measure.
    """
    if m < 1:
        raise ValueError("vertex count must be >= 1")
    base = 2.0 * (1.0 + 1.0 / n) * (free_measure_bound / unit_ball_measure(n))
    r = eta * (base * math.log(m) / m) ** (1.0 / n)
    return min(max_edge, r)


def bridge_cost(bridge: SolutionBridge, tree_a: SearchTree, tree_b: SearchTree) -> float:
    d = float(np.linalg.norm(tree_a.state(bridge.a) - tree_b.state(bridge.b)))
    return tree_a.g(bridge.a) + d + tree_b.g(bridge.b)


def extract_path(bridge: SolutionBridge, tree_a: SearchTree, tree_b: SearchTree) -> Path:
    """Concatenate the two root paths through the bridge into a start-to-goal
    path. Raises if either endpoint was pruned."""
    if not tree_a.is_live(bridge.a) or not tree_b.is_live(bridge.b):
        raise ValueError("stale bridge: an endpoint was pruned")
    ids_a = tree_a.path_to_root(bridge.a)
    ids_b = tree_b.path_to_root(bridge.b)
    states_a = tree_a.states_of(np.asarray(ids_a[::-1], dtype=np.int64))
    states_b = tree_b.states_of(np.asarray(ids_b, dtype=np.int64))
    if np.array_equal(states_a[-1], states_b[0]):
        states_b = states_b[1:]
    states = np.concatenate([states_a, states_b])
    return Path(states=states.copy(), cost=bridge_cost(bridge, tree_a, tree_b))
