"""Incremental nearest-neighbor and radius queries over a growing vertex set.

Backed by a periodically rebuilt kd-tree (scipy.spatial.cKDTree) over the
bulk of the points plus a linear buffer for recent inserts; below 64 points
everything stays in the buffer. Removals tombstone the id; rebuilds drop dead
entries once they accumulate. Ties are broken by smallest id so query results
are deterministic.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

LINEAR_LIMIT = 64
BUFFER_FRACTION = 0.15
DEAD_FRACTION = 0.25
_TIE_SLACK = 1e-9


class NearestNeighborIndex:
    def __init__(self, dim: int):
        self.dim = dim
        self._points = np.empty((LINEAR_LIMIT, dim))
        self._ids = np.empty(LINEAR_LIMIT, dtype=np.int64)
        self._alive = np.empty(LINEAR_LIMIT, dtype=bool)
        self._size = 0
        self._slot_of: dict[int, int] = {}
        self._tree: cKDTree | None = None
        self._tree_slots = 0  # slots [0, _tree_slots) are inside the kd-tree
        self._dead_in_tree = 0
        self._live = 0

    def __len__(self) -> int:
        return self._live

    def insert(self, vid: int, x: np.ndarray) -> None:
        if vid in self._slot_of:
            raise KeyError(f"duplicate vertex id {vid}")
        if self._size == self._points.shape[0]:
            self._grow()
        slot = self._size
        self._points[slot] = x
        self._ids[slot] = vid
        self._alive[slot] = True
        self._size += 1
        self._slot_of[vid] = slot
        self._live += 1
        self._maybe_rebuild()

    def _grow(self) -> None:
        cap = 2 * self._points.shape[0]
        self._points = np.concatenate([self._points, np.empty_like(self._points)])
        self._ids = np.concatenate([self._ids, np.empty(cap - self._ids.size, dtype=np.int64)])
        self._alive = np.concatenate([self._alive, np.empty(cap - self._alive.size, dtype=bool)])

    def remove(self, vid: int) -> None:
        slot = self._slot_of.pop(vid, None)
        if slot is None:
            raise KeyError(f"unknown vertex id {vid}")
        self._alive[slot] = False
        self._live -= 1
        if slot < self._tree_slots:
            self._dead_in_tree += 1
            if self._dead_in_tree > DEAD_FRACTION * self._tree_slots:
                self._rebuild()

    def _maybe_rebuild(self) -> None:
        if self._size < LINEAR_LIMIT:
            return
        pending = self._size - self._tree_slots
        if pending > max(LINEAR_LIMIT, BUFFER_FRACTION * self._tree_slots):
            self._rebuild()

    def _rebuild(self) -> None:
        keep = np.flatnonzero(self._alive[: self._size])
        pts = self._points[keep].copy()
        ids = self._ids[keep].copy()
        self._size = keep.size
        cap = max(LINEAR_LIMIT, keep.size)
        self._points = np.empty((cap, self.dim))
        self._points[: keep.size] = pts
        self._ids = np.empty(cap, dtype=np.int64)
        self._ids[: keep.size] = ids
        self._alive = np.empty(cap, dtype=bool)
        self._alive[: keep.size] = True
        self._slot_of = {int(v): i for i, v in enumerate(ids)}
        self._tree = cKDTree(pts) if keep.size else None
        self._tree_slots = keep.size
        self._dead_in_tree = 0

    def nearest(self, x: np.ndarray) -> int:
        """Id of the closest live point; ties go to the smallest id."""
        if self._live == 0:
            raise ValueError("nearest on an empty index")
        best = self._tree_min(x)
        best = min(best, self._buffer_min(x))
        cands = self.near(x, best * (1.0 + _TIE_SLACK))
        dists = np.linalg.norm(self._points_of(cands) - x, axis=1)
        order = np.lexsort((cands, dists))
        return int(cands[order[0]])

    def _tree_min(self, x: np.ndarray) -> float:
        if self._tree is None or self._tree_slots == self._dead_in_tree:
            return np.inf
        k = 1
        while True:
            d, idx = self._tree.query(x, k=k)
            d = np.atleast_1d(np.asarray(d, dtype=float))
            idx = np.atleast_1d(np.asarray(idx, dtype=np.int64))
            valid = idx < self._tree_slots  # cKDTree pads with n when k > n
            live = np.zeros_like(valid)
            live[valid] = self._alive[idx[valid]]
            if live.any():
                return float(d[live][0])  # distances come back sorted
            if k >= self._tree_slots:
                return np.inf
            k = min(2 * k, self._tree_slots)

    def _buffer_min(self, x: np.ndarray) -> float:
        lo, hi = self._tree_slots, self._size
        if lo == hi:
            return np.inf
        mask = self._alive[lo:hi]
        if not mask.any():
            return np.inf
        d = np.linalg.norm(self._points[lo:hi][mask] - x, axis=1)
        return float(d.min())

    def _points_of(self, ids: np.ndarray) -> np.ndarray:
        slots = np.fromiter((self._slot_of[int(v)] for v in ids), dtype=np.int64, count=len(ids))
        return self._points[slots]

    def near(self, x: np.ndarray, r: float) -> np.ndarray:
        """Ids of all live points within the closed ball of radius r,
        ascending by id."""
        if r < 0:
            raise ValueError("radius must be non-negative")
        found: list[np.ndarray] = []
        if self._tree is not None:
            slots = np.asarray(
                self._tree.query_ball_point(x, r * (1.0 + _TIE_SLACK)), dtype=np.int64
            )
            if slots.size:
                slots = slots[self._alive[slots]]
            if slots.size:
                d = np.linalg.norm(self._points[slots] - x, axis=1)
                found.append(self._ids[slots[d <= r]])
        lo, hi = self._tree_slots, self._size
        if lo < hi:
            mask = self._alive[lo:hi].copy()
            if mask.any():
                d = np.linalg.norm(self._points[lo:hi] - x, axis=1)
                mask &= d <= r
                found.append(self._ids[lo:hi][mask])
        if not found:
            return np.empty(0, dtype=np.int64)
        return np.sort(np.concatenate(found))
