"""Exact k-nearest-neighbor distances: brute force and a k-d tree backend.

Both backends compute every candidate distance with the same vectorized
expression, so their results agree exactly (bitwise), which the test
suite asserts.  The k-d tree prunes with the usual splitting-plane bound;
in high ambient dimension it degenerates toward brute force but stays
exact.
"""

from __future__ import annotations

import heapq

import numpy as np


def _distances_to(points: np.ndarray, q: np.ndarray) -> np.ndarray:
    d = points - q
    return np.sqrt((d * d).sum(axis=-1))


def knn_brute(points: np.ndarray, k: int) -> np.ndarray:
    """N x k matrix of sorted neighbor distances, self excluded."""
    n = len(points)
    out = np.empty((n, k))
    chunk = max(1, int(2e7) // max(1, n * points.shape[1]))
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        d = _distances_to(points[None, :, :], points[start:stop, None, :])
        for row in range(start, stop):
            d[row - start, row] = np.inf
        d.sort(axis=1)
        out[start:stop] = d[:, :k]
    return out


class _Node:
    __slots__ = ("axis", "threshold", "left", "right", "indices")

    def __init__(self, axis=None, threshold=None, left=None, right=None, indices=None):
        self.axis = axis
        self.threshold = threshold
        self.left = left
        self.right = right
        self.indices = indices


class KdTree:
    """Median-split k-d tree with leaf buckets; exact queries."""

    def __init__(self, points: np.ndarray, leafsize: int = 16):
        self.points = np.asarray(points, dtype=np.float64)
        self.leafsize = leafsize
        self.root = self._build(np.arange(len(self.points)), depth=0)

    def _build(self, idx: np.ndarray, depth: int) -> _Node:
        if len(idx) <= self.leafsize:
            return _Node(indices=idx)
        axis = depth % self.points.shape[1]
        vals = self.points[idx, axis]
        order = np.argsort(vals, kind="stable")
        mid = len(idx) // 2
        threshold = vals[order[mid]]
        left, right = idx[order[:mid]], idx[order[mid:]]
        if len(left) == 0 or len(right) == 0:  # degenerate (all equal on axis)
            return _Node(indices=idx)
        return _Node(axis=axis, threshold=float(threshold),
                     left=self._build(left, depth + 1),
                     right=self._build(right, depth + 1))

    def query(self, q: np.ndarray, k: int, exclude: int = -1) -> np.ndarray:
        """k smallest distances from q to stored points (index `exclude` skipped)."""
        heap = []  # max-heap via negated distances

        def visit(node):
            if node.indices is not None:
                idx = node.indices
                d = _distances_to(self.points[idx], q)
                for dist, j in zip(d, idx):
                    if j == exclude:
                        continue
                    if len(heap) < k:
                        heapq.heappush(heap, -dist)
                    elif dist < -heap[0]:
                        heapq.heapreplace(heap, -dist)
                return
            delta = q[node.axis] - node.threshold
            near, far = (node.right, node.left) if delta >= 0 else (node.left, node.right)
            visit(near)
            if len(heap) < k or abs(delta) <= -heap[0]:
                visit(far)

        visit(self.root)
        return np.sort(np.array([-h for h in heap]))


def knn_kdtree(points: np.ndarray, k: int) -> np.ndarray:
    tree = KdTree(points)
    out = np.empty((len(points), k))
    for i, q in enumerate(points):
        out[i] = tree.query(q, k, exclude=i)
    return out


BACKENDS = {"brute": knn_brute, "kdtree": knn_kdtree}


def knn_distances(points: np.ndarray, k: int, backend: str = "brute") -> np.ndarray:
    """Row i holds T_1(i) <= ... <= T_k(i), Euclidean, self excluded."""
    points = np.asarray(points, dtype=np.float64)
    if k <= 0:
        raise ValueError("k must be positive")
    if points.ndim != 2:
        raise ValueError(f"expected an N x D matrix, got shape {points.shape}")
    if len(points) < k + 1:
        raise ValueError(f"need at least k+1 = {k + 1} points, got {len(points)}")
    if backend not in BACKENDS:
        raise ValueError(f"unknown backend {backend!r} (choose from {sorted(BACKENDS)})")
    return BACKENDS[backend](points, k)
