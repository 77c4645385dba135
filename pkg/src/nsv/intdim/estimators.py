"""Intrinsic-dimension estimators on point clouds.

The primary estimator is the k-nearest-neighbor maximum-likelihood one:
per point, the mean log ratio of the k-th neighbor distance to the closer
neighbor distances; averaged over points and inverted to give the global
dimension estimate.  (The inversion matters: without it the quantity has
units of 1/dimension and cannot reproduce integer dimensions of known
systems.)  A correlation-dimension companion fits the scaling exponent of
the pairwise-distance correlation integral.

Reported values are also rounded to the nearest even integer, since
mechanical state variables come in position/velocity pairs; exact ties
round up, and the minimum reported value is 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .knn import knn_distances


class EstimatorError(Exception):
    pass


@dataclass
class PointCloud:
    """Deduplicated N x D point matrix ready for estimation."""

    points: np.ndarray
    n_duplicates_dropped: int = 0
    standardized: bool = False

    @property
    def n(self) -> int:
        return len(self.points)

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def prepare_cloud(points: np.ndarray, standardize: bool = False,
                  dedup_tol: float = 1e-12) -> PointCloud:
    """Validate, optionally z-score per dimension, and drop duplicate rows.

    Duplicates (pairwise closer than dedup_tol in max norm) would put zeros
    in the neighbor-distance ratios, so they are removed with a logged count.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2:
        raise EstimatorError(f"expected an N x D matrix, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise EstimatorError("point cloud contains non-finite entries")
    if standardize:
        std = pts.std(axis=0)
        std[std == 0] = 1.0
        pts = (pts - pts.mean(axis=0)) / std
    order = np.lexsort(pts.T[::-1])
    sorted_pts = pts[order]
    if len(pts) > 1:
        diffs = np.abs(np.diff(sorted_pts, axis=0)).max(axis=1)
        keep_sorted = np.concatenate([[True], diffs > dedup_tol])
    else:
        keep_sorted = np.ones(len(pts), dtype=bool)
    kept = sorted_pts[keep_sorted]
    return PointCloud(points=kept,
                      n_duplicates_dropped=int(len(pts) - len(kept)),
                      standardized=standardize)


@dataclass
class IdEstimate:
    raw: float
    rounded_even: int
    method: str
    k: object                      # int or (k_lo, k_hi) band
    n_used: int
    printed_form_mean: float = None    # mean log-ratio before inversion
    per_point: np.ndarray = field(default=None, repr=False)

    def summary(self) -> dict:
        out = {"raw": self.raw, "rounded_even": self.rounded_even,
               "method": self.method, "k": self.k, "n_used": self.n_used}
        if self.printed_form_mean is not None:
            out["mean_log_ratio"] = self.printed_form_mean
        if self.per_point is not None:
            out["per_point_mean"] = float(self.per_point.mean())
            out["per_point_std"] = float(self.per_point.std())
        return out


def round_to_even(raw: float) -> int:
    """Nearest even integer, ties (odd integers) rounding up, minimum 2."""
    if raw <= 0:
        raise ValueError("raw estimate must be positive")
    lower = 2 * math.floor(raw / 2.0)
    upper = lower + 2
    best = lower if (raw - lower) < (upper - raw) else upper
    return max(2, best)


def _cloud(points) -> PointCloud:
    return points if isinstance(points, PointCloud) else prepare_cloud(points)


def estimate_id_lb(points, k: int = 20, backend: str = "brute") -> IdEstimate:
    """k-NN maximum-likelihood global dimension estimate (inverted mean log ratio)."""
    cloud = _cloud(points)
    if k < 3:
        raise EstimatorError("k must be >= 3 (the k-2 normalization requires it)")
    if cloud.n < k + 1:
        raise EstimatorError(f"need at least k+1 = {k + 1} points, got {cloud.n}")
    dists = knn_distances(cloud.points, k, backend=backend)
    if np.any(dists[:, 0] == 0):
        raise EstimatorError("zero neighbor distance after deduplication")
    logs = np.log(dists[:, -1:] / dists[:, :-1])     # log(T_k / T_j), j < k
    per_point = logs.sum(axis=1) / (k - 2)
    mean_log_ratio = float(per_point.mean())
    raw = 1.0 / mean_log_ratio
    return IdEstimate(raw=raw, rounded_even=round_to_even(raw),
                      method="levina-bickel", k=k, n_used=cloud.n,
                      printed_form_mean=mean_log_ratio, per_point=per_point)


def estimate_id_lb_band(points, k_lo: int = 10, k_hi: int = 20,
                        backend: str = "brute") -> IdEstimate:
    """Mean of per-k raw estimates over a band of neighbor counts."""
    if k_lo < 3 or k_hi < k_lo:
        raise EstimatorError("need 3 <= k_lo <= k_hi")
    cloud = _cloud(points)
    raws = [estimate_id_lb(cloud, k, backend=backend).raw
            for k in range(k_lo, k_hi + 1)]
    raw = float(np.mean(raws))
    return IdEstimate(raw=raw, rounded_even=round_to_even(raw),
                      method="levina-bickel-band", k=(k_lo, k_hi), n_used=cloud.n)


def estimate_id_cd(points, n_bins: int = 20, lo_pct: float = 10.0,
                   hi_pct: float = 60.0) -> IdEstimate:
    """Correlation dimension: slope of log C(r) against log r.

    C(r) is the fraction of point pairs closer than r; the fit range runs
    between distance percentiles to avoid saturation at either end.
    """
    cloud = _cloud(points)
    n = cloud.n
    if n < 100:
        raise EstimatorError(f"correlation dimension needs >= 100 points, got {n}")
    pts = cloud.points
    chunk = max(1, int(2e7) // max(1, n * pts.shape[1]))
    pair_dists = []
    for start in range(0, n, chunk):
        stop = min(n, start + chunk)
        d = pts[start:stop, None, :] - pts[None, :, :]
        d = np.sqrt((d * d).sum(axis=-1))
        for row in range(start, stop):
            pair_dists.append(d[row - start, row + 1:])
    dall = np.concatenate(pair_dists)
    lo, hi = np.percentile(dall, [lo_pct, hi_pct])
    if not (lo > 0 and hi > lo):
        raise EstimatorError("degenerate pairwise distances (all points identical?)")
    radii = np.exp(np.linspace(math.log(lo), math.log(hi), n_bins))
    counts = np.array([(dall < r).sum() for r in radii], dtype=np.float64)
    c = 2.0 * counts / (n * (n - 1))
    usable = c > 0
    if usable.sum() < 5:
        raise EstimatorError(f"only {int(usable.sum())} usable radius bins (< 5)")
    x = np.log(radii[usable])
    y = np.log(c[usable])
    slope = float(np.polyfit(x, y, 1)[0])
    if slope <= 0:
        raise EstimatorError(f"non-positive correlation-integral slope {slope}")
    return IdEstimate(raw=slope, rounded_even=round_to_even(slope),
                      method="correlation-dimension", k=None, n_used=n)


def subsample_rows(matrix: np.ndarray, max_n: int, seed: int = 0) -> np.ndarray:
    """Up to max_n rows, sampled uniformly without replacement (seeded)."""
    if len(matrix) <= max_n:
        return np.asarray(matrix)
    idx = np.random.default_rng(seed).choice(len(matrix), size=max_n, replace=False)
    return np.asarray(matrix)[np.sort(idx)]


def estimate_on_raw_frames(dataset, k: int = 20, max_n: int = 1000,
                           split: str = "train", seed: int = 0) -> IdEstimate:
    """Baseline: the k-NN ML estimator on flattened raw frame pairs."""
    index = dataset.sample_index(split)
    chosen = [index[i] for i in np.sort(
        np.random.default_rng(seed).choice(len(index),
                                           size=min(max_n, len(index)),
                                           replace=False))]
    x, _ = dataset.pairs_for(chosen)
    flat = x.reshape(len(chosen), -1)
    est = estimate_id_lb(flat, k=k)
    est.method = "raw-frames-LB"
    return est
