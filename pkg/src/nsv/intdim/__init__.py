"""Intrinsic dimension estimation on point clouds."""

from .estimators import (EstimatorError, IdEstimate, PointCloud,
                         estimate_id_cd, estimate_id_lb, estimate_id_lb_band,
                         estimate_on_raw_frames, prepare_cloud, round_to_even,
                         subsample_rows)
from .knn import KdTree, knn_brute, knn_distances, knn_kdtree

__all__ = ["EstimatorError", "IdEstimate", "PointCloud", "estimate_id_cd",
           "estimate_id_lb", "estimate_id_lb_band", "estimate_on_raw_frames",
           "prepare_cloud", "round_to_even", "subsample_rows",
           "KdTree", "knn_brute", "knn_distances", "knn_kdtree"]
