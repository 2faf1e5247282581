"""kNN label refinement in range-image space.

Spherical projection lets near points overwrite far ones and strands
out-of-view points; a per-point vote over the image window around each
point's (sub)pixel repairs the worst of it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset_io import PointCloud
from .errors import ShapeMismatchError
from .kernels import knn_vote
from .mos import classify_points
from .projection import PointPixelMap, RangeImage, pixel_of


@dataclass(frozen=True)
class KnnConfig:
    k: int = 5
    window: int = 5
    range_cutoff: float = 1.0
    weighting: str = "uniform"  # or "inverse-range-gap"

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.window < 1 or self.window % 2 == 0:
            raise ValueError("window must be odd and >= 1")
        if self.range_cutoff <= 0:
            raise ValueError("range_cutoff must be positive")
        if self.weighting not in ("uniform", "inverse-range-gap"):
            raise ValueError(f"unknown weighting {self.weighting!r}")


def knn_refine(
    points: PointCloud,
    point_pixels: PointPixelMap,
    img: RangeImage,
    labels: np.ndarray,
    cfg: KnnConfig,
) -> np.ndarray:
    """Refine per-point binary labels by a window vote.

    Every point anchors at its pixel (dropped points use their truncated
    continuous coordinates, clamped into the image). Valid window pixels
    within ``range_cutoff`` of the point's own range vote with their winning
    point's label, nearest ``k`` by absolute range gap. Points with no
    surviving neighbor, a tied vote, or no usable anchor keep their label.
    """
    labels = np.ascontiguousarray(labels, dtype=np.uint8)
    if labels.shape != (len(points),) or len(point_pixels) != len(points):
        raise ShapeMismatchError(
            f"labels {labels.shape}, pixel map {len(point_pixels)} and cloud "
            f"{len(points)} disagree"
        )

    # Anchors: assigned pixels where they exist, clamped continuous pixels for
    # FOV-dropped points, -1 for degenerate points (NaN coordinates).
    anchor_u, anchor_v = pixel_of(point_pixels.u_f, point_pixels.v_f, img.config)

    pixel_label = np.zeros((img.height, img.width), dtype=np.uint8)
    owners = img.source_point[img.valid]
    pixel_label[img.valid] = labels[owners]

    return knn_vote(
        anchor_u,
        anchor_v,
        points.ranges,
        labels,
        img.range,
        img.valid.astype(np.uint8),
        pixel_label,
        cfg.k,
        cfg.window,
        cfg.range_cutoff,
        cfg.weighting == "inverse-range-gap",
    )


def refine_mask(
    mask: np.ndarray,
    points: PointCloud,
    point_pixels: PointPixelMap,
    img: RangeImage,
    cfg: KnnConfig,
) -> np.ndarray:
    """Back-project a pixel mask to points and kNN-refine in one step."""
    return knn_refine(points, point_pixels, img, classify_points(mask, img), cfg)
