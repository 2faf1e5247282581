"""Rule-based moving-object classification over associated scans.

The decision rule: a pixel whose semantic class is stable across associated
scans is static; a class change at an established correspondence votes for
moving. This interpretable rule stands in for a learned segmentation head at
desk scale; a learned head can be plugged in through :class:`MosHead`, which
consumes raw feature images and produces the same pixel mask.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Protocol, Sequence

import numpy as np

from .association import FeatureImage
from .dataset_io import MovingClassSpec, semantic_ids
from .errors import ShapeMismatchError
from .projection import RangeImage
from .residual import ResidualImage

#: Label-file class ids used when exporting binary predictions.
DEFAULT_STATIC_OUTPUT_ID = 251
DEFAULT_MOVING_OUTPUT_ID = 250


class NoCorrespondencePolicy(str, enum.Enum):
    """What to call pixels with no correspondence in any previous scan.

    Both policies resolve to static in the binary mask; ``UNKNOWN_AS_STATIC``
    states explicitly that the pixel was undecidable rather than observed
    static.
    """

    STATIC = "static"
    UNKNOWN_AS_STATIC = "unknown-as-static"


@dataclass(frozen=True)
class ClassifierConfig:
    residual_threshold: float = 0.1
    use_residual: bool = False
    movable_only: bool = True
    no_correspondence: NoCorrespondencePolicy = NoCorrespondencePolicy.STATIC
    vote_min: int = 1

    def __post_init__(self) -> None:
        if self.residual_threshold < 0:
            raise ValueError("residual_threshold must be >= 0")
        if self.vote_min < 1:
            raise ValueError("vote_min must be >= 1")


@dataclass(frozen=True)
class SegLabelImage:
    """Per-pixel semantic class ids with a validity mask."""

    classes: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        if self.classes.shape != self.valid.shape:
            raise ShapeMismatchError(
                f"class grid {self.classes.shape} does not match mask {self.valid.shape}"
            )

    @property
    def shape(self) -> tuple[int, int]:
        return self.classes.shape


class MosHead(Protocol):
    """Plug-in point for a learned pixel classifier.

    Receives the current range image and the transformed per-scan feature
    images untouched; fusion across channels and scans is the head's business.
    Must return an ``(H, W)`` uint8 moving mask.
    """

    def __call__(
        self, current: RangeImage, features: Sequence[FeatureImage]
    ) -> np.ndarray: ...


def sem_label_image(img: RangeImage, point_labels: np.ndarray) -> SegLabelImage:
    """Per-pixel semantic class of each pixel's winning point."""
    sem = semantic_ids(point_labels)
    idx = np.where(img.valid, img.source_point, 0)
    classes = np.where(img.valid, sem[idx], 0).astype(np.uint32)
    return SegLabelImage(classes=classes, valid=img.valid.copy())


def classify_pixels(
    cur_sem: SegLabelImage,
    transformed_sems: Sequence[SegLabelImage],
    residuals: Sequence[ResidualImage] | None,
    cfg: ClassifierConfig,
    spec: MovingClassSpec,
) -> np.ndarray:
    """Binary moving mask over the current image.

    A valid current pixel is moving iff it passes the movable gate and at
    least ``vote_min`` previous scans show a correspondence whose class
    differs from the current one (and, with ``use_residual``, whose residual
    exceeds the threshold). Pixels without any correspondence follow the
    no-correspondence policy, which resolves to static.
    """
    if cfg.use_residual:
        if residuals is None or len(residuals) != len(transformed_sems):
            raise ValueError("use_residual requires one residual per transformed scan")
    elif residuals is not None and len(residuals) not in (0, len(transformed_sems)):
        raise ValueError("residual count does not match transformed scans")

    votes = np.zeros(cur_sem.shape, dtype=np.int64)
    for i, prev in enumerate(transformed_sems):
        if prev.shape != cur_sem.shape:
            raise ShapeMismatchError(
                f"transformed scan {i} shape {prev.shape} vs current {cur_sem.shape}"
            )
        vote = prev.valid & cur_sem.valid & (prev.classes != cur_sem.classes)
        if cfg.use_residual:
            res = residuals[i]
            if res.values.shape != cur_sem.shape:
                raise ShapeMismatchError(
                    f"residual {i} shape {res.values.shape} vs current {cur_sem.shape}"
                )
            vote &= res.values > cfg.residual_threshold
        votes += vote

    moving = cur_sem.valid & (votes >= cfg.vote_min)
    if cfg.movable_only:
        moving &= spec.movable_mask(cur_sem.classes)
    return moving.astype(np.uint8)


def classify_points(mask: np.ndarray, img: RangeImage) -> np.ndarray:
    """Back-project a pixel mask to per-point labels of the original cloud.

    Points owning a pixel take its label; points dropped during projection
    (or beaten in the many-to-one contest) stay static here and are left to
    the kNN refinement.
    """
    if mask.shape != (img.height, img.width):
        raise ShapeMismatchError(
            f"mask {mask.shape} does not match image {(img.height, img.width)}"
        )
    out = np.zeros(img.n_source_points, dtype=np.uint8)
    owners = img.source_point[img.valid]
    out[owners] = np.asarray(mask, dtype=np.uint8)[img.valid]
    return out


def encode_predictions(
    moving: np.ndarray,
    static_id: int = DEFAULT_STATIC_OUTPUT_ID,
    moving_id: int = DEFAULT_MOVING_OUTPUT_ID,
) -> np.ndarray:
    """Binary per-point labels -> label-file class ids."""
    moving = np.asarray(moving)
    return np.where(moving == 1, moving_id, static_id).astype(np.uint32)


def decode_predictions(labels: np.ndarray, moving_id: int = DEFAULT_MOVING_OUTPUT_ID) -> np.ndarray:
    """Label-file class ids -> binary per-point moving flags."""
    return (semantic_ids(labels) == moving_id).astype(np.uint8)
