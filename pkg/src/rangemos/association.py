"""Adjacent-scan association: carry a previous range image into the current frame.

Three steps, all operating on the previous image's surviving points rather
than the raw previous scan:

1. rigid transform of the stored points into the current coordinate system,
2. reprojection into the current image geometry (producing the transformed
   range image), and
3. an index map from every previous pixel to its landing pixel, which drives
   feature/label scatter.

Scatter conflicts are resolved by minimum transformed range with lowest
source-pixel tie-breaking; this is deterministic by contract.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import numpy as np

from .dataset_io import PointCloud, SE3Pose
from .errors import FormatError, ShapeMismatchError
from .kernels import scatter_argmin
from .projection import (
    ProjectionConfig,
    RangeImage,
    _image_from_points,
    back_project,
    pixel_of,
    project_angles,
)

ABSENT = -1


@dataclass(frozen=True)
class AssociationMap:
    """Per-source-pixel flat index into the current frame.

    ``entries[v, u]`` is ``u0 + v0 * W`` where the transformed point behind
    source pixel ``(u, v)`` lands, or -1 when the source pixel is invalid or
    the point leaves the image. ``transformed_range[v, u]`` is that point's
    range in the current frame (+inf where absent); scatter uses it to settle
    many-to-one conflicts.
    """

    width: int
    height: int
    entries: np.ndarray
    transformed_range: np.ndarray

    def __post_init__(self) -> None:
        shape = (self.height, self.width)
        if self.entries.shape != shape or self.transformed_range.shape != shape:
            raise ShapeMismatchError(
                f"association grids {self.entries.shape} do not match {shape}"
            )

    @property
    def present(self) -> np.ndarray:
        return self.entries >= 0

    def decode(self) -> tuple[np.ndarray, np.ndarray]:
        """Per-source-pixel target (u0, v0); -1 where absent."""
        u0 = np.where(self.present, self.entries % self.width, -1)
        v0 = np.where(self.present, self.entries // self.width, -1)
        return u0, v0


@dataclass(frozen=True)
class FeatureImage:
    """An ``(H, W, C)`` feature grid with a validity mask.

    The channel count is arbitrary so learned per-pixel features can flow
    through the same scatter path as hand-built ones.
    """

    data: np.ndarray
    valid: np.ndarray

    def __post_init__(self) -> None:
        if self.data.ndim != 3 or self.data.shape[2] < 1:
            raise ShapeMismatchError(f"feature data must be (H, W, C>=1), got {self.data.shape}")
        if self.valid.shape != self.data.shape[:2]:
            raise ShapeMismatchError(
                f"valid mask {self.valid.shape} does not match data {self.data.shape[:2]}"
            )

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def channels(self) -> int:
        return self.data.shape[2]


def transform_cloud(cloud: PointCloud, pose: SE3Pose) -> PointCloud:
    """Apply a rigid transform to every point; intensity and order unchanged."""
    return PointCloud(pose.apply(cloud.xyz), cloud.intensity)


def reproject_previous(
    prev_img: RangeImage, transform: SE3Pose, cfg: ProjectionConfig
) -> tuple[RangeImage, AssociationMap]:
    """Transform a previous range image into the current frame.

    Every valid previous pixel's stored point is moved by ``transform`` and
    reprojected with the current geometry. The returned range image holds the
    transformed points (minimum-range conflict resolution); the association
    map records, per previous pixel, the flat landing index.
    """
    if (prev_img.width, prev_img.height) != (cfg.width, cfg.height):
        raise ShapeMismatchError(
            f"previous image is {prev_img.width}x{prev_img.height}, "
            f"config expects {cfg.width}x{cfg.height}"
        )
    prev_cloud, src_pixels = back_project(prev_img)
    moved = transform.apply(prev_cloud.xyz)

    u_f, v_f, ranges, _, in_fov = project_angles(moved, cfg)
    u, v = pixel_of(u_f, v_f, cfg)

    n_cells = cfg.height * cfg.width
    entries = np.full(n_cells, ABSENT, dtype=np.int64)
    t_range = np.full(n_cells, np.inf)
    landing = v * cfg.width + u
    entries[src_pixels[in_fov]] = landing[in_fov]
    t_range[src_pixels[in_fov]] = ranges[in_fov]
    assoc = AssociationMap(
        width=cfg.width,
        height=cfg.height,
        entries=entries.reshape(cfg.height, cfg.width),
        transformed_range=t_range.reshape(cfg.height, cfg.width),
    )

    candidates = np.flatnonzero(in_fov)
    winners = scatter_argmin(landing[candidates], ranges[candidates], n_cells)
    hit = winners >= 0
    source = np.full(n_cells, -1, dtype=np.int64)
    source[hit] = candidates[winners[hit]]
    img = _image_from_points(moved, prev_cloud.intensity, ranges, source, cfg)
    return img, assoc


def target_winners(assoc: AssociationMap) -> np.ndarray:
    """Per-target-pixel flat source index winning the scatter, -1 if none."""
    present = assoc.present.reshape(-1)
    src = np.flatnonzero(present)
    winners = scatter_argmin(
        assoc.entries.reshape(-1)[src],
        assoc.transformed_range.reshape(-1)[src],
        assoc.height * assoc.width,
    )
    hit = winners >= 0
    out = np.full(assoc.height * assoc.width, -1, dtype=np.int64)
    out[hit] = src[winners[hit]]
    return out


def scatter_features(feat: FeatureImage, assoc: AssociationMap) -> FeatureImage:
    """Move per-pixel features along the association map.

    Target pixels contested by several sources take the one with the minimum
    transformed range (ties: lowest source flat index). Unmapped targets are
    invalid and zero-filled.
    """
    if (feat.height, feat.width) != (assoc.height, assoc.width):
        raise ShapeMismatchError(
            f"features {feat.height}x{feat.width} do not match "
            f"association {assoc.height}x{assoc.width}"
        )
    winners = _masked_winners(feat.valid, assoc)
    valid = winners >= 0
    idx = np.where(valid, winners, 0)
    flat_data = feat.data.reshape(-1, feat.channels)
    data = np.where(valid[:, None], flat_data[idx], 0.0)
    return FeatureImage(
        data=data.reshape(feat.height, feat.width, feat.channels),
        valid=valid.reshape(feat.height, feat.width),
    )


def scatter_labels(classes: np.ndarray, valid: np.ndarray, assoc: AssociationMap) -> tuple[np.ndarray, np.ndarray]:
    """Scatter an integer label grid; same conflict rule as scatter_features.

    Returns ``(classes, valid)`` grids in the current frame. Labels transfer
    exactly (no float round-trip), which matters for class-id comparisons.
    """
    if classes.shape != (assoc.height, assoc.width):
        raise ShapeMismatchError(
            f"label grid {classes.shape} does not match association "
            f"{(assoc.height, assoc.width)}"
        )
    winners = _masked_winners(valid, assoc)
    out_valid = winners >= 0
    idx = np.where(out_valid, winners, 0)
    out = np.where(out_valid, classes.reshape(-1)[idx], 0).astype(classes.dtype)
    return out.reshape(classes.shape), out_valid.reshape(classes.shape)


def _masked_winners(src_valid: np.ndarray, assoc: AssociationMap) -> np.ndarray:
    """Per-target winning source among sources that are present and valid."""
    participating = assoc.present.reshape(-1) & src_valid.reshape(-1)
    src = np.flatnonzero(participating)
    winners = scatter_argmin(
        assoc.entries.reshape(-1)[src],
        assoc.transformed_range.reshape(-1)[src],
        assoc.height * assoc.width,
    )
    hit = winners >= 0
    out = np.full(assoc.height * assoc.width, -1, dtype=np.int64)
    out[hit] = src[winners[hit]]
    return out


def associate_sequence(
    current: RangeImage,
    previous: list[tuple[RangeImage, SE3Pose]],
    cfg: ProjectionConfig,
) -> list[tuple[RangeImage, AssociationMap]]:
    """Reproject each previous scan against the current frame independently."""
    if (current.width, current.height) != (cfg.width, cfg.height):
        raise ShapeMismatchError(
            f"current image is {current.width}x{current.height}, "
            f"config expects {cfg.width}x{cfg.height}"
        )
    return [reproject_previous(img, pose, cfg) for img, pose in previous]


def write_association(assoc: AssociationMap, path: str | os.PathLike, absent_value: int = ABSENT) -> None:
    """Export as row-major little-endian int32, one entry per source pixel.

    ``absent_value`` defaults to -1; pass 0 for tooling that reserves 0 for
    missing correspondences (that encoding collides with the legal flat index
    of pixel (0, 0) and exists for compatibility only).
    """
    if absent_value not in (ABSENT, 0):
        raise ValueError(f"absent_value must be -1 or 0, got {absent_value}")
    out = assoc.entries.astype("<i4")
    out[~assoc.present] = absent_value
    out.tofile(path)


def read_association(path: str | os.PathLike, width: int, height: int, absent_value: int = ABSENT) -> AssociationMap:
    """Read an exported association map; transformed ranges are not stored."""
    raw = np.fromfile(path, dtype="<i4")
    if raw.size != width * height:
        raise FormatError(
            f"{path}: expected {width * height} entries for {width}x{height}, got {raw.size}"
        )
    entries = raw.astype(np.int64).reshape(height, width)
    if absent_value != ABSENT:
        entries[entries == absent_value] = ABSENT
    t_range = np.where(entries >= 0, 0.0, np.inf)
    return AssociationMap(width=width, height=height, entries=entries, transformed_range=t_range)
