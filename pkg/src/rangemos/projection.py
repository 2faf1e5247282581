"""Spherical projection of point clouds to multi-channel range images.

A point ``(x, y, z)`` maps to image coordinates through its yaw and pitch:

    yaw   = atan2(y, x)
    pitch = asin(z / range)
    u     = floor(0.5 * (1 - yaw/pi) * W)        clamped to [0, W-1]
    v     = floor((1 - (pitch - fov_down)/fov) * H)  clamped to [0, H-1]

Floor-then-clamp is the pinned rounding rule so results are bit-reproducible.
When several points land on one pixel the nearest wins, ties broken by the
lowest point index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset_io import PointCloud
from .errors import ShapeMismatchError
from .kernels import scatter_argmin

CHANNEL_NAMES = ("range", "x", "y", "z", "intensity")


@dataclass(frozen=True)
class ProjectionConfig:
    """Range-image geometry: resolution and vertical field of view (radians).

    Defaults match a 64-beam HDL-64E panorama: 2048x64 pixels over
    [-25 deg, +3 deg].
    """

    width: int = 2048
    height: int = 64
    fov_up: float = np.deg2rad(3.0)
    fov_down: float = np.deg2rad(-25.0)
    min_range: float = 1e-6
    range_fill: float = -1.0
    channel_fill: float = 0.0

    def __post_init__(self) -> None:
        if self.width < 1 or self.height < 1:
            raise ValueError(f"image size {self.width}x{self.height} must be >= 1x1")
        if not self.fov_up > self.fov_down:
            raise ValueError("fov_up must exceed fov_down")
        if self.min_range <= 0:
            raise ValueError("min_range must be positive")

    @property
    def fov(self) -> float:
        return self.fov_up - self.fov_down


@dataclass(frozen=True)
class RangeImage:
    """Per-pixel range, x, y, z, intensity grids with validity and provenance.

    ``source_point[v, u]`` is the index of the winning point in the
    originating cloud, -1 on invalid pixels. All channel grids are
    ``(H, W)`` float64.
    """

    config: ProjectionConfig
    range: np.ndarray
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray
    intensity: np.ndarray
    valid: np.ndarray
    source_point: np.ndarray
    n_source_points: int

    def __post_init__(self) -> None:
        shape = (self.config.height, self.config.width)
        for name in (*CHANNEL_NAMES, "valid", "source_point"):
            grid = getattr(self, name)
            if grid.shape != shape:
                raise ShapeMismatchError(f"channel {name!r} has shape {grid.shape}, expected {shape}")

    @property
    def width(self) -> int:
        return self.config.width

    @property
    def height(self) -> int:
        return self.config.height

    def channel(self, name: str) -> np.ndarray:
        if name not in CHANNEL_NAMES:
            raise KeyError(f"unknown channel {name!r}")
        return getattr(self, name)

    def points(self) -> np.ndarray:
        """``(H, W, 3)`` stacked x, y, z channels."""
        return np.stack([self.x, self.y, self.z], axis=-1)


@dataclass(frozen=True)
class PointPixelMap:
    """Per-point pixel assignment produced by projection.

    ``u``/``v`` are -1 for points that received no pixel (degenerate range or
    outside the vertical field of view). ``u_f``/``v_f`` keep the continuous
    image coordinates before truncation (NaN for degenerate points), which
    lets dropped points still anchor a window lookup.
    """

    u: np.ndarray
    v: np.ndarray
    u_f: np.ndarray
    v_f: np.ndarray

    def __len__(self) -> int:
        return self.u.shape[0]

    @property
    def has_pixel(self) -> np.ndarray:
        return self.u >= 0


def project_angles(xyz: np.ndarray, cfg: ProjectionConfig):
    """Continuous image coordinates and masks for an ``(N, 3)`` point array.

    Returns ``(u_f, v_f, ranges, usable, in_fov)`` where ``usable`` marks
    points with range above the degeneracy epsilon and ``in_fov`` marks usable
    points whose pitch lies inside [fov_down, fov_up]. This is the single
    shared implementation of the projection equations; reprojection reuses it
    so that identical inputs give bit-identical pixels.
    """
    xyz = np.asarray(xyz, dtype=np.float64)
    ranges = np.linalg.norm(xyz, axis=1)
    usable = ranges >= cfg.min_range
    safe_range = np.where(usable, ranges, 1.0)

    yaw = np.arctan2(xyz[:, 1], xyz[:, 0])
    pitch = np.arcsin(np.clip(xyz[:, 2] / safe_range, -1.0, 1.0))
    u_f = 0.5 * (1.0 - yaw / np.pi) * cfg.width
    v_f = (1.0 - (pitch - cfg.fov_down) / cfg.fov) * cfg.height

    in_fov = usable & (pitch >= cfg.fov_down) & (pitch <= cfg.fov_up)
    u_f = np.where(usable, u_f, np.nan)
    v_f = np.where(usable, v_f, np.nan)
    return u_f, v_f, ranges, usable, in_fov


def pixel_of(u_f: np.ndarray, v_f: np.ndarray, cfg: ProjectionConfig):
    """Truncate continuous coordinates to clamped integer pixels."""
    with np.errstate(invalid="ignore"):
        u = np.clip(np.floor(u_f), 0, cfg.width - 1)
        v = np.clip(np.floor(v_f), 0, cfg.height - 1)
    u = np.where(np.isnan(u_f), -1, u).astype(np.int64)
    v = np.where(np.isnan(v_f), -1, v).astype(np.int64)
    return u, v


def spherical_project(cloud: PointCloud, cfg: ProjectionConfig) -> tuple[RangeImage, PointPixelMap]:
    """Project a cloud into a range image.

    Points below ``cfg.min_range`` are skipped as degenerate; points whose
    pitch falls outside the vertical field of view are dropped. Contested
    pixels keep the point with the minimum range (ties: lowest point index).
    """
    u_f, v_f, ranges, usable, in_fov = project_angles(cloud.xyz, cfg)
    u, v = pixel_of(u_f, v_f, cfg)
    u = np.where(in_fov, u, -1)
    v = np.where(in_fov, v, -1)
    pixmap = PointPixelMap(u=u, v=v, u_f=u_f, v_f=v_f)

    candidates = np.flatnonzero(in_fov)
    flat = v[candidates] * cfg.width + u[candidates]
    winners_flat = scatter_argmin(flat, ranges[candidates], cfg.height * cfg.width)
    hit = winners_flat >= 0
    # Map winner slots back to original point indices.
    source = np.full(cfg.height * cfg.width, -1, dtype=np.int64)
    source[hit] = candidates[winners_flat[hit]]

    img = _image_from_points(cloud.xyz, cloud.intensity, ranges, source, cfg)
    return img, pixmap


def _image_from_points(
    xyz: np.ndarray,
    intensity: np.ndarray,
    ranges: np.ndarray,
    source_flat: np.ndarray,
    cfg: ProjectionConfig,
) -> RangeImage:
    """Assemble channel grids from a flat pixel->point winner table."""
    shape = (cfg.height, cfg.width)
    source = source_flat.reshape(shape)
    valid = source >= 0
    idx = np.where(valid, source, 0)

    def fill(values: np.ndarray, fill_value: float) -> np.ndarray:
        if values.shape[0] == 0:
            return np.full(shape, fill_value)
        return np.where(valid, values[idx], fill_value)

    return RangeImage(
        config=cfg,
        range=fill(ranges, cfg.range_fill),
        x=fill(xyz[:, 0], cfg.channel_fill),
        y=fill(xyz[:, 1], cfg.channel_fill),
        z=fill(xyz[:, 2], cfg.channel_fill),
        intensity=fill(intensity, cfg.channel_fill),
        valid=valid,
        source_point=source,
        n_source_points=xyz.shape[0],
    )


def back_project(img: RangeImage) -> tuple[PointCloud, np.ndarray]:
    """One point per valid pixel, in row-major pixel order.

    Returns the cloud and a parallel array of flat pixel indices, so callers
    can trace each point back to its pixel.
    """
    flat_valid = img.valid.reshape(-1)
    pixels = np.flatnonzero(flat_valid)
    xyz = np.column_stack(
        [img.x.reshape(-1)[pixels], img.y.reshape(-1)[pixels], img.z.reshape(-1)[pixels]]
    )
    cloud = PointCloud(xyz, img.intensity.reshape(-1)[pixels])
    return cloud, pixels
