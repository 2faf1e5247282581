"""Synthetic LiDAR sequences with exact poses and exact motion ground truth.

Scenes are a ground plane plus axis-aligned boxes, some carried by a constant
per-scan velocity. One ray is cast per (ring, azimuth) cell from each sensor
pose; the nearest analytic hit becomes a point, labeled with its surface's
semantic class. Ray directions are chosen at pixel centers of the paired
projection geometry, so each returned point projects back to its own cell.

Realism is a non-goal: exact, independently checkable geometry is the point.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataset_io import (
    PointCloud,
    SE3Pose,
    write_identity_calibration,
    write_labels,
    write_poses,
    write_scan,
)
from .projection import ProjectionConfig

RAY_EPS = 1e-9  # hits closer than this are treated as misses

GROUND_CLASS_ID = 40
BUILDING_CLASS_ID = 50
PARKED_VEHICLE_CLASS_ID = 10
MOVING_VEHICLE_CLASS_ID = 252


@dataclass(frozen=True)
class Box:
    """Axis-aligned box; ``velocity`` is its displacement per scan."""

    center: tuple[float, float, float]
    size: tuple[float, float, float]
    class_id: int
    velocity: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self) -> None:
        if min(self.size) <= 0:
            raise ValueError(f"box size must be positive, got {self.size}")

    @property
    def is_moving(self) -> bool:
        return any(v != 0.0 for v in self.velocity)

    def center_at(self, scan_index: int) -> np.ndarray:
        return np.asarray(self.center) + scan_index * np.asarray(self.velocity)


@dataclass(frozen=True)
class SceneConfig:
    """A synthetic scene: geometry, sensor trajectory, beams, range noise."""

    trajectory: tuple[SE3Pose, ...]
    boxes: tuple[Box, ...] = ()
    ground_extent: float = 80.0
    ground_class_id: int = GROUND_CLASS_ID
    beams: ProjectionConfig = field(default_factory=lambda: ProjectionConfig(width=512, height=48))
    range_noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if len(self.trajectory) < 2:
            raise ValueError("trajectory must contain at least 2 poses")
        if self.ground_extent <= 0:
            raise ValueError("ground_extent must be positive")
        if self.range_noise_sigma < 0:
            raise ValueError("range_noise_sigma must be >= 0")
        object.__setattr__(self, "trajectory", tuple(self.trajectory))
        object.__setattr__(self, "boxes", tuple(self.boxes))

    @property
    def n_scans(self) -> int:
        return len(self.trajectory)


@dataclass(frozen=True)
class ScanRecord:
    """One generated scan: points (sensor frame), labels, motion GT, pose."""

    cloud: PointCloud
    labels: np.ndarray  # (N,) uint32 semantic class ids
    moving: np.ndarray  # (N,) uint8 exact ground truth
    pose: SE3Pose


def beam_directions(beams: ProjectionConfig) -> np.ndarray:
    """Unit ray directions at pixel centers, row-major ``(H*W, 3)``."""
    rows = np.arange(beams.height)
    cols = np.arange(beams.width)
    pitch = beams.fov_up - (rows + 0.5) * beams.fov / beams.height
    yaw = np.pi * (1.0 - (2.0 * cols + 1.0) / beams.width)
    pitch_grid, yaw_grid = np.meshgrid(pitch, yaw, indexing="ij")
    cos_pitch = np.cos(pitch_grid)
    dirs = np.stack(
        [cos_pitch * np.cos(yaw_grid), cos_pitch * np.sin(yaw_grid), np.sin(pitch_grid)],
        axis=-1,
    )
    return dirs.reshape(-1, 3)


def ray_plane_hits(origin: np.ndarray, dirs: np.ndarray, extent: float) -> np.ndarray:
    """Distance to the z=0 ground plane per ray; +inf for misses."""
    dz = dirs[:, 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(dz != 0.0, -origin[2] / dz, np.inf)
    hit = origin[None, :] + t[:, None] * dirs
    ok = (t > RAY_EPS) & (np.abs(hit[:, 0]) <= extent) & (np.abs(hit[:, 1]) <= extent)
    return np.where(ok, t, np.inf)


def ray_box_hits(origin: np.ndarray, dirs: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Slab-test distance to an axis-aligned box per ray; +inf for misses."""
    with np.errstate(divide="ignore", invalid="ignore"):
        inv = 1.0 / dirs
    t1 = (lo[None, :] - origin[None, :]) * inv
    t2 = (hi[None, :] - origin[None, :]) * inv
    t_near = np.nanmax(np.minimum(t1, t2), axis=1)
    t_far = np.nanmin(np.maximum(t1, t2), axis=1)
    ok = (t_near <= t_far) & (t_near > RAY_EPS)
    return np.where(ok, t_near, np.inf)


def _cast_scan(cfg: SceneConfig, scan_index: int, rng: np.random.Generator) -> ScanRecord:
    pose = cfg.trajectory[scan_index]
    dirs_sensor = beam_directions(cfg.beams)
    dirs_world = dirs_sensor @ pose.rotation.T
    origin = pose.translation

    distances = [ray_plane_hits(origin, dirs_world, cfg.ground_extent)]
    classes = [cfg.ground_class_id]
    moving_flags = [False]
    for box in cfg.boxes:
        center = box.center_at(scan_index)
        half = 0.5 * np.asarray(box.size)
        distances.append(ray_box_hits(origin, dirs_world, center - half, center + half))
        classes.append(box.class_id)
        moving_flags.append(box.is_moving)

    dist = np.stack(distances, axis=0)
    nearest = np.argmin(dist, axis=0)
    best = dist[nearest, np.arange(dist.shape[1])]
    hit = np.isfinite(best)

    ranges = best[hit]
    if cfg.range_noise_sigma > 0:
        ranges = ranges + rng.normal(0.0, cfg.range_noise_sigma, ranges.shape)
        ranges = np.maximum(ranges, 10.0 * cfg.beams.min_range)
    # Points in the sensor frame: noise acts along the ray, so angles are
    # untouched and each point stays in its own beam cell.
    xyz = ranges[:, None] * dirs_sensor[hit]

    class_arr = np.asarray(classes, dtype=np.uint32)
    moving_arr = np.asarray(moving_flags, dtype=np.uint8)
    labels = class_arr[nearest[hit]]
    moving = moving_arr[nearest[hit]]
    intensity = (labels.astype(np.float64) % 256.0) / 255.0
    return ScanRecord(PointCloud(xyz, intensity), labels, moving, pose)


def generate(cfg: SceneConfig) -> list[ScanRecord]:
    """Generate the full sequence; deterministic for a fixed config and seed."""
    records = []
    for scan_index in range(cfg.n_scans):
        rng = np.random.default_rng([cfg.seed, scan_index])
        records.append(_cast_scan(cfg, scan_index, rng))
    return records


def write_sequence(records: list[ScanRecord], out_dir: str | os.PathLike) -> None:
    """Emit the dataset_io on-disk layout: scans, labels, poses, calibration."""
    out = Path(out_dir)
    scan_dir = out / "velodyne"
    label_dir = out / "labels"
    scan_dir.mkdir(parents=True, exist_ok=True)
    label_dir.mkdir(parents=True, exist_ok=True)
    for i, rec in enumerate(records):
        write_scan(rec.cloud, scan_dir / f"{i:06d}.bin")
        write_labels(rec.labels, label_dir / f"{i:06d}.label")
    write_poses([rec.pose for rec in records], out / "poses.txt")
    write_identity_calibration(out / "calib.txt")


def default_scene(
    n_scans: int = 10,
    beams: ProjectionConfig | None = None,
    range_noise_sigma: float = 0.0,
    seed: int = 0,
) -> SceneConfig:
    """Ground plane, a building, a parked vehicle, and one moving vehicle.

    The sensor drives forward at 0.3 m per scan, mounted 2 m above ground, so
    every object sits below the horizon and ground stays visible behind them.
    The moving box starts fully occluded by the building and crosses the view
    tangentially: class-consistency cannot see the interior of a radially
    moving uniform object, and tangential motion keeps consecutive positions
    from overlapping in angle.
    """
    if beams is None:
        beams = ProjectionConfig(width=512, height=48)
    trajectory = tuple(
        SE3Pose(np.eye(3), np.array([0.3 * t, 0.0, 2.0])) for t in range(n_scans)
    )
    boxes = (
        Box(center=(12.0, -6.0, 1.25), size=(3.0, 3.0, 2.5), class_id=BUILDING_CLASS_ID),
        Box(center=(7.0, 5.0, 0.75), size=(3.5, 1.8, 1.5), class_id=PARKED_VEHICLE_CLASS_ID),
        Box(
            center=(16.5, -7.8, 0.6),
            size=(2.2, 2.2, 1.2),
            class_id=MOVING_VEHICLE_CLASS_ID,
            velocity=(0.0, 3.3, 0.0),
        ),
    )
    return SceneConfig(
        trajectory=trajectory,
        boxes=boxes,
        ground_extent=100.0,
        beams=beams,
        range_noise_sigma=range_noise_sigma,
        seed=seed,
    )
