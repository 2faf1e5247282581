"""Sequence file I/O: scans, labels, poses, calibration, and label mapping.

On-disk conventions follow the KITTI odometry / SemanticKITTI layout:

* Scan files: consecutive little-endian float32 quadruples ``(x, y, z,
  intensity)``, extension-agnostic.
* Label files: one little-endian uint32 per point; the low 16 bits carry the
  semantic class id, the high 16 bits an instance id.
* Pose files: one scan per line, 12 whitespace-separated floats forming a
  row-major 3x4 matrix in the camera frame.
* Calibration files: ``key: v0 v1 ... v11`` lines; the sensor-to-camera entry
  converts camera-frame poses into sensor-frame ones.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import FormatError

POINT_RECORD_BYTES = 16  # four float32 per point
LABEL_RECORD_BYTES = 4

SEMANTIC_MASK = 0xFFFF
INSTANCE_SHIFT = 16

#: SemanticKITTI ids of classes annotated as actually moving.
DEFAULT_MOVING_CLASS_IDS = frozenset(range(252, 260))

#: SemanticKITTI ids of movable categories (vehicles and humans), static
#: instances included; the moving ids above are their in-motion counterparts.
DEFAULT_MOVABLE_CLASS_IDS = frozenset(
    {10, 11, 13, 15, 16, 18, 20, 30, 31, 32} | set(DEFAULT_MOVING_CLASS_IDS)
)

ORTHONORMALITY_TOL = 1e-9


@dataclass(frozen=True)
class PointCloud:
    """A LiDAR scan: point coordinates in meters plus reflectance.

    ``xyz`` is an ``(N, 3)`` float64 array, ``intensity`` an ``(N,)`` float64
    array. Arrays are not copied; treat them as immutable once constructed.
    """

    xyz: np.ndarray
    intensity: np.ndarray

    def __post_init__(self) -> None:
        xyz = np.ascontiguousarray(self.xyz, dtype=np.float64)
        intensity = np.ascontiguousarray(self.intensity, dtype=np.float64)
        if xyz.ndim != 2 or xyz.shape[1] != 3:
            raise ValueError(f"xyz must be (N, 3), got {xyz.shape}")
        if intensity.shape != (xyz.shape[0],):
            raise ValueError(
                f"intensity length {intensity.shape} does not match {xyz.shape[0]} points"
            )
        if not (np.isfinite(xyz).all() and np.isfinite(intensity).all()):
            raise ValueError("point cloud contains non-finite values")
        object.__setattr__(self, "xyz", xyz)
        object.__setattr__(self, "intensity", intensity)

    def __len__(self) -> int:
        return self.xyz.shape[0]

    @property
    def ranges(self) -> np.ndarray:
        """Euclidean distance of each point from the sensor origin."""
        return np.linalg.norm(self.xyz, axis=1)


@dataclass(frozen=True)
class SE3Pose:
    """A rigid transform: ``p' = rotation @ p + translation``."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self) -> None:
        rotation = np.ascontiguousarray(self.rotation, dtype=np.float64)
        translation = np.ascontiguousarray(self.translation, dtype=np.float64)
        if rotation.shape != (3, 3):
            raise ValueError(f"rotation must be 3x3, got {rotation.shape}")
        if translation.shape != (3,):
            raise ValueError(f"translation must be a 3-vector, got {translation.shape}")
        residual = np.abs(rotation.T @ rotation - np.eye(3)).max()
        if residual > ORTHONORMALITY_TOL:
            raise ValueError(f"rotation is not orthonormal (residual {residual:.3e})")
        det = np.linalg.det(rotation)
        if abs(det - 1.0) > ORTHONORMALITY_TOL:
            raise ValueError(f"rotation determinant {det!r} is not +1")
        object.__setattr__(self, "rotation", rotation)
        object.__setattr__(self, "translation", translation)

    @classmethod
    def identity(cls) -> "SE3Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "SE3Pose":
        """Build from a 3x4 or 4x4 homogeneous matrix."""
        matrix = np.asarray(matrix, dtype=np.float64)
        return cls(matrix[:3, :3], matrix[:3, 3])

    def matrix(self) -> np.ndarray:
        """The 4x4 homogeneous matrix."""
        out = np.eye(4)
        out[:3, :3] = self.rotation
        out[:3, 3] = self.translation
        return out

    def inverse(self) -> "SE3Pose":
        rot_inv = self.rotation.T
        return SE3Pose(rot_inv, -(rot_inv @ self.translation))

    def compose(self, other: "SE3Pose") -> "SE3Pose":
        """``self`` after ``other``: (self o other)(p) = self(other(p))."""
        return SE3Pose(
            self.rotation @ other.rotation,
            self.rotation @ other.translation + self.translation,
        )

    def apply(self, xyz: np.ndarray) -> np.ndarray:
        """Transform an ``(N, 3)`` array of points."""
        xyz = np.asarray(xyz, dtype=np.float64)
        return xyz @ self.rotation.T + self.translation


@dataclass(frozen=True)
class MovingClassSpec:
    """Which semantic class ids count as moving, and which are movable at all."""

    moving_class_ids: frozenset[int] = DEFAULT_MOVING_CLASS_IDS
    movable_class_ids: frozenset[int] = DEFAULT_MOVABLE_CLASS_IDS

    def __post_init__(self) -> None:
        moving = frozenset(self.moving_class_ids)
        movable = frozenset(self.movable_class_ids)
        if not moving:
            raise ValueError("moving_class_ids must be nonempty")
        object.__setattr__(self, "moving_class_ids", moving)
        # Moving instances are movable by definition; the remainder of the
        # movable set is their disjoint static counterpart.
        object.__setattr__(self, "movable_class_ids", movable | moving)

    def moving_mask(self, class_ids: np.ndarray) -> np.ndarray:
        return np.isin(class_ids, sorted(self.moving_class_ids))

    def movable_mask(self, class_ids: np.ndarray) -> np.ndarray:
        return np.isin(class_ids, sorted(self.movable_class_ids))


def read_scan(path: str | os.PathLike) -> PointCloud:
    """Read a binary scan file into a :class:`PointCloud`.

    Raises :class:`FormatError` when the file length is not a multiple of the
    16-byte point record.
    """
    size = os.path.getsize(path)
    if size % POINT_RECORD_BYTES != 0:
        offset = (size // POINT_RECORD_BYTES) * POINT_RECORD_BYTES
        raise FormatError(
            f"{path}: scan length {size} is not a multiple of "
            f"{POINT_RECORD_BYTES} bytes (trailing data at offset {offset})"
        )
    raw = np.fromfile(path, dtype="<f4")
    points = raw.reshape(-1, 4).astype(np.float64)
    return PointCloud(points[:, :3], points[:, 3])


def write_scan(cloud: PointCloud, path: str | os.PathLike) -> None:
    """Serialize a cloud in the on-disk float32 quadruple format."""
    out = np.empty((len(cloud), 4), dtype="<f4")
    out[:, :3] = cloud.xyz
    out[:, 3] = cloud.intensity
    out.tofile(path)


def read_labels(path: str | os.PathLike) -> np.ndarray:
    """Read a label file into an ``(N,)`` uint32 array."""
    size = os.path.getsize(path)
    if size % LABEL_RECORD_BYTES != 0:
        raise FormatError(
            f"{path}: label length {size} is not a multiple of {LABEL_RECORD_BYTES} bytes"
        )
    return np.fromfile(path, dtype="<u4")


def write_labels(labels: np.ndarray, path: str | os.PathLike) -> None:
    """Write labels as little-endian uint32, the same format read_labels expects."""
    np.ascontiguousarray(labels, dtype="<u4").tofile(path)


def semantic_ids(labels: np.ndarray) -> np.ndarray:
    """Low 16 bits of each label: the semantic class id."""
    return np.asarray(labels, dtype=np.uint32) & SEMANTIC_MASK


def instance_ids(labels: np.ndarray) -> np.ndarray:
    """High 16 bits of each label: the instance id."""
    return np.asarray(labels, dtype=np.uint32) >> INSTANCE_SHIFT


def pair_scan_labels(cloud: PointCloud, labels: np.ndarray) -> np.ndarray:
    """Validate that labels and scan agree in length. Returns the labels."""
    labels = np.asarray(labels)
    if labels.shape != (len(cloud),):
        raise FormatError(
            f"label count {labels.shape[0] if labels.ndim else 'scalar'} "
            f"does not match scan with {len(cloud)} points"
        )
    return labels


def to_mos_labels(labels: np.ndarray, spec: MovingClassSpec) -> np.ndarray:
    """Collapse semantic labels to a binary moving(1)/static(0) array."""
    return spec.moving_mask(semantic_ids(labels)).astype(np.uint8)


def _orthonormalize(rotation: np.ndarray) -> np.ndarray:
    """Nearest orthogonal matrix with det +1 (SVD projection)."""
    u, _, vt = np.linalg.svd(rotation)
    rot = u @ vt
    if np.linalg.det(rot) < 0:
        u[:, -1] = -u[:, -1]
        rot = u @ vt
    return rot


def _parse_pose_line(line: str, line_no: int, path: str | os.PathLike) -> np.ndarray:
    fields = line.split()
    if len(fields) != 12:
        raise FormatError(f"{path}:{line_no}: expected 12 floats, got {len(fields)}")
    try:
        values = np.array([float(v) for v in fields], dtype=np.float64)
    except ValueError as exc:
        raise FormatError(f"{path}:{line_no}: {exc}") from exc
    if not np.isfinite(values).all():
        raise FormatError(f"{path}:{line_no}: non-finite pose entry")
    matrix = np.eye(4)
    matrix[:3, :] = values.reshape(3, 4)
    return matrix


def read_calibration(
    path: str | os.PathLike, sensor_to_camera_key: str = "Tr"
) -> SE3Pose:
    """Read the sensor-to-camera transform from a key-value calibration file."""
    wanted = sensor_to_camera_key.rstrip(":")
    with open(path) as handle:
        for line in handle:
            line = line.strip()
            if not line:
                continue
            key, _, rest = line.partition(":")
            if key.strip() != wanted:
                continue
            fields = rest.split()
            if len(fields) != 12:
                raise FormatError(
                    f"{path}: calibration entry {wanted!r} has {len(fields)} floats, expected 12"
                )
            values = np.array([float(v) for v in fields]).reshape(3, 4)
            rotation = values[:, :3]
            if np.abs(rotation.T @ rotation - np.eye(3)).max() > ORTHONORMALITY_TOL:
                rotation = _orthonormalize(rotation)
            return SE3Pose(rotation, values[:, 3])
    raise FormatError(f"{path}: missing calibration entry {wanted!r}")


def read_poses(
    poses_path: str | os.PathLike,
    calib_path: str | os.PathLike | None = None,
    sensor_to_camera_key: str = "Tr",
) -> list[SE3Pose]:
    """Read per-scan world poses, converted to the sensor frame.

    Pose lines are camera-frame matrices ``P``; with the sensor-to-camera
    calibration ``C`` the sensor-frame pose is ``C^-1 P C``. Without a
    calibration file the poses are taken to be sensor-frame already.
    """
    calib = read_calibration(calib_path, sensor_to_camera_key) if calib_path else None
    poses: list[SE3Pose] = []
    with open(poses_path) as handle:
        for line_no, line in enumerate(handle):
            if not line.strip():
                continue
            matrix = _parse_pose_line(line, line_no, poses_path)
            if calib is not None:
                matrix = calib.inverse().matrix() @ matrix @ calib.matrix()
            rotation = matrix[:3, :3]
            if np.abs(rotation.T @ rotation - np.eye(3)).max() > ORTHONORMALITY_TOL:
                rotation = _orthonormalize(rotation)
            poses.append(SE3Pose(rotation, matrix[:3, 3]))
    return poses


def write_poses(poses: list[SE3Pose], path: str | os.PathLike) -> None:
    """Write world poses as 12-float camera-frame lines (identity calibration)."""
    with open(path, "w") as handle:
        for pose in poses:
            row = pose.matrix()[:3, :].reshape(-1)
            handle.write(" ".join(f"{v:.17g}" for v in row) + "\n")


def write_identity_calibration(path: str | os.PathLike, sensor_to_camera_key: str = "Tr") -> None:
    """Write a calibration file whose sensor-to-camera transform is identity."""
    row = np.eye(4)[:3, :].reshape(-1)
    Path(path).write_text(
        f"{sensor_to_camera_key}: " + " ".join(f"{v:.17g}" for v in row) + "\n"
    )


def relative_pose(pose_i: SE3Pose, pose_0: SE3Pose) -> SE3Pose:
    """Transform carrying scan-i coordinates into scan-0 coordinates."""
    return pose_0.inverse().compose(pose_i)
