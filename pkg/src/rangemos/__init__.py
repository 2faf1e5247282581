"""Geometric core for LiDAR moving-object segmentation on range images.

The library covers the non-learned half of a semantics-guided MOS system:
spherical range-image projection, ego-motion scan association, cross-scan
feature and label scatter, range residuals, a rule-based moving/static
classifier, kNN cleanup, IoU evaluation, and a synthetic-scene generator
with exact ground truth.
"""

from .association import (
    AssociationMap,
    FeatureImage,
    associate_sequence,
    reproject_previous,
    scatter_features,
    scatter_labels,
    transform_cloud,
)
from .dataset_io import (
    MovingClassSpec,
    PointCloud,
    SE3Pose,
    read_labels,
    read_poses,
    read_scan,
    relative_pose,
    to_mos_labels,
    write_labels,
    write_scan,
)
from .errors import FormatError, ShapeMismatchError
from .evaluation import ConfusionMatrix, accumulate, iou_moving
from .kernels import backend_name
from .mos import (
    ClassifierConfig,
    SegLabelImage,
    classify_pixels,
    classify_points,
    sem_label_image,
)
from .postprocess import KnnConfig, knn_refine
from .projection import (
    PointPixelMap,
    ProjectionConfig,
    RangeImage,
    back_project,
    spherical_project,
)
from .residual import ResidualImage, range_residual
from .synth import Box, SceneConfig, ScanRecord, default_scene, generate

__version__ = "0.1.0"

__all__ = [
    "AssociationMap",
    "Box",
    "ClassifierConfig",
    "ConfusionMatrix",
    "FeatureImage",
    "FormatError",
    "KnnConfig",
    "MovingClassSpec",
    "PointCloud",
    "PointPixelMap",
    "ProjectionConfig",
    "RangeImage",
    "ResidualImage",
    "SE3Pose",
    "ScanRecord",
    "SceneConfig",
    "SegLabelImage",
    "ShapeMismatchError",
    "accumulate",
    "associate_sequence",
    "back_project",
    "backend_name",
    "classify_pixels",
    "classify_points",
    "default_scene",
    "generate",
    "iou_moving",
    "knn_refine",
    "range_residual",
    "read_labels",
    "read_poses",
    "read_scan",
    "relative_pose",
    "reproject_previous",
    "scatter_features",
    "scatter_labels",
    "sem_label_image",
    "spherical_project",
    "to_mos_labels",
    "transform_cloud",
    "write_labels",
    "write_scan",
]
