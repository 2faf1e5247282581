"""End-to-end segmentation over an on-disk sequence.

For every scan with enough history: project, associate each of the previous
``n_prev`` scans into the current frame, apply the semantic-consistency rule,
kNN-refine, and write a prediction label file. Boundary scans (not enough
history) emit all-static predictions so prediction files stay index-aligned
with the dataset.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import dataset_io
from .association import FeatureImage, reproject_previous, scatter_labels
from .dataset_io import MovingClassSpec, relative_pose
from .evaluation import ConfusionMatrix, accumulate, format_report
from .mos import (
    ClassifierConfig,
    MosHead,
    SegLabelImage,
    classify_pixels,
    classify_points,
    decode_predictions,
    encode_predictions,
    sem_label_image,
)
from .postprocess import KnnConfig, knn_refine
from .projection import ProjectionConfig, spherical_project
from .residual import range_residual

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SequencePaths:
    """Where a sequence lives on disk. Nothing is ever hard-coded."""

    scan_dir: Path
    poses_path: Path
    label_dir: Path | None = None
    calib_path: Path | None = None

    def scans(self) -> list[Path]:
        return sorted(p for p in Path(self.scan_dir).iterdir() if p.is_file())

    def label_for(self, scan_path: Path) -> Path:
        if self.label_dir is None:
            raise FileNotFoundError("no label directory configured")
        return Path(self.label_dir) / (scan_path.stem + ".label")


@dataclass(frozen=True)
class PipelineConfig:
    """Everything run_segment needs beyond the sequence paths."""

    projection: ProjectionConfig = field(default_factory=ProjectionConfig)
    classifier: ClassifierConfig = field(default_factory=ClassifierConfig)
    knn: KnnConfig = field(default_factory=KnnConfig)
    moving_classes: MovingClassSpec = field(default_factory=MovingClassSpec)
    n_prev: int = 1
    knn_enabled: bool = True
    static_output_id: int = 251
    moving_output_id: int = 250

    def __post_init__(self) -> None:
        if self.n_prev < 1:
            raise ValueError("n_prev must be >= 1")


@dataclass
class SegmentResult:
    """What a segment run produced: files, failures, optional evaluation."""

    prediction_files: list[Path]
    failed_scans: list[int]
    confusion: ConfusionMatrix | None = None
    per_scan: list[tuple[str, ConfusionMatrix]] | None = None

    @property
    def report(self) -> tuple[str, str] | None:
        if self.confusion is None:
            return None
        return format_report(self.confusion, self.per_scan)


class _LoadedSequence:
    """Scan/label/pose triples with startup validation."""

    def __init__(self, paths: SequencePaths, need_labels: bool):
        self.paths = paths
        self.scan_paths = paths.scans()
        if not self.scan_paths:
            raise FileNotFoundError(f"no scan files under {paths.scan_dir}")
        if not Path(paths.poses_path).is_file():
            raise FileNotFoundError(f"pose file not found: {paths.poses_path}")
        self.poses = dataset_io.read_poses(paths.poses_path, paths.calib_path)
        if len(self.poses) < len(self.scan_paths):
            raise dataset_io.FormatError(
                f"{len(self.poses)} poses for {len(self.scan_paths)} scans"
            )
        self.need_labels = need_labels
        if need_labels:
            missing = [
                str(paths.label_for(p)) for p in self.scan_paths if not paths.label_for(p).is_file()
            ]
            if missing:
                raise FileNotFoundError(f"missing label files: {', '.join(missing[:3])} ...")

    def load(self, index: int):
        scan_path = self.scan_paths[index]
        cloud = dataset_io.read_scan(scan_path)
        labels = None
        if self.need_labels:
            labels = dataset_io.pair_scan_labels(
                cloud, dataset_io.read_labels(self.paths.label_for(scan_path))
            )
        return cloud, labels, self.poses[index]


def segment_scan(
    seq: _LoadedSequence,
    index: int,
    cfg: PipelineConfig,
    head: MosHead | None = None,
) -> np.ndarray:
    """Per-point binary prediction for one scan with full history available."""
    cloud, labels, pose = seq.load(index)
    proj = cfg.projection
    cur_img, cur_pixmap = spherical_project(cloud, proj)
    cur_sem = sem_label_image(cur_img, labels)

    transformed_sems: list[SegLabelImage] = []
    residuals = []
    features: list[FeatureImage] = []
    for back in range(1, cfg.n_prev + 1):
        prev_cloud, prev_labels, prev_pose = seq.load(index - back)
        prev_img, _ = spherical_project(prev_cloud, proj)
        prev_sem = sem_label_image(prev_img, prev_labels)
        transform = relative_pose(prev_pose, pose)
        moved_img, assoc = reproject_previous(prev_img, transform, proj)
        classes, valid = scatter_labels(prev_sem.classes, prev_sem.valid, assoc)
        transformed_sems.append(SegLabelImage(classes, valid))
        if cfg.classifier.use_residual:
            residuals.append(range_residual(cur_img, moved_img))
        if head is not None:
            features.append(
                FeatureImage(classes.astype(np.float64)[:, :, None], valid.copy())
            )

    if head is not None:
        mask = np.asarray(head(cur_img, features), dtype=np.uint8)
    else:
        mask = classify_pixels(
            cur_sem,
            transformed_sems,
            residuals if cfg.classifier.use_residual else None,
            cfg.classifier,
            cfg.moving_classes,
        )
    point_labels = classify_points(mask, cur_img)
    if cfg.knn_enabled:
        point_labels = knn_refine(cloud, cur_pixmap, cur_img, point_labels, cfg.knn)
    return point_labels


def run_segment(
    paths: SequencePaths,
    cfg: PipelineConfig,
    out_dir: Path,
    evaluate: bool = False,
    strict: bool = False,
    jobs: int = 1,
    head: MosHead | None = None,
) -> SegmentResult:
    """Segment a whole sequence, writing one prediction file per scan.

    Scan failures are logged and skipped unless ``strict``. With ``evaluate``
    the ground-truth moving labels are accumulated into a confusion matrix.
    """
    seq = _LoadedSequence(paths, need_labels=True)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    def process(index: int):
        scan_path = seq.scan_paths[index]
        if index < cfg.n_prev:
            cloud, labels, _ = seq.load(index)
            prediction = np.zeros(len(cloud), dtype=np.uint8)
        else:
            cloud, labels, _ = seq.load(index)
            prediction = segment_scan(seq, index, cfg, head)
        out_path = out_dir / (scan_path.stem + ".label")
        dataset_io.write_labels(
            encode_predictions(prediction, cfg.static_output_id, cfg.moving_output_id),
            out_path,
        )
        cm = None
        if evaluate:
            gt = dataset_io.to_mos_labels(labels, cfg.moving_classes)
            cm = accumulate(prediction, gt, ConfusionMatrix())
        return out_path, cm

    indices = range(len(seq.scan_paths))
    results: list[tuple[Path, ConfusionMatrix | None] | None] = [None] * len(seq.scan_paths)
    failed: list[int] = []
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            futures = {i: pool.submit(process, i) for i in indices}
            for i, future in futures.items():
                try:
                    results[i] = future.result()
                except Exception as exc:
                    if strict:
                        raise
                    failed.append(i)
                    logger.error("scan %d failed: %s", i, exc)
    else:
        for i in indices:
            try:
                results[i] = process(i)
            except Exception as exc:
                if strict:
                    raise
                failed.append(i)
                logger.error("scan %d failed: %s", i, exc)

    files = [r[0] for r in results if r is not None]
    confusion = None
    per_scan = None
    if evaluate:
        confusion = ConfusionMatrix()
        per_scan = []
        for i, r in enumerate(results):
            if r is None or r[1] is None:
                continue
            per_scan.append((seq.scan_paths[i].stem, r[1]))
            confusion = confusion.merge(r[1])
    return SegmentResult(files, sorted(failed), confusion, per_scan)


def evaluate_predictions(
    pred_dir: Path,
    paths: SequencePaths,
    spec: MovingClassSpec,
    moving_output_id: int = 250,
) -> tuple[ConfusionMatrix, list[tuple[str, ConfusionMatrix]]]:
    """Score prediction label files against the sequence's ground truth."""
    seq = _LoadedSequence(paths, need_labels=True)
    overall = ConfusionMatrix()
    per_scan = []
    for index, scan_path in enumerate(seq.scan_paths):
        pred_path = Path(pred_dir) / (scan_path.stem + ".label")
        if not pred_path.is_file():
            raise FileNotFoundError(f"missing prediction file: {pred_path}")
        cloud, labels, _ = seq.load(index)
        pred = decode_predictions(
            dataset_io.pair_scan_labels(cloud, dataset_io.read_labels(pred_path)),
            moving_output_id,
        )
        gt = dataset_io.to_mos_labels(labels, spec)
        cm = accumulate(pred, gt, ConfusionMatrix())
        per_scan.append((scan_path.stem, cm))
        overall = overall.merge(cm)
    return overall, per_scan
