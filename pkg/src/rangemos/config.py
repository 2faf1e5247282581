"""Layered pipeline configuration: defaults, then a YAML file, then CLI flags.

Angles live in the file and on the command line in degrees; the in-memory
configs use radians.
"""

from __future__ import annotations

from pathlib import Path
from typing import Any, Mapping

import numpy as np
import yaml

from .dataset_io import MovingClassSpec
from .mos import ClassifierConfig, NoCorrespondencePolicy
from .pipeline import PipelineConfig
from .postprocess import KnnConfig
from .projection import ProjectionConfig


def pipeline_config_to_dict(cfg: PipelineConfig) -> dict[str, Any]:
    return {
        "projection": {
            "width": cfg.projection.width,
            "height": cfg.projection.height,
            "fov_up_deg": float(np.rad2deg(cfg.projection.fov_up)),
            "fov_down_deg": float(np.rad2deg(cfg.projection.fov_down)),
            "min_range": cfg.projection.min_range,
        },
        "classifier": {
            "residual_threshold": cfg.classifier.residual_threshold,
            "use_residual": cfg.classifier.use_residual,
            "movable_only": cfg.classifier.movable_only,
            "no_correspondence": cfg.classifier.no_correspondence.value,
            "vote_min": cfg.classifier.vote_min,
        },
        "knn": {
            "enabled": cfg.knn_enabled,
            "k": cfg.knn.k,
            "window": cfg.knn.window,
            "range_cutoff": cfg.knn.range_cutoff,
            "weighting": cfg.knn.weighting,
        },
        "moving_classes": {
            "moving": sorted(cfg.moving_classes.moving_class_ids),
            "movable": sorted(cfg.moving_classes.movable_class_ids),
        },
        "pipeline": {
            "n_prev": cfg.n_prev,
            "static_output_id": cfg.static_output_id,
            "moving_output_id": cfg.moving_output_id,
        },
    }


def pipeline_config_from_dict(data: Mapping[str, Any]) -> PipelineConfig:
    base = pipeline_config_to_dict(PipelineConfig())
    merged = _merge(base, data)
    proj = merged["projection"]
    clf = merged["classifier"]
    knn = merged["knn"]
    classes = merged["moving_classes"]
    pipe = merged["pipeline"]
    # Accept the historical spelling for the undecidable-pixel policy.
    policy = str(clf["no_correspondence"]).replace("unknown->static", "unknown-as-static")
    return PipelineConfig(
        projection=ProjectionConfig(
            width=int(proj["width"]),
            height=int(proj["height"]),
            fov_up=float(np.deg2rad(proj["fov_up_deg"])),
            fov_down=float(np.deg2rad(proj["fov_down_deg"])),
            min_range=float(proj["min_range"]),
        ),
        classifier=ClassifierConfig(
            residual_threshold=float(clf["residual_threshold"]),
            use_residual=bool(clf["use_residual"]),
            movable_only=bool(clf["movable_only"]),
            no_correspondence=NoCorrespondencePolicy(policy),
            vote_min=int(clf["vote_min"]),
        ),
        knn=KnnConfig(
            k=int(knn["k"]),
            window=int(knn["window"]),
            range_cutoff=float(knn["range_cutoff"]),
            weighting=str(knn["weighting"]),
        ),
        moving_classes=MovingClassSpec(
            moving_class_ids=frozenset(int(c) for c in classes["moving"]),
            movable_class_ids=frozenset(int(c) for c in classes["movable"]),
        ),
        n_prev=int(pipe["n_prev"]),
        knn_enabled=bool(knn["enabled"]),
        static_output_id=int(pipe["static_output_id"]),
        moving_output_id=int(pipe["moving_output_id"]),
    )


def _merge(base: dict[str, Any], override: Mapping[str, Any]) -> dict[str, Any]:
    out = dict(base)
    for key, value in override.items():
        if key not in base:
            raise KeyError(f"unknown config key {key!r}")
        if isinstance(base[key], dict):
            if not isinstance(value, Mapping):
                raise TypeError(f"config section {key!r} must be a mapping")
            out[key] = _merge(base[key], value)
        elif value is not None:
            out[key] = value
    return out


def load_pipeline_config(
    path: str | Path | None = None, overrides: Mapping[str, Any] | None = None
) -> PipelineConfig:
    """Defaults, overlaid by an optional YAML file, overlaid by CLI values."""
    data: dict[str, Any] = pipeline_config_to_dict(PipelineConfig())
    if path is not None:
        loaded = yaml.safe_load(Path(path).read_text())
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise TypeError(f"{path}: config root must be a mapping")
        data = _merge(data, loaded)
    if overrides:
        data = _merge(data, overrides)
    return pipeline_config_from_dict(data)


def dump_config(cfg: PipelineConfig) -> str:
    """The effective configuration, ready to save and re-load."""
    return yaml.safe_dump(pipeline_config_to_dict(cfg), sort_keys=False)
