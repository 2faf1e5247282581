"""Command-line front end wiring the pipeline.

Commands: project, associate, residual, segment, evaluate, render, synth,
and config dump. Every geometric default can be overridden by a YAML config
file (``--config``) and again by command-line flags.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import dataset_io
from .association import reproject_previous, write_association
from .config import dump_config, load_pipeline_config
from .evaluation import format_report
from .mos import decode_predictions
from .pipeline import SequencePaths, evaluate_predictions, run_segment
from .projection import CHANNEL_NAMES, spherical_project
from .render import (
    render_association,
    render_channels,
    render_label_overlay,
    render_residual,
)
from .residual import range_residual
from .synth import default_scene, generate, write_sequence

logger = logging.getLogger("rangemos")


def _projection_options(fn):
    for option in reversed(
        [
            click.option("--width", type=int, default=None, help="Range image width in pixels."),
            click.option("--height", type=int, default=None, help="Range image height in pixels."),
            click.option("--fov-up", type=float, default=None, help="Upper vertical FOV bound, degrees."),
            click.option("--fov-down", type=float, default=None, help="Lower vertical FOV bound, degrees."),
        ]
    ):
        fn = option(fn)
    return fn


def _config_option(fn):
    return click.option(
        "--config", "config_path", type=click.Path(exists=True, dir_okay=False), default=None,
        help="YAML config file layered between defaults and flags.",
    )(fn)


def _build_config(config_path, width, height, fov_up, fov_down, **extra):
    overrides = {
        "projection": {
            "width": width,
            "height": height,
            "fov_up_deg": fov_up,
            "fov_down_deg": fov_down,
        }
    }
    overrides.update(extra)
    try:
        return load_pipeline_config(config_path, overrides)
    except (KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(f"invalid configuration: {exc}") from exc


def _sequence_paths(seq_dir, poses, calib, labels_dir=None) -> SequencePaths:
    return SequencePaths(
        scan_dir=Path(seq_dir),
        poses_path=Path(poses),
        calib_path=Path(calib) if calib else None,
        label_dir=Path(labels_dir) if labels_dir else None,
    )


def _load_pair(paths: SequencePaths, cfg, index: int, prev_offset: int):
    """Project scan ``index`` and reproject scan ``index - prev_offset`` onto it."""
    scans = paths.scans()
    if not 0 <= index < len(scans):
        raise click.ClickException(f"--index {index} outside sequence of {len(scans)} scans")
    if index - prev_offset < 0:
        raise click.ClickException(f"--prev-offset {prev_offset} has no scan before index {index}")
    poses = dataset_io.read_poses(paths.poses_path, paths.calib_path)
    cur = dataset_io.read_scan(scans[index])
    prev = dataset_io.read_scan(scans[index - prev_offset])
    cur_img, _ = spherical_project(cur, cfg.projection)
    prev_img, _ = spherical_project(prev, cfg.projection)
    transform = dataset_io.relative_pose(poses[index - prev_offset], poses[index])
    moved_img, assoc = reproject_previous(prev_img, transform, cfg.projection)
    return cur_img, moved_img, assoc


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Debug logging.")
def main(verbose: bool) -> None:
    """Geometric toolkit for LiDAR moving-object segmentation on range images."""
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )


@main.command()
@click.option("--scan", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@_projection_options
@_config_option
def project(scan, out, width, height, fov_up, fov_down, config_path) -> None:
    """Project one scan to a range image, saved as an .npz archive."""
    cfg = _build_config(config_path, width, height, fov_up, fov_down)
    cloud = dataset_io.read_scan(scan)
    img, pixmap = spherical_project(cloud, cfg.projection)
    np.savez_compressed(
        out,
        **{name: img.channel(name) for name in CHANNEL_NAMES},
        valid=img.valid,
        source_point=img.source_point,
        point_u=pixmap.u,
        point_v=pixmap.v,
        width=cfg.projection.width,
        height=cfg.projection.height,
        fov_up=cfg.projection.fov_up,
        fov_down=cfg.projection.fov_down,
    )
    click.echo(f"wrote {out} ({int(img.valid.sum())} valid pixels)")


@main.command()
@click.option("--seq-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--poses", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--calib", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--index", required=True, type=int, help="Current scan index.")
@click.option("--prev-offset", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option(
    "--absent-value", type=click.Choice(["-1", "0"]), default="-1", show_default=True,
    help="Encoding for missing correspondences (0 collides with pixel (0,0)).",
)
@_projection_options
@_config_option
def associate(seq_dir, poses, calib, index, prev_offset, out, absent_value,
              width, height, fov_up, fov_down, config_path) -> None:
    """Export the previous->current pixel association map as int32 binary."""
    cfg = _build_config(config_path, width, height, fov_up, fov_down)
    _, _, assoc = _load_pair(_sequence_paths(seq_dir, poses, calib), cfg, index, prev_offset)
    write_association(assoc, out, absent_value=int(absent_value))
    click.echo(f"wrote {out} ({int(assoc.present.sum())} correspondences)")


@main.command()
@click.option("--seq-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--poses", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--calib", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--index", required=True, type=int)
@click.option("--prev-offset", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path(dir_okay=False), help="Output PNG.")
@click.option("--clip", type=float, default=1.0, show_default=True, help="Fixed residual normalization bound.")
@_projection_options
@_config_option
def residual(seq_dir, poses, calib, index, prev_offset, out, clip,
             width, height, fov_up, fov_down, config_path) -> None:
    """Render the normalized range residual between a scan pair."""
    cfg = _build_config(config_path, width, height, fov_up, fov_down)
    cur_img, moved_img, _ = _load_pair(_sequence_paths(seq_dir, poses, calib), cfg, index, prev_offset)
    res = range_residual(cur_img, moved_img)
    render_residual(res, Path(out), clip=clip)
    click.echo(f"wrote {out}")


@main.command()
@click.option("--seq-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--labels-dir", required=True, type=click.Path(exists=True, file_okay=False),
              help="Per-scan semantic labels driving the consistency rule.")
@click.option("--poses", required=True, type=click.Path(dir_okay=False))
@click.option("--calib", type=click.Path(dir_okay=False), default=None)
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--n-prev", type=int, default=None, help="Previous scans per prediction.")
@click.option("--tau", type=float, default=None, help="Residual threshold.")
@click.option("--use-residual", is_flag=True, default=None, help="Gate votes on the range residual.")
@click.option("--knn-k", type=int, default=None)
@click.option("--knn-window", type=int, default=None)
@click.option("--knn-cutoff", type=float, default=None)
@click.option("--no-knn", is_flag=True, default=None, help="Skip the kNN refinement stage.")
@click.option("--evaluate", "do_evaluate", is_flag=True, help="Score against the labels as ground truth.")
@click.option("--strict", is_flag=True, help="Abort on the first scan failure.")
@click.option("--seed", type=int, default=0, show_default=True, help="Reserved for stochastic stages; the rule-based pipeline is deterministic.")
@click.option("--jobs", type=int, default=1, show_default=True, help="Worker threads across scans.")
@click.option("--report", type=click.Path(dir_okay=False), default=None, help="Write key=value evaluation lines here.")
@_projection_options
@_config_option
def segment(seq_dir, labels_dir, poses, calib, out, n_prev, tau, use_residual,
            knn_k, knn_window, knn_cutoff, no_knn, do_evaluate, strict, seed, jobs,
            report, width, height, fov_up, fov_down, config_path) -> None:
    """Run the full MOS pipeline over a sequence, one label file per scan."""
    del seed  # deterministic pipeline; accepted for interface stability
    if not Path(poses).is_file():
        raise click.ClickException(f"pose file not found: {poses}")
    if calib and not Path(calib).is_file():
        raise click.ClickException(f"calibration file not found: {calib}")
    cfg = _build_config(
        config_path, width, height, fov_up, fov_down,
        classifier={"residual_threshold": tau, "use_residual": use_residual},
        knn={"k": knn_k, "window": knn_window, "range_cutoff": knn_cutoff,
             "enabled": (not no_knn) if no_knn is not None else None},
        pipeline={"n_prev": n_prev},
    )
    paths = _sequence_paths(seq_dir, poses, calib, labels_dir)
    try:
        result = run_segment(paths, cfg, Path(out), evaluate=do_evaluate, strict=strict, jobs=jobs)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"wrote {len(result.prediction_files)} prediction files to {out}")
    if result.failed_scans:
        click.echo(f"failed scans (skipped): {result.failed_scans}", err=True)
    if result.report is not None:
        text, machine = result.report
        click.echo(text)
        if report:
            Path(report).write_text(machine + "\n")


@main.command()
@click.option("--pred-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--seq-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--labels-dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option("--poses", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--calib", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--moving-id", type=int, default=250, show_default=True,
              help="Class id marking moving points in prediction files.")
@click.option("--report", type=click.Path(dir_okay=False), default=None)
@_config_option
def evaluate(pred_dir, seq_dir, labels_dir, poses, calib, moving_id, report, config_path) -> None:
    """Score prediction label files against ground-truth labels."""
    try:
        cfg = load_pipeline_config(config_path)
    except (KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(f"invalid configuration: {exc}") from exc
    paths = _sequence_paths(seq_dir, poses, calib, labels_dir)
    try:
        overall, per_scan = evaluate_predictions(Path(pred_dir), paths, cfg.moving_classes, moving_id)
    except Exception as exc:
        raise click.ClickException(str(exc)) from exc
    text, machine = format_report(overall, per_scan)
    click.echo(text)
    if report:
        Path(report).write_text(machine + "\n")


@main.command()
@click.option("--mode", required=True, type=click.Choice(["range", "residual", "labels", "association"]))
@click.option("--scan", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--labels", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--labels-kind", type=click.Choice(["semantic", "mos"]), default="semantic",
              show_default=True, help="semantic: moving classes from config; mos: prediction ids.")
@click.option("--moving-id", type=int, default=250, show_default=True)
@click.option("--seq-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--poses", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--calib", type=click.Path(exists=True, dir_okay=False), default=None)
@click.option("--index", type=int, default=None)
@click.option("--prev-offset", type=int, default=1, show_default=True)
@click.option("--out", required=True, type=click.Path())
@click.option("--channels", default="range", show_default=True,
              help="Comma-separated channels for range mode.")
@click.option("--clip", type=float, default=1.0, show_default=True)
@_projection_options
@_config_option
def render(mode, scan, labels, labels_kind, moving_id, seq_dir, poses, calib, index,
           prev_offset, out, channels, clip, width, height, fov_up, fov_down, config_path) -> None:
    """Render range channels, residuals, label overlays, or association maps."""
    cfg = _build_config(config_path, width, height, fov_up, fov_down)
    if mode == "range":
        if scan is None:
            raise click.ClickException("range mode requires --scan")
        img, _ = spherical_project(dataset_io.read_scan(scan), cfg.projection)
        written = render_channels(img, Path(out), [c.strip() for c in channels.split(",") if c.strip()])
        click.echo("wrote " + ", ".join(str(p) for p in written))
        return
    if mode == "labels":
        if scan is None or labels is None:
            raise click.ClickException("labels mode requires --scan and --labels")
        cloud = dataset_io.read_scan(scan)
        raw = dataset_io.pair_scan_labels(cloud, dataset_io.read_labels(labels))
        if labels_kind == "mos":
            moving = decode_predictions(raw, moving_id)
        else:
            moving = dataset_io.to_mos_labels(raw, cfg.moving_classes)
        img, _ = spherical_project(cloud, cfg.projection)
        mask = np.zeros((img.height, img.width), dtype=np.uint8)
        mask[img.valid] = moving[img.source_point[img.valid]]
        render_label_overlay(img, mask, Path(out))
        click.echo(f"wrote {out}")
        return
    if seq_dir is None or poses is None or index is None:
        raise click.ClickException(f"{mode} mode requires --seq-dir, --poses and --index")
    cur_img, moved_img, assoc = _load_pair(
        _sequence_paths(seq_dir, poses, calib), cfg, index, prev_offset
    )
    if mode == "residual":
        render_residual(range_residual(cur_img, moved_img), Path(out), clip=clip)
    else:
        render_association(assoc, Path(out))
    click.echo(f"wrote {out}")


@main.command()
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option("--scans", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--noise-sigma", type=float, default=0.0, show_default=True,
              help="Gaussian range noise in meters.")
@_projection_options
@_config_option
def synth(out, scans, seed, noise_sigma, width, height, fov_up, fov_down, config_path) -> None:
    """Generate the built-in synthetic scene as a ready-to-run sequence."""
    cfg = _build_config(config_path, width, height, fov_up, fov_down)
    scene = default_scene(
        n_scans=scans, beams=cfg.projection, range_noise_sigma=noise_sigma, seed=seed
    )
    records = generate(scene)
    write_sequence(records, Path(out))
    n_points = sum(len(r.cloud) for r in records)
    click.echo(f"wrote {len(records)} scans ({n_points} points) to {out}")


@main.group()
def config() -> None:
    """Configuration helpers."""


@config.command("dump")
@_config_option
def config_dump(config_path) -> None:
    """Print the effective configuration (defaults overlaid by --config)."""
    try:
        cfg = load_pipeline_config(config_path)
    except (KeyError, TypeError, ValueError) as exc:
        raise click.ClickException(f"invalid configuration: {exc}") from exc
    click.echo(dump_config(cfg), nl=False)


if __name__ == "__main__":
    main()
